//! Order-by-order multiscale reduction of the lattice.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coeff::{CoeffElement, CoeffField, FieldExt, ModelParams};
use crate::compat::{apply_time_derivative, solve_compatibility, CompatibilityProblem, EvolutionRules};
use crate::diffpoly::{enumerate_basis, DiffMonomial, DiffPolynomial, Factor, FieldKind, FieldSymbol, Grading};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyContext;
use crate::labels::{self, Labeled};
use crate::series::lattice_series;

/// Highest ε-order the engine resolves.
pub const MAX_ORDER: u32 = 9;

#[derive(Clone, Debug)]
pub struct Dispersion {
    /// `c^2` before choosing the lattice step, as `zeta^2 * (...)`.
    pub general: String,
    pub zeta: String,
    pub c_squared: CoeffElement,
    /// Characteristic speed `v` with `x = kappa - v t1`.
    pub speed: CoeffElement,
    pub note: String,
}

/// A forcing polynomial with its conventional coefficient names.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub target: FieldSymbol,
    pub time: u8,
    pub degree: u32,
    pub max_field: u8,
    pub grading: Grading,
    pub labels: Vec<Labeled>,
    pub values: Vec<CoeffElement>,
    pub polynomial: DiffPolynomial,
}

impl Forcing {
    pub fn name(&self) -> String {
        let stem = match (self.target, self.grading) {
            (t, _) if t.index == 2 => "f",
            (_, Grading::Potential) => "h",
            (_, Grading::Kdv) => "g",
        };
        format!("{stem}^(t{})", self.time)
    }

    pub fn value(&self, label: &str) -> Option<&CoeffElement> {
        self.labels.iter().position(|l| l.name == label).map(|i| &self.values[i])
    }
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub order: u32,
    pub summary: String,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub params: ModelParams,
    pub order: u32,
    pub field: Arc<CoeffField>,
    pub dispersion: Option<Dispersion>,
    pub nu_solutions: BTreeMap<u8, DiffPolynomial>,
    pub alphas: BTreeMap<u8, CoeffElement>,
    pub betas: BTreeMap<u8, CoeffElement>,
    pub forcings: Vec<Forcing>,
    pub stage_log: Vec<StageRecord>,
    /// Evolutions of the potential fields known at the end of the run.
    pub rules: EvolutionRules,
    /// Why the order-nine potential equation left the local algebra, if it did.
    pub nonlocal: Option<String>,
}

impl ReductionReport {
    pub fn forcing(&self, target: FieldSymbol, time: u8) -> Option<&Forcing> {
        self.forcings.iter().find(|f| f.target == target && f.time == time)
    }

    pub fn context(&self) -> Result<HierarchyContext> {
        let a1 = self.alphas.get(&1).ok_or_else(|| Error::Invariant("alpha1 not computed".into()))?;
        let a2 = self.alphas.get(&2).ok_or_else(|| Error::Invariant("alpha2 not computed".into()))?;
        let mut ctx = HierarchyContext::new(a1.clone(), a2.clone(), Grading::Potential)?;
        for (j, b) in &self.betas {
            ctx = ctx.with_beta(*j, b.clone());
        }
        Ok(ctx)
    }
}

struct Engine {
    field: Arc<CoeffField>,
    sigma: CoeffElement,
    speed: CoeffElement,
    rules: EvolutionRules,
    nus: BTreeMap<u8, DiffPolynomial>,
}

fn is_leaf(f: &Factor) -> bool {
    f.symbol.kind == FieldKind::Potential && f.symbol.time >= 2
}

impl Engine {
    fn one(&self) -> CoeffElement {
        self.field.one()
    }

    /// `d/dt_m` of a polynomial in potentials, tagging unknown evolutions.
    /// Every field depends on `t1` only through `x = kappa - v t1`.
    fn time_derivative(&self, p: &DiffPolynomial, m: u8) -> Result<DiffPolynomial> {
        let mut rules = EvolutionRules::new();
        if m == 1 {
            return Ok(p.d_x().scale(&-&self.speed));
        }
        for s in p.symbols() {
            if s.is_timed() || s.kind != FieldKind::Potential {
                return Err(Error::Invariant(format!("time derivative of unresolved {s}")));
            }
            let rule = match self.rules.get(s, m) {
                Some(r) => r.clone(),
                None => DiffPolynomial::atom(self.one(), s.at_time(m), 0),
            };
            rules.insert(s, m, rule);
        }
        apply_time_derivative(p, m, &rules)
    }

    /// Replace amplitudes by their solutions and known slow-time evolutions by their rules.
    fn resolve(&self, p: &DiffPolynomial) -> Result<DiffPolynomial> {
        let mut cur = p.clone();
        for _ in 0..16 {
            let mut pending = false;
            let mut images: BTreeMap<Factor, DiffPolynomial> = BTreeMap::new();
            for f in cur.factors() {
                let s = f.symbol;
                let image = match s.kind {
                    FieldKind::Potential if s.time >= 1 => self.rules.get(s.untimed(), s.time).cloned(),
                    FieldKind::Amplitude => match self.nus.get(&s.index) {
                        Some(sol) if s.time == 0 => Some(sol.clone()),
                        Some(sol) => Some(self.time_derivative(&self.resolve(sol)?, s.time)?),
                        None => None,
                    },
                    _ => None,
                };
                if let Some(img) = image {
                    images.insert(f, img.d_x_n(f.order as u32));
                    pending = true;
                }
            }
            if !pending {
                return Ok(cur);
            }
            cur = cur.substitute(&|f| images.get(&f).cloned());
        }
        Err(Error::Invariant("substitution did not reach a fixed point".into()))
    }
}

/// Replace every formal slow-time derivative by its known evolution.
pub fn substitute_slow_times(expr: &DiffPolynomial, known: &EvolutionRules) -> Result<DiffPolynomial> {
    let missing: Vec<String> = expr
        .factors()
        .into_iter()
        .filter(|f| f.symbol.is_timed() && known.get(f.symbol.untimed(), f.symbol.time).is_none())
        .map(|f| f.symbol.to_string())
        .collect();
    if !missing.is_empty() {
        let mut m = missing;
        m.dedup();
        return Err(Error::MissingEvolution(m));
    }
    Ok(expr.substitute(&|f| {
        if f.symbol.is_timed() {
            known.get(f.symbol.untimed(), f.symbol.time).map(|r| r.d_x_n(f.order as u32))
        } else {
            None
        }
    }))
}

fn atom(c: CoeffElement, j: u8, l: u8) -> DiffPolynomial {
    DiffPolynomial::atom(c, FieldSymbol::phi(j), l)
}

fn coefficient(p: &DiffPolynomial, fs: &[Factor]) -> Option<CoeffElement> {
    p.coefficient(&DiffMonomial::from_factors(fs.iter().copied())).cloned()
}

fn phi(j: u8, l: u8) -> Factor {
    Factor::new(FieldSymbol::phi(j), l)
}

/// Order-three data: `c^2` read off the linear parts with unit step.
fn derive_dispersion(params: ModelParams, field: &Arc<CoeffField>) -> Result<Dispersion> {
    let lin = lattice_series(field, &field.one(), 3)?;
    let one = field.one();
    let phase2 = lin.phase.part_of_degree(2);
    let nu1 = DiffMonomial::factor(Factor::new(FieldSymbol::nu(1), 0));
    let t1 = DiffMonomial::factor(Factor::new(FieldSymbol::phi(1).at_time(1), 0));
    let a_nu = phase2.coefficient(&nu1).cloned().ok_or_else(|| Error::Dispersion("no nu1 term at order two".into()))?;
    let a_t = phase2.coefficient(&t1).cloned().ok_or_else(|| Error::Dispersion("no d/dt1 phi1 term at order two".into()))?;
    if phase2.len() != 2 {
        return Err(Error::Dispersion(format!("unexpected order-two terms: {phase2:?}")));
    }
    let amp3 = lin.amplitude.part_of_degree(3);
    let nu1_t1 = DiffMonomial::factor(Factor::new(FieldSymbol::nu(1).at_time(1), 0));
    let b_t = amp3.coefficient(&nu1_t1).cloned().ok_or_else(|| Error::Dispersion("no d/dt1 nu1 term".into()))?;
    let b_x = coefficient(&amp3, &[phi(1, 2)]).ok_or_else(|| Error::Dispersion("no d^2 phi1 term".into()))?;
    if amp3.len() != 2 {
        return Err(Error::Dispersion(format!("unexpected order-three terms: {amp3:?}")));
    }
    // a_t phi_t + a_nu nu = 0 and b_t nu_t + b_x phi_xx = 0 give phi_tt = c^2 phi_xx
    let ratio = (&b_x * &a_nu).checked_div(&(&b_t * &a_t))?;
    let c2 = &ratio * &field.h().pow(2);
    let h_half = num_rational::BigRational::new(1.into(), 2.into());
    let sample = c2.eval_numeric(&h_half, 1)?;
    if sample.value <= 0.0 {
        return Err(Error::Dispersion(format!(
            "c^2 = {} is negative, so no real wave speed exists for sigma = {}",
            c2.to_text(),
            params.sigma
        )));
    }
    let field_c2 = &field.c() * &field.c();
    if field_c2 != c2 {
        return Err(Error::Invariant(format!("derived c^2 = {} differs from the field relation {}", c2.to_text(), field_c2.to_text())));
    }
    let speed = if params.c_sign < 0 { -field.c() } else { field.c() };
    let _ = one;
    Ok(Dispersion {
        general: format!("zeta^2 * {}", ratio.to_text()),
        zeta: "h".into(),
        c_squared: c2,
        speed,
        note: "a real wave speed requires sigma = +1".into(),
    })
}

#[allow(clippy::too_many_arguments)]
fn forcing(
    target: FieldSymbol,
    time: u8,
    poly: &DiffPolynomial,
    labels: Vec<Labeled>,
    degree: u32,
    max_field: u8,
    grading: Grading,
    field: &Arc<CoeffField>,
) -> Result<Forcing> {
    if let Some(m) = poly.monomials().find(|m| m.factor_count() < 2) {
        let c = poly.coefficient(m).unwrap();
        return Err(Error::SecularResidue(format!("{} * {m} in the forcing of {target} along t{time}", c.to_text())));
    }
    let basis = enumerate_basis(degree, max_field, grading);
    if let Some(m) = poly.monomials().find(|m| !basis.contains(m)) {
        return Err(Error::Invariant(format!("forcing monomial {m} is outside P_{degree}^({max_field})")));
    }
    if let Some(m) = poly.monomials().find(|m| !labels.iter().any(|l| &l.monomial == *m)) {
        return Err(Error::Invariant(format!("forcing monomial {m} has no conventional name")));
    }
    let values = labels.iter().map(|l| poly.coefficient(&l.monomial).cloned().unwrap_or_else(|| field.zero())).collect();
    Ok(Forcing { target, time, degree, max_field, grading, labels, values, polynomial: poly.clone() })
}

/// Order-seven compatibility problem with the a-coefficients as knowns.
pub fn order7_problem(ctx: &HierarchyContext, a_values: Option<Vec<CoeffElement>>) -> Result<CompatibilityProblem> {
    let mut rules = EvolutionRules::new();
    rules.insert(FieldSymbol::phi(1), 2, ctx.build_flow(2)?.polynomial);
    rules.insert(FieldSymbol::phi(1), 3, ctx.build_flow(3)?.polynomial);
    Ok(CompatibilityProblem {
        variant: Grading::Potential,
        target: FieldSymbol::phi(2),
        known: labels::a_terms(),
        known_values: a_values,
        ansatz: labels::b_terms(),
        rules,
        context: ctx.clone(),
        preferred_pivots: vec![],
    })
}

/// Run the reduction of the lattice with parameters `params` through ε-order `order`.
pub fn run_reduction(params: ModelParams, order: u32) -> Result<ReductionReport> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(Error::Unsupported(format!("reduction order {order}; supported orders are 2..={MAX_ORDER}")));
    }
    if params.s > 1 || params.sigma.abs() != 1 || params.c_sign.abs() != 1 {
        return Err(Error::Coeff(crate::error::CoeffError::Params(format!("{params:?}"))));
    }
    let field = CoeffField::new(params);
    let mut report = ReductionReport {
        params,
        order,
        field: field.clone(),
        dispersion: None,
        nu_solutions: BTreeMap::new(),
        alphas: BTreeMap::new(),
        betas: BTreeMap::new(),
        forcings: Vec::new(),
        stage_log: Vec::new(),
        rules: EvolutionRules::new(),
        nonlocal: None,
    };
    let speed = if order >= 3 {
        let d = derive_dispersion(params, &field)?;
        let v = d.speed.clone();
        report.stage_log.push(StageRecord { order: 3, summary: format!("c^2 = {} = {}", d.general, d.c_squared.to_text()) });
        report.dispersion = Some(d);
        v
    } else {
        field.c().scale_rational(&num_rational::BigRational::from_integer(params.c_sign.into()))
    };

    let series = lattice_series(&field, &field.h(), order)?;
    let mut eng = Engine {
        field: field.clone(),
        sigma: field.sigma_elem(),
        speed: speed.clone(),
        rules: EvolutionRules::new(),
        nus: BTreeMap::new(),
    };
    for j in 1..=(order / 2 + 1) as u8 {
        eng.rules.insert(FieldSymbol::phi(j), 1, atom(-&speed, j, 1));
    }
    let mut ctx: Option<HierarchyContext> = None;
    let mut lambda: Option<CoeffElement> = None;

    for k in 2..=order {
        let i = (k / 2) as u8;
        if k % 2 == 0 {
            let r = eng.resolve(&series.phase.part_of_degree(k))?;
            let nu = DiffMonomial::factor(Factor::new(FieldSymbol::nu(i), 0));
            if r.coefficient(&nu) != Some(&eng.sigma) {
                return Err(Error::Invariant(format!("order {k}: nu{i} enters with coefficient {:?}", r.coefficient(&nu))));
            }
            let rest = r.filter(|m, _| m != &nu);
            if rest.symbols().iter().any(|s| s.kind == FieldKind::Amplitude) {
                return Err(Error::Invariant(format!("order {k}: amplitudes remain after elimination")));
            }
            let sol = rest.scale(&(-&eng.sigma.inv()?));
            report.stage_log.push(StageRecord { order: k, summary: format!("nu{i} eliminated ({} terms)", sol.len()) });
            eng.nus.insert(i, sol);
            continue;
        }
        let r = eng.resolve(&series.amplitude.part_of_degree(k))?;
        // split into leaf terms lambda * D[1]{leaf} and the rest
        let mut leaves = Vec::new();
        let mut q = DiffPolynomial::zero();
        for (m, c) in r.terms() {
            if m.factors().iter().any(|(f, _)| is_leaf(f)) {
                let [(f, 1)] = m.factors() else {
                    return Err(Error::Invariant(format!("order {k}: nonlinear slow-time term {m}")));
                };
                if f.order != 1 {
                    return Err(Error::Invariant(format!("order {k}: unexpected leaf {f}")));
                }
                match &lambda {
                    Some(l) if l != c => return Err(Error::Invariant(format!("order {k}: leaf coefficient {c} differs from {l}"))),
                    Some(_) => {}
                    None => lambda = Some(c.clone()),
                }
                leaves.push(f.symbol);
            } else {
                q.add_term(m.clone(), c.clone());
            }
        }
        if q.symbols().contains(&FieldSymbol::phi(i)) {
            return Err(Error::Invariant(format!("order {k}: phi{i} survives the wave identity")));
        }
        if i == 1 {
            if !r.is_zero() {
                return Err(Error::Dispersion(format!("order three does not vanish: {r:?}")));
            }
            continue;
        }
        let lam = lambda.clone().ok_or_else(|| Error::Invariant(format!("order {k}: no slow-time terms")))?;
        leaves.sort();
        let rhs = q.scale(&(-&lam.inv()?));
        match i {
            2 => {
                let e = rhs.integrate_x()?;
                let a1 = coefficient(&e, &[phi(1, 3)]).ok_or_else(|| Error::Invariant("no d^3 phi1 term at order five".into()))?;
                let a2 =
                    coefficient(&e, &[phi(1, 1), phi(1, 1)]).ok_or_else(|| Error::Invariant("no (d phi1)^2 term at order five".into()))?;
                if e.len() != 2 {
                    return Err(Error::Invariant(format!("order five evolution has extra terms: {e:?}")));
                }
                report.alphas.insert(1, a1.clone());
                report.alphas.insert(2, a2.clone());
                let c = HierarchyContext::new(a1, a2, Grading::Potential)?;
                eng.rules.insert(FieldSymbol::phi(1), 2, c.build_flow(2)?.polynomial);
                report.stage_log.push(StageRecord { order: k, summary: "d/dt2 phi1 = K2".into() });
                ctx = Some(c);
            }
            3 => {
                let c = ctx.clone().unwrap();
                let e = rhs.integrate_x()?;
                let k2p = c.build_flow(2)?.linearize(&atom(eng.one(), 2, 0));
                let r2 = e.sub(&k2p);
                if r2.symbols().iter().any(|s| *s != FieldSymbol::phi(1)) {
                    return Err(Error::Invariant(format!("order seven: phi2 terms beyond K2' phi2: {r2:?}")));
                }
                for (n, fs) in [
                    (3u8, vec![phi(1, 2), phi(1, 2)]),
                    (4, vec![phi(1, 1), phi(1, 1), phi(1, 1)]),
                    (5, vec![phi(1, 1), phi(1, 3)]),
                    (6, vec![phi(1, 5)]),
                ] {
                    report.alphas.insert(n, coefficient(&r2, &fs).unwrap_or_else(|| field.zero()));
                }
                let unit3 = c.build_unit_flow(3)?.polynomial;
                let top = coefficient(&unit3, &[phi(1, 5)]).unwrap();
                let beta3 = coefficient(&r2, &[phi(1, 5)]).unwrap_or_else(|| field.zero()).checked_div(&top)?;
                let c = c.with_beta(3, beta3.clone());
                report.betas.insert(3, beta3);
                let k3 = c.build_flow(3)?.polynomial;
                let f2 = r2.sub(&k3);
                let f = forcing(FieldSymbol::phi(2), 2, &f2, labels::a_terms(), 6, 1, Grading::Potential, &field)?;
                eng.rules.insert(FieldSymbol::phi(1), 3, k3);
                eng.rules.insert(FieldSymbol::phi(2), 2, k2p.add(&f2));
                report.stage_log.push(StageRecord { order: k, summary: "beta3 fixed; f^(t2) in P_6^(1)".into() });

                let problem = order7_problem(&c, Some(f.values.clone()))?;
                let sol = solve_compatibility(&problem)?;
                let b = sol.evaluate_solved(&problem, &f.values)?;
                let mut f3 = DiffPolynomial::zero();
                for (l, v) in problem.ansatz.iter().zip(&b) {
                    f3.add_term(l.monomial.clone(), v.clone());
                }
                let k3p = c.build_flow(3)?.linearize(&atom(eng.one(), 2, 0));
                eng.rules.insert(FieldSymbol::phi(2), 3, k3p.add(&f3));
                report.forcings.push(f);
                report.forcings.push(forcing(FieldSymbol::phi(2), 3, &f3, labels::b_terms(), 8, 1, Grading::Potential, &field)?);
                ctx = Some(c);
            }
            4 => {
                let c = ctx.clone().unwrap();
                match rhs.integrate_x() {
                    Ok(e) => {
                        let k2p = c.build_flow(2)?.linearize(&atom(eng.one(), 3, 0));
                        let r3 = e.sub(&k2p);
                        if r3.symbols().contains(&FieldSymbol::phi(3)) {
                            return Err(Error::Invariant(format!("order nine: phi3 terms beyond K2' phi3: {r3:?}")));
                        }
                        let unit4 = c.build_unit_flow(4)?.polynomial;
                        let top = coefficient(&unit4, &[phi(1, 7)]).unwrap();
                        let beta4 = coefficient(&r3, &[phi(1, 7)]).unwrap_or_else(|| field.zero()).checked_div(&top)?;
                        let c = c.with_beta(4, beta4.clone());
                        report.betas.insert(4, beta4);
                        let k4 = c.build_flow(4)?.polynomial;
                        let h2 = r3.sub(&k4);
                        report.forcings.push(forcing(FieldSymbol::phi(3), 2, &h2, labels::c_terms(), 8, 2, Grading::Potential, &field)?);
                        eng.rules.insert(FieldSymbol::phi(1), 4, k4);
                        eng.rules.insert(FieldSymbol::phi(3), 2, k2p.add(&h2));
                        report.stage_log.push(StageRecord { order: k, summary: "beta4 fixed; h^(t2) in P_8^(2)".into() });
                        ctx = Some(c);
                    }
                    Err(Error::NonLocal(why)) => {
                        report.nonlocal = Some(why);
                        let d = rhs.to_density()?;
                        let kc = c.with_variant(Grading::Kdv);
                        let rho = DiffPolynomial::atom(eng.one(), FieldSymbol::varphi(3), 0);
                        let h2p = kc.build_flow(2)?.linearize(&rho);
                        let r3 = d.sub(&h2p);
                        if r3.symbols().contains(&FieldSymbol::varphi(3)) {
                            return Err(Error::Invariant(format!("order nine: varphi3 terms beyond H2' varphi3: {r3:?}")));
                        }
                        let unit4 = kc.build_unit_flow(4)?.polynomial;
                        let top8 = [Factor::new(FieldSymbol::varphi(1), 7)];
                        let top = coefficient(&unit4, &top8).unwrap();
                        let beta4 = coefficient(&r3, &top8).unwrap_or_else(|| field.zero()).checked_div(&top)?;
                        let c = c.with_beta(4, beta4.clone());
                        report.betas.insert(4, beta4);
                        let h4 = c.with_variant(Grading::Kdv).build_flow(4)?.polynomial;
                        let g2 = r3.sub(&h4);
                        report.forcings.push(forcing(FieldSymbol::varphi(3), 2, &g2, labels::d_terms(), 9, 2, Grading::Kdv, &field)?);
                        eng.rules.insert(FieldSymbol::phi(1), 4, c.build_flow(4)?.polynomial);
                        report.stage_log.push(StageRecord {
                            order: k,
                            summary: "potential form is nonlocal; beta4 fixed in density fields; g^(t2) in P_9^(2)".into(),
                        });
                        ctx = Some(c);
                    }
                    Err(e) => return Err(e),
                }
            }
            _ => unreachable!("orders above nine are rejected"),
        }
    }
    report.nu_solutions = eng.nus.iter().map(|(j, p)| Ok((*j, eng.resolve(p)?))).collect::<Result<_>>()?;
    report.rules = eng.rules;
    Ok(report)
}
