//! Compatibility of the slow-time evolutions of the higher corrections.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::coeff::{CoeffElement, CoeffField, FieldExt};
use crate::diffpoly::{DiffMonomial, DiffPolynomial, FieldSymbol, Grading};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyContext;
use crate::labels::Labeled;
use crate::linsolve::eliminate_unknowns;

/// `d/dt_m` of each untimed field, as a polynomial.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolutionRules {
    rules: BTreeMap<(FieldSymbol, u8), DiffPolynomial>,
}

impl EvolutionRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, field: FieldSymbol, m: u8, rule: DiffPolynomial) {
        self.rules.insert((field.untimed(), m), rule);
    }

    pub fn get(&self, field: FieldSymbol, m: u8) -> Option<&DiffPolynomial> {
        self.rules.get(&(field, m))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(FieldSymbol, u8), &DiffPolynomial)> {
        self.rules.iter()
    }

    fn map(&self, f: &dyn Fn(&DiffPolynomial) -> Result<DiffPolynomial>) -> Result<Self> {
        let mut out = EvolutionRules::new();
        for ((s, m), r) in &self.rules {
            out.rules.insert((*s, *m), f(r)?);
        }
        Ok(out)
    }
}

/// Chain rule: `d/dt_m F = sum dF/d(D^l u) * D^l (d u / dt_m)`.
pub fn apply_time_derivative(f: &DiffPolynomial, m: u8, rules: &EvolutionRules) -> Result<DiffPolynomial> {
    let mut missing = BTreeSet::new();
    let mut out = DiffPolynomial::zero();
    for factor in f.factors() {
        match rules.get(factor.symbol, m) {
            Some(rule) => out.add_assign(&f.partial(factor).mul(&rule.d_x_n(factor.order as u32))),
            None => {
                missing.insert(format!("d/dt{m} {}", factor.symbol));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingEvolution(missing.into_iter().collect()));
    }
    Ok(out)
}

/// `{d/dt3 - F3'} F2 = {d/dt2 - F2'} F3` with `F2` known and `F3` unknown.
#[derive(Clone, Debug)]
pub struct CompatibilityProblem {
    pub variant: Grading,
    /// Field whose forcings are related (`phi2`, `phi3` or `varphi3`).
    pub target: FieldSymbol,
    pub known: Vec<Labeled>,
    /// Values of the known coefficients from the reduction, if available.
    pub known_values: Option<Vec<CoeffElement>>,
    pub ansatz: Vec<Labeled>,
    pub rules: EvolutionRules,
    pub context: HierarchyContext,
    /// Known-coefficient names preferred as constraint pivots, in order.
    pub preferred_pivots: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// `name = sum coeff * known`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm {
    pub name: String,
    pub terms: Vec<(String, CoeffElement)>,
}

impl LinearForm {
    pub fn to_text(&self) -> String {
        let rhs: Vec<String> = self.terms.iter().map(|(n, c)| format!("[{}]*{}", c.to_text(), n)).collect();
        format!("{} = {}", self.name, if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ") })
    }

    fn eval(&self, names: &[Labeled], values: &[CoeffElement], field: &Arc<CoeffField>) -> CoeffElement {
        let mut acc = field.zero();
        for (n, c) in &self.terms {
            let i = names.iter().position(|l| &l.name == n).expect("known name");
            acc = &acc + &(c * &values[i]);
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub constraint: String,
    pub lhs: CoeffElement,
    pub rhs: CoeffElement,
}

#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub solved: Vec<LinearForm>,
    pub undetermined: Vec<String>,
    /// Relations `pivot = sum coeff * other` among the known coefficients.
    pub constraints: Vec<LinearForm>,
    /// The same relations as rows over `known` (pivot coefficient 1, moved to the left).
    pub constraint_rows: Vec<Vec<CoeffElement>>,
    pub verdict: Option<Verdict>,
    pub witness: Option<Witness>,
    pub equation_monomials: usize,
}

impl CompatibilityProblem {
    fn field(&self) -> Arc<CoeffField> {
        self.context.alpha1.field().clone()
    }

    fn flows(&self) -> Result<(crate::hierarchy::Flow, crate::hierarchy::Flow)> {
        let ctx = self.context.with_variant(self.variant);
        Ok((ctx.build_flow(2)?, ctx.build_flow(3)?))
    }

    /// Left side minus right side for the given coefficient values.
    pub fn residual(&self, known: &[CoeffElement], ansatz: &[CoeffElement]) -> Result<DiffPolynomial> {
        let (f2, f3) = self.flows()?;
        let assemble = |labels: &[Labeled], vals: &[CoeffElement]| {
            let mut p = DiffPolynomial::zero();
            for (l, v) in labels.iter().zip(vals) {
                p.add_term(l.monomial.clone(), v.clone());
            }
            p
        };
        let g2 = assemble(&self.known, known);
        let g3 = assemble(&self.ansatz, ansatz);
        let lhs = apply_time_derivative(&g2, 3, &self.rules)?.sub(&f3.linearize(&g2));
        let rhs = apply_time_derivative(&g3, 2, &self.rules)?.sub(&f2.linearize(&g3));
        Ok(lhs.sub(&rhs))
    }

    /// Specialize every coefficient at `h`.
    pub fn specialize(&self, field: &Arc<CoeffField>) -> Result<Self> {
        let sp = |e: &CoeffElement| e.specialize(field).map_err(Error::from);
        let sp_poly = |p: &DiffPolynomial| -> Result<DiffPolynomial> {
            let mut out = DiffPolynomial::zero();
            for (m, c) in p.terms() {
                out.add_term(m.clone(), sp(c)?);
            }
            Ok(out)
        };
        let mut ctx = HierarchyContext::new(sp(&self.context.alpha1)?, sp(&self.context.alpha2)?, self.context.variant)?;
        for (j, b) in &self.context.betas {
            ctx = ctx.with_beta(*j, sp(b)?);
        }
        Ok(CompatibilityProblem {
            known_values: self.known_values.as_ref().map(|v| v.iter().map(sp).collect::<Result<Vec<_>>>()).transpose()?,
            rules: self.rules.map(&sp_poly)?,
            context: ctx,
            ..self.clone()
        })
    }
}

fn column(p: &DiffPolynomial, index: &mut BTreeMap<DiffMonomial, usize>, rows: &mut Vec<BTreeMap<usize, CoeffElement>>, col: usize) {
    for (m, c) in p.terms() {
        let r = *index.entry(m.clone()).or_insert_with(|| {
            rows.push(BTreeMap::new());
            rows.len() - 1
        });
        rows[r].insert(col, c.clone());
    }
}

/// Assemble and solve the linear system; see [`CompatibilityProblem`].
pub fn solve_compatibility(problem: &CompatibilityProblem) -> Result<CompatibilityReport> {
    let field = problem.field();
    let (f2, f3) = problem.flows()?;
    let nu = problem.ansatz.len();
    let np = problem.known.len();
    let mut index = BTreeMap::new();
    let mut sparse = Vec::new();
    for (k, l) in problem.ansatz.iter().enumerate() {
        let n = DiffPolynomial::term(field.one(), l.monomial.clone());
        let t2 = apply_time_derivative(&n, 2, &problem.rules)?.sub(&f2.linearize(&n));
        column(&t2.neg(), &mut index, &mut sparse, k);
    }
    for (i, l) in problem.known.iter().enumerate() {
        let m = DiffPolynomial::term(field.one(), l.monomial.clone());
        let t3 = apply_time_derivative(&m, 3, &problem.rules)?.sub(&f3.linearize(&m));
        column(&t3, &mut index, &mut sparse, nu + i);
    }
    let rows: Vec<Vec<CoeffElement>> =
        sparse.iter().map(|r| (0..nu + np).map(|j| r.get(&j).cloned().unwrap_or_else(|| field.zero())).collect()).collect();

    let mut order: Vec<usize> = Vec::new();
    for name in &problem.preferred_pivots {
        if let Some(i) = problem.known.iter().position(|l| &l.name == name) {
            order.push(i);
        }
    }
    for i in (0..np).rev() {
        if !order.contains(&i) {
            order.push(i);
        }
    }
    let elim = eliminate_unknowns(rows, nu, &order)?;

    let form = |name: String, coeffs: &[CoeffElement], skip: Option<usize>| LinearForm {
        name,
        terms: coeffs
            .iter()
            .enumerate()
            .filter(|(j, c)| Some(*j) != skip && !c.is_zero())
            .map(|(j, c)| (problem.known[j].name.clone(), c.clone()))
            .collect(),
    };
    let solved = elim.solved.iter().map(|(k, coeffs)| form(problem.ansatz[*k].name.clone(), coeffs, None)).collect();
    let constraints: Vec<LinearForm> = elim
        .constraints
        .iter()
        .zip(&elim.constraint_pivots)
        .map(|(row, &p)| {
            let neg: Vec<CoeffElement> = row.iter().map(|e| -e).collect();
            form(problem.known[p].name.clone(), &neg, Some(p))
        })
        .collect();

    let (verdict, witness) = match &problem.known_values {
        None => (None, None),
        Some(vals) => {
            let mut witness = None;
            for (c, &p) in constraints.iter().zip(&elim.constraint_pivots) {
                let rhs = c.eval(&problem.known, vals, &field);
                if rhs != vals[p] {
                    witness = Some(Witness { constraint: c.name.clone(), lhs: vals[p].clone(), rhs });
                    break;
                }
            }
            (Some(if witness.is_some() { Verdict::Fail } else { Verdict::Pass }), witness)
        }
    };
    Ok(CompatibilityReport {
        solved,
        undetermined: elim.free.iter().map(|&k| problem.ansatz[k].name.clone()).collect(),
        constraints,
        constraint_rows: elim.constraints,
        verdict,
        witness,
        equation_monomials: index.len(),
    })
}

impl CompatibilityReport {
    /// Values of the solved ansatz coefficients for given known values.
    pub fn evaluate_solved(&self, problem: &CompatibilityProblem, known: &[CoeffElement]) -> Result<Vec<CoeffElement>> {
        if !self.undetermined.is_empty() {
            return Err(Error::InconsistentSystem(format!("undetermined coefficients {:?}", self.undetermined)));
        }
        let field = problem.field();
        problem
            .ansatz
            .iter()
            .map(|l| {
                let f = self.solved.iter().find(|f| f.name == l.name).ok_or_else(|| Error::Invariant(format!("{} unsolved", l.name)))?;
                Ok(f.eval(&problem.known, known, &field))
            })
            .collect()
    }
}

/// Order of the integrability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    Seven,
    Nine,
}

impl Level {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            7 => Ok(Level::Seven),
            9 => Ok(Level::Nine),
            o => Err(Error::Unsupported(format!("compatibility order {o}; use 7 or 9"))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Level::Seven => 7,
            Level::Nine => 9,
        }
    }
}

/// The compatibility problem at `level` built from a completed reduction.
/// With `symbolic` the known coefficients carry no values.
pub fn problem_from_report(report: &crate::reduction::ReductionReport, level: Level, symbolic: bool) -> Result<CompatibilityProblem> {
    use crate::labels;
    let ctx = report.context()?;
    match level {
        Level::Seven => {
            let f =
                report.forcing(FieldSymbol::phi(2), 2).ok_or_else(|| Error::Invariant("reduction stopped before order seven".into()))?;
            crate::reduction::order7_problem(&ctx, (!symbolic).then(|| f.values.clone()))
        }
        Level::Nine => {
            let phi1 = FieldSymbol::phi(1);
            let phi2 = FieldSymbol::phi(2);
            let rule = |s: FieldSymbol, m: u8| {
                report.rules.get(s, m).cloned().ok_or_else(|| Error::MissingEvolution(vec![format!("d/dt{m} {s}")]))
            };
            if let Some(h) = report.forcing(FieldSymbol::phi(3), 2) {
                let mut rules = EvolutionRules::new();
                for m in [2, 3] {
                    rules.insert(phi1, m, rule(phi1, m)?);
                    rules.insert(phi2, m, rule(phi2, m)?);
                }
                Ok(CompatibilityProblem {
                    variant: Grading::Potential,
                    target: FieldSymbol::phi(3),
                    known: h.labels.clone(),
                    known_values: (!symbolic).then(|| h.values.clone()),
                    ansatz: labels::generic_terms("e", 10, 2, Grading::Potential),
                    rules,
                    context: ctx,
                    preferred_pivots: ["c6", "c7", "c10"].map(String::from).to_vec(),
                })
            } else if let Some(g) = report.forcing(FieldSymbol::varphi(3), 2) {
                let mut rules = EvolutionRules::new();
                for m in [2, 3] {
                    rules.insert(FieldSymbol::varphi(1), m, rule(phi1, m)?.d_x().to_density()?);
                    rules.insert(FieldSymbol::varphi(2), m, rule(phi2, m)?.d_x().to_density()?);
                }
                Ok(CompatibilityProblem {
                    variant: Grading::Kdv,
                    target: FieldSymbol::varphi(3),
                    known: g.labels.clone(),
                    known_values: (!symbolic).then(|| g.values.clone()),
                    ansatz: labels::generic_terms("k", 11, 2, Grading::Kdv),
                    rules,
                    context: ctx.with_variant(Grading::Kdv),
                    preferred_pivots: ["d7", "d8", "d11", "d12", "d13"].map(String::from).to_vec(),
                })
            } else {
                Err(Error::Invariant("reduction stopped before order nine".into()))
            }
        }
    }
}

/// PASS iff the computed forcing satisfies every compatibility constraint at `level`.
pub fn verdict(report: &crate::reduction::ReductionReport, level: Level) -> Result<(Verdict, Option<Witness>)> {
    let problem = problem_from_report(report, level, false)?;
    let rep = solve_compatibility(&problem)?;
    Ok((rep.verdict.expect("values were supplied"), rep.witness))
}
