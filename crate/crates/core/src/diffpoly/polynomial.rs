use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;

use super::monomial::DiffMonomial;
use super::symbol::{Factor, FieldKind, FieldSymbol};
use crate::coeff::{CoeffElement, FieldExt};
use crate::error::{Error, Result};

/// Finite sum of monomials with nonzero [`CoeffElement`] coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DiffPolynomial {
    terms: BTreeMap<DiffMonomial, CoeffElement>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl DiffPolynomial {
    pub fn zero() -> Self {
        DiffPolynomial { terms: BTreeMap::new() }
    }

    pub fn term(coeff: CoeffElement, monomial: DiffMonomial) -> Self {
        let mut p = DiffPolynomial::zero();
        p.add_term(monomial, coeff);
        p
    }

    /// `coeff * D[order]{symbol}`.
    pub fn atom(coeff: CoeffElement, symbol: FieldSymbol, order: u8) -> Self {
        Self::term(coeff, DiffMonomial::factor(Factor::new(symbol, order)))
    }

    pub fn constant(coeff: CoeffElement) -> Self {
        Self::term(coeff, DiffMonomial::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &CoeffElement)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &DiffMonomial> {
        self.terms.keys()
    }

    pub fn coefficient(&self, m: &DiffMonomial) -> Option<&CoeffElement> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: DiffMonomial, c: CoeffElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &DiffPolynomial) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &DiffPolynomial) -> DiffPolynomial {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &DiffPolynomial) -> DiffPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> DiffPolynomial {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, k: &CoeffElement) -> DiffPolynomial {
        if k.is_zero() {
            return DiffPolynomial::zero();
        }
        self.map_coeffs(|c| c * k)
    }

    pub fn scale_rational(&self, r: &BigRational) -> DiffPolynomial {
        self.map_coeffs(|c| c.scale_rational(r))
    }

    /// Apply `f` to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&CoeffElement) -> CoeffElement) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &DiffPolynomial) -> DiffPolynomial {
        self.mul_truncated(other, u32::MAX)
    }

    /// Product keeping only terms of degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &DiffPolynomial, max_degree: u32) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        let rhs: Vec<_> = other.terms.iter().map(|(m, c)| (m, c, m.degree())).collect();
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            for (m2, c2, d2) in &rhs {
                if d1 + d2 > max_degree {
                    continue;
                }
                out.add_term(m1.mul(m2), c1 * *c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32, max_degree: u32) -> Result<DiffPolynomial> {
        if e == 0 {
            let c = self.terms.values().next().ok_or_else(|| Error::Invariant("power of the zero polynomial".into()))?;
            return Ok(DiffPolynomial::constant(c.field().one()));
        }
        let mut acc = self.truncate(max_degree);
        for _ in 1..e {
            acc = acc.mul_truncated(self, max_degree);
        }
        Ok(acc)
    }

    /// Terms whose degree is at most `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> DiffPolynomial {
        self.filter(|m, _| m.degree() <= max_degree)
    }

    pub fn part_of_degree(&self, degree: u32) -> DiffPolynomial {
        self.filter(|m, _| m.degree() == degree)
    }

    pub fn filter(&self, keep: impl Fn(&DiffMonomial, &CoeffElement) -> bool) -> DiffPolynomial {
        DiffPolynomial { terms: self.terms.iter().filter(|(m, c)| keep(m, c)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    /// Total x-derivative (Leibniz rule).
    pub fn d_x(&self) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            for (f, p) in m.factors() {
                let rest = m.without_one(*f).unwrap();
                let nm = rest.times_factor(f.derivative(), 1);
                out.add_term(nm, c.scale_rational(&rat(*p as i64)));
            }
        }
        out
    }

    pub fn d_x_n(&self, n: u32) -> DiffPolynomial {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.d_x();
        }
        p
    }

    /// Partial derivative with respect to the jet variable `f`.
    pub fn partial(&self, f: Factor) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            let p = m.power_of(f);
            if p > 0 {
                out.add_term(m.without_one(f).unwrap(), c.scale_rational(&rat(p as i64)));
            }
        }
        out
    }

    /// All distinct factors, in canonical order.
    pub fn factors(&self) -> Vec<Factor> {
        let mut v: Vec<Factor> = self.terms.keys().flat_map(|m| m.factors().iter().map(|(f, _)| *f)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn symbols(&self) -> Vec<FieldSymbol> {
        let mut v: Vec<FieldSymbol> = self.factors().into_iter().map(|f| f.symbol).collect();
        v.dedup();
        v
    }

    /// Variational derivative `sum_l (-D)^l dP/du_l` for the field `u`.
    pub fn euler(&self, u: FieldSymbol) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for f in self.factors().into_iter().filter(|f| f.symbol == u) {
            let mut term = self.partial(f).d_x_n(f.order as u32);
            if f.order % 2 == 1 {
                term = term.neg();
            }
            out.add_assign(&term);
        }
        out
    }

    /// Whether the polynomial is `d_x` of a polynomial without constant term.
    pub fn is_total_derivative(&self) -> bool {
        !self.terms.contains_key(&DiffMonomial::one()) && self.symbols().into_iter().all(|u| self.euler(u).is_zero())
    }

    /// Unique antiderivative with zero constant term.
    pub fn integrate_x(&self) -> Result<DiffPolynomial> {
        if self.is_zero() {
            return Ok(DiffPolynomial::zero());
        }
        if !self.is_total_derivative() {
            return Err(Error::NonLocal(self.summary()));
        }
        let mut rest = self.clone();
        let mut acc = DiffPolynomial::zero();
        let budget = 64 * (self.len() + 8) * 16;
        for _ in 0..budget {
            if rest.is_zero() {
                return Ok(acc);
            }
            // highest jet variable by (order, symbol)
            let top = rest.factors().into_iter().max_by_key(|f| (f.order, f.symbol)).expect("nonzero polynomial has a factor");
            if top.order == 0 {
                return Err(Error::NonLocal(rest.summary()));
            }
            let (m, c) = rest.terms.iter().find(|(m, _)| m.power_of(top) > 0).map(|(m, c)| (m.clone(), c.clone())).unwrap();
            if m.power_of(top) > 1 {
                return Err(Error::NonLocal(rest.summary()));
            }
            let below = Factor { order: top.order - 1, ..top };
            let cofactor = m.without_one(top).unwrap();
            let k = cofactor.power_of(below);
            let candidate =
                DiffPolynomial::term(c.scale_rational(&BigRational::new(1.into(), (k as i64 + 1).into())), cofactor.times_factor(below, 1));
            rest = rest.sub(&candidate.d_x());
            acc.add_assign(&candidate);
        }
        Err(Error::Invariant(format!("integration did not terminate for {}", self.summary())))
    }

    /// Replace every factor for which `map` returns a value by `d_x^order` of that value.
    /// The map receives the factor; it is responsible for applying derivatives.
    pub fn substitute(&self, map: &dyn Fn(Factor) -> Option<DiffPolynomial>) -> DiffPolynomial {
        let mut cache: HashMap<Factor, Option<DiffPolynomial>> = HashMap::new();
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = DiffPolynomial::constant(c.clone());
            for (f, p) in m.factors() {
                let image = cache.entry(*f).or_insert_with(|| map(*f)).clone();
                match image {
                    Some(img) => {
                        for _ in 0..*p {
                            prod = prod.mul(&img);
                        }
                    }
                    None => {
                        prod = prod.map_monomials(|mm| mm.times_factor(*f, *p));
                    }
                }
            }
            out.add_assign(&prod);
        }
        out
    }

    fn map_monomials(&self, f: impl Fn(&DiffMonomial) -> DiffMonomial) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    /// Rename `D[l]{phi_j}` to `D[l-1]{varphi_j}`. Fails on bare or timed potentials.
    pub fn to_density(&self) -> Result<DiffPolynomial> {
        for f in self.factors() {
            if f.symbol.kind == FieldKind::Potential && (f.order == 0 || f.symbol.is_timed()) {
                return Err(Error::Invariant(format!("cannot rename {f} to a density field")));
            }
        }
        Ok(self.map_monomials(|m| {
            m.map_factors(|f| match f.symbol.kind {
                FieldKind::Potential => Factor::new(FieldSymbol::varphi(f.symbol.index), f.order - 1),
                _ => f,
            })
        }))
    }

    /// Fréchet derivative along `direction`, as a linear differential operator.
    pub fn frechet(&self, direction: FieldSymbol) -> LinearOperator {
        let mut op = LinearOperator::zero();
        for (m, c) in &self.terms {
            for (f, p) in m.factors() {
                if f.symbol != direction {
                    continue;
                }
                let rest = m.without_one(*f).unwrap();
                op.add(f.order, DiffPolynomial::term(c.scale_rational(&rat(*p as i64)), rest));
            }
        }
        op
    }

    /// Numeric value given values of the jet variables and of coefficients.
    pub fn eval_f64(&self, factor_value: &dyn Fn(Factor) -> f64, coeff_value: &dyn Fn(&CoeffElement) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = coeff_value(c);
                for (f, p) in m.factors() {
                    v *= factor_value(*f).powi(*p as i32);
                }
                v
            })
            .sum()
    }

    /// Canonical text: `coeff * monomial` terms joined by ` + `.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.terms.iter().map(|(m, c)| format!("[{}] * {}", c.to_text(), m)).collect::<Vec<_>>().join(" + ")
    }

    fn summary(&self) -> String {
        let t = self.terms.keys().map(|m| m.to_string()).collect::<Vec<_>>();
        if t.len() > 6 {
            format!("{} + ... ({} terms)", t[..6].join(" + "), t.len())
        } else {
            t.join(" + ")
        }
    }
}

impl fmt::Debug for DiffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `psi -> sum_k coeff_k * d_x^k psi`.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct LinearOperator {
    terms: BTreeMap<u8, DiffPolynomial>,
}

impl LinearOperator {
    pub fn zero() -> Self {
        LinearOperator { terms: BTreeMap::new() }
    }

    pub fn add(&mut self, order: u8, coeff: DiffPolynomial) {
        let entry = self.terms.entry(order).or_default();
        entry.add_assign(&coeff);
        if entry.is_zero() {
            self.terms.remove(&order);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &DiffPolynomial)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn coefficient(&self, order: u8) -> Option<&DiffPolynomial> {
        self.terms.get(&order)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, k: &CoeffElement) -> LinearOperator {
        let mut out = LinearOperator::zero();
        for (o, c) in &self.terms {
            out.add(*o, c.scale(k));
        }
        out
    }

    pub fn apply(&self, psi: &DiffPolynomial) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        let mut deriv = psi.clone();
        let max = self.terms.keys().copied().max().unwrap_or(0);
        for k in 0..=max {
            if let Some(c) = self.terms.get(&k) {
                out.add_assign(&c.mul(&deriv));
            }
            if k < max {
                deriv = deriv.d_x();
            }
        }
        out
    }

    /// Apply to a single field `symbol` (i.e. `psi = symbol`).
    pub fn apply_to_field(&self, symbol: FieldSymbol, coeff_one: &CoeffElement) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (k, c) in &self.terms {
            out.add_assign(&c.mul(&DiffPolynomial::atom(coeff_one.clone(), symbol, *k)));
        }
        out
    }
}
