//! Truncated ε-series of the amplitude-phase lattice system.
//!
//! A series is a [`DiffPolynomial`] whose monomial degree equals the power of ε.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coeff::{CoeffElement, CoeffField, FieldExt};
use crate::diffpoly::{DiffMonomial, DiffPolynomial, FieldSymbol};
use crate::error::{Error, Result};

/// Analytic primitives appearing in the lattice equations.
#[derive(Clone, Debug, PartialEq)]
pub enum Analytic {
    Sin,
    Cos,
    /// `x^r` about `x = 1`.
    Pow(BigRational),
}

impl Analytic {
    pub fn sqrt() -> Self {
        Analytic::Pow(BigRational::new(1.into(), 2.into()))
    }

    /// Taylor coefficients in `u`, where the argument is `u` (sin, cos) or `1 + u` (powers).
    fn taylor(&self, n: usize) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(n + 1);
        let mut fact = BigRational::one();
        for k in 0..=n {
            if k > 0 {
                fact *= BigRational::from_integer(BigInt::from(k));
            }
            let v = match self {
                Analytic::Sin => match k % 4 {
                    1 => fact.recip(),
                    3 => -fact.recip(),
                    _ => BigRational::zero(),
                },
                Analytic::Cos => match k % 4 {
                    0 => fact.recip(),
                    2 => -fact.recip(),
                    _ => BigRational::zero(),
                },
                Analytic::Pow(r) => {
                    let mut b = BigRational::one();
                    for i in 0..k {
                        b *= r - BigRational::from_integer(BigInt::from(i));
                    }
                    b / &fact
                }
            };
            out.push(v);
        }
        out
    }
}

/// `sum_i (direction * zeta)^i / i! d_x^i series`, truncated at degree `order`.
pub fn expand_shifts(series: &DiffPolynomial, direction: i8, zeta: &CoeffElement, order: u32) -> DiffPolynomial {
    let step = if direction < 0 { -zeta } else { zeta.clone() };
    let mut out = series.truncate(order);
    let mut term = series.truncate(order);
    let mut coeff = zeta.field().one();
    for i in 1..=order {
        term = term.d_x().truncate(order);
        if term.is_zero() {
            break;
        }
        coeff = (&coeff * &step).scale_rational(&BigRational::new(1.into(), BigInt::from(i)));
        out.add_assign(&term.scale(&coeff));
    }
    out
}

/// Taylor composition `node(argument)` truncated at degree `order`.
pub fn expand_analytic(node: &Analytic, argument: &DiffPolynomial, order: u32) -> Result<DiffPolynomial> {
    let field = argument.terms().next().map(|(_, c)| c.field().clone()).ok_or_else(|| Error::ExpansionPoint("empty argument".into()))?;
    let constant = argument.coefficient(&DiffMonomial::one()).cloned().unwrap_or_else(|| field.zero());
    let u = match node {
        Analytic::Sin | Analytic::Cos => {
            if !constant.is_zero() {
                return Err(Error::ExpansionPoint(format!("{node:?} argument has constant part {constant}")));
            }
            argument.clone()
        }
        Analytic::Pow(_) => {
            if !constant.is_one() {
                return Err(Error::ExpansionPoint(format!("{node:?} argument has constant part {constant}")));
            }
            argument.sub(&DiffPolynomial::constant(field.one()))
        }
    };
    let min = u.min_degree().unwrap_or(order + 1).max(1);
    let n = (order / min) as usize;
    let coeffs = node.taylor(n);
    let mut out = DiffPolynomial::zero();
    let mut power = DiffPolynomial::constant(field.one());
    for (k, a) in coeffs.iter().enumerate() {
        if k > 0 {
            power = power.mul_truncated(&u, order);
            if power.is_zero() {
                break;
            }
        }
        if !a.is_zero() {
            out.add_assign(&power.scale_rational(a));
        }
    }
    Ok(out)
}

/// Formal fields and ε-series of the lattice, built over a field without a `c` part.
pub struct LatticeSeries {
    pub order: u32,
    /// Residual of the amplitude equation; odd degrees only.
    pub amplitude: DiffPolynomial,
    /// Residual of the phase equation; even degrees only.
    pub phase: DiffPolynomial,
}

fn tagged_time_derivative(symbol: FieldSymbol, order: u32, one: &CoeffElement) -> DiffPolynomial {
    let mut out = DiffPolynomial::zero();
    let mut m = 1u8;
    loop {
        let s = symbol.at_time(m);
        if s.base_weight() > order {
            break;
        }
        out.add_assign(&DiffPolynomial::atom(one.clone(), s, 0));
        m += 1;
    }
    out
}

/// Expand both lattice equations to degree `order` with lattice step `zeta`.
///
/// Writing `nu_n = 1 + N`, `phi_n = -sigma t + P`,
/// amplitude: `dN/dt - (s sigma nu - 1/h^2) sum_± sqrt(nu nu_±) sin(P_± - P)`,
/// phase: `dP/dt - sigma + 1/h^2 - (s-1) sigma nu - (1/h^2 - s sigma nu)/2 sum_± sqrt(nu_±/nu) cos(P_± - P)`.
pub fn lattice_series(field: &Arc<CoeffField>, zeta: &CoeffElement, order: u32) -> Result<LatticeSeries> {
    let one = field.one();
    let top = (order / 2 + 1) as u8;
    let mut p = DiffPolynomial::zero();
    let mut n = DiffPolynomial::zero();
    let mut dp = DiffPolynomial::zero();
    let mut dn = DiffPolynomial::zero();
    for j in 1..=top {
        let phi = FieldSymbol::phi(j);
        let nu = FieldSymbol::nu(j);
        if phi.base_weight() <= order {
            p.add_assign(&DiffPolynomial::atom(one.clone(), phi, 0));
            dp.add_assign(&tagged_time_derivative(phi, order, &one));
        }
        if nu.base_weight() <= order {
            n.add_assign(&DiffPolynomial::atom(one.clone(), nu, 0));
            dn.add_assign(&tagged_time_derivative(nu, order, &one));
        }
    }
    let sigma = field.sigma_elem();
    let s = field.s_elem();
    let inv_h2 = field.h().pow(2).inv()?;
    let nu_full = DiffPolynomial::constant(one.clone()).add(&n);
    let s_sigma = &s * &sigma;

    let sqrt_nu = expand_analytic(&Analytic::sqrt(), &nu_full, order)?;
    let inv_sqrt_nu = expand_analytic(&Analytic::Pow(BigRational::new((-1).into(), 2.into())), &nu_full, order)?;
    let mut sin_sum = DiffPolynomial::zero();
    let mut cos_sum = DiffPolynomial::zero();
    for dir in [1i8, -1] {
        let dphase = expand_shifts(&p, dir, zeta, order).sub(&p);
        let nu_shift = DiffPolynomial::constant(one.clone()).add(&expand_shifts(&n, dir, zeta, order));
        let sqrt_shift = expand_analytic(&Analytic::sqrt(), &nu_shift, order)?;
        let sin = expand_analytic(&Analytic::Sin, &dphase, order)?;
        let cos = expand_analytic(&Analytic::Cos, &dphase, order)?;
        sin_sum.add_assign(&sqrt_nu.mul_truncated(&sqrt_shift, order).mul_truncated(&sin, order));
        cos_sum.add_assign(&sqrt_shift.mul_truncated(&inv_sqrt_nu, order).mul_truncated(&cos, order));
    }

    let amp_factor = nu_full.scale(&s_sigma).sub(&DiffPolynomial::constant(inv_h2.clone()));
    let amplitude = dn.sub(&amp_factor.mul_truncated(&sin_sum, order));

    let half = field.rational(1, 2);
    let phase_factor = DiffPolynomial::constant(inv_h2.clone()).sub(&nu_full.scale(&s_sigma)).scale(&half);
    let mut phase = dp;
    phase.add_assign(&DiffPolynomial::constant(&inv_h2 - &sigma));
    phase = phase.sub(&nu_full.scale(&(&(&s - &one) * &sigma)));
    phase = phase.sub(&phase_factor.mul_truncated(&cos_sum, order));

    for (name, poly, parity) in [("amplitude", &amplitude, 1u32), ("phase", &phase, 0)] {
        if let Some(m) = poly.monomials().find(|m| m.degree() % 2 != parity) {
            return Err(Error::Invariant(format!("{name} residual has a term of degree {}: {m}", m.degree())));
        }
    }
    if !phase.part_of_degree(0).is_zero() {
        return Err(Error::Invariant("the -sigma t baseline does not cancel".into()));
    }
    Ok(LatticeSeries { order, amplitude, phase })
}
