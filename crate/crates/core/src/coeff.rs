//! The scalar field `Q(h)[c]` with `c^2 = zeta^2 (sigma - s h^2) / h^2`, `zeta = h`.
//!
//! An element is stored as `even + odd * c` with both parts in [`RatFunc`]
//! (lowest terms, monic denominator). Every element carries a handle to its
//! [`CoeffField`], which fixes the model selector `s`, the sign `sigma` and the
//! relation used to reduce `c^2`. A field may also be *specialized* at a
//! rational value of `h`, in which case all parts are constants.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::CoeffError;
use crate::poly::{rational_to_f64, Poly};
use crate::ratfunc::{matching_paren, RatFunc};

/// Model parameters of the combined lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    /// `+1` (repulsive) or `-1`.
    pub sigma: i8,
    /// `0`: standard discrete NLS, `1`: Ablowitz-Ladik.
    pub s: u8,
    /// Sign of the characteristic speed, `x = kappa - c_sign * c * t_1`.
    pub c_sign: i8,
}

impl ModelParams {
    pub fn new(s: u8) -> Self {
        ModelParams { sigma: 1, s, c_sign: 1 }
    }

    pub fn with_c_sign(mut self, c_sign: i8) -> Self {
        self.c_sign = c_sign;
        self
    }

    pub fn with_sigma(mut self, sigma: i8) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), CoeffError> {
        if self.s > 1 {
            return Err(CoeffError::Params(format!("s must be 0 or 1, got {}", self.s)));
        }
        if self.sigma != 1 && self.sigma != -1 {
            return Err(CoeffError::Params(format!("sigma must be +1 or -1, got {}", self.sigma)));
        }
        if self.c_sign != 1 && self.c_sign != -1 {
            return Err(CoeffError::Params(format!("c_sign must be +1 or -1, got {}", self.c_sign)));
        }
        Ok(())
    }
}

/// Context shared by all elements of one computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffField {
    params: ModelParams,
    c_squared: RatFunc,
    h_value: Option<BigRational>,
}

impl CoeffField {
    /// Generic field with `c^2 = 1 - s h^2` (`sigma = 1`, `zeta = h`).
    pub fn new(params: ModelParams) -> Arc<Self> {
        let c2 = RatFunc::from_poly(Poly::from_i64s(&[params.sigma as i64, 0, -(params.s as i64)]));
        Self::with_relation(params, c2, None)
    }

    /// Field with an explicit relation for `c^2` and optional specialization of `h`.
    pub fn with_relation(params: ModelParams, c_squared: RatFunc, h_value: Option<BigRational>) -> Arc<Self> {
        let c_squared = match &h_value {
            Some(h) => RatFunc::from_rational(c_squared.eval(h).expect("c^2 has a pole at the specialization point")),
            None => c_squared,
        };
        Arc::new(CoeffField { params, c_squared, h_value })
    }

    /// The same field with `h` fixed to a rational value.
    pub fn specialized(params: ModelParams, h: BigRational) -> Arc<Self> {
        let generic = Self::new(params);
        Self::with_relation(params, generic.c_squared.clone(), Some(h))
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn s(&self) -> u8 {
        self.params.s
    }

    pub fn sigma(&self) -> i8 {
        self.params.sigma
    }

    pub fn h_value(&self) -> Option<&BigRational> {
        self.h_value.as_ref()
    }

    pub fn c_squared_ratfunc(&self) -> &RatFunc {
        &self.c_squared
    }

    /// Map a rational function of `h` into this field (evaluating if specialized).
    pub fn lift(&self, r: &RatFunc) -> RatFunc {
        match &self.h_value {
            Some(h) => RatFunc::from_rational(r.eval(h).expect("pole at the specialization point")),
            None => r.clone(),
        }
    }
}

/// `even + odd * c`.
#[derive(Clone)]
pub struct CoeffElement {
    even: RatFunc,
    odd: RatFunc,
    field: Arc<CoeffField>,
}

pub trait FieldExt {
    fn zero(&self) -> CoeffElement;
    fn one(&self) -> CoeffElement;
    fn int(&self, v: i64) -> CoeffElement;
    fn rational(&self, n: i64, d: i64) -> CoeffElement;
    fn h(&self) -> CoeffElement;
    fn c(&self) -> CoeffElement;
    fn element(&self, even: RatFunc, odd: RatFunc) -> CoeffElement;
    fn sigma_elem(&self) -> CoeffElement;
    fn s_elem(&self) -> CoeffElement;
}

impl FieldExt for Arc<CoeffField> {
    fn zero(&self) -> CoeffElement {
        self.element(RatFunc::zero(), RatFunc::zero())
    }

    fn one(&self) -> CoeffElement {
        self.int(1)
    }

    fn int(&self, v: i64) -> CoeffElement {
        self.element(RatFunc::from_int(v), RatFunc::zero())
    }

    fn rational(&self, n: i64, d: i64) -> CoeffElement {
        self.element(RatFunc::from_rational(BigRational::new(n.into(), d.into())), RatFunc::zero())
    }

    fn h(&self) -> CoeffElement {
        self.element(RatFunc::h(), RatFunc::zero())
    }

    fn c(&self) -> CoeffElement {
        self.element(RatFunc::zero(), RatFunc::one())
    }

    fn element(&self, even: RatFunc, odd: RatFunc) -> CoeffElement {
        CoeffElement { even: self.lift(&even), odd: self.lift(&odd), field: self.clone() }
    }

    fn sigma_elem(&self) -> CoeffElement {
        self.int(self.params.sigma as i64)
    }

    fn s_elem(&self) -> CoeffElement {
        self.int(self.params.s as i64)
    }
}

/// Numeric value of a coefficient at a point `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericValue {
    pub even: BigRational,
    pub odd: BigRational,
    /// The branch value of `c` used.
    pub c: f64,
    pub value: f64,
}

impl CoeffElement {
    pub fn field(&self) -> &Arc<CoeffField> {
        &self.field
    }

    pub fn even(&self) -> &RatFunc {
        &self.even
    }

    pub fn odd(&self) -> &RatFunc {
        &self.odd
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.even.is_one() && self.odd.is_zero()
    }

    /// Rational constant, if the element is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.odd.is_zero() {
            self.even.as_constant()
        } else {
            None
        }
    }

    /// Move into another context sharing the same relation or having no `c` part.
    pub fn transport(&self, field: &Arc<CoeffField>) -> CoeffElement {
        field.element(self.even.clone(), self.odd.clone())
    }

    fn same_field(&self, other: &Self) {
        debug_assert!(Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field, "mixing coefficients from different fields");
    }

    fn build(&self, even: RatFunc, odd: RatFunc) -> CoeffElement {
        CoeffElement { even, odd, field: self.field.clone() }
    }

    pub fn scale_rational(&self, r: &BigRational) -> CoeffElement {
        self.build(self.even.scale(r), self.odd.scale(r))
    }

    /// `a - b c`.
    pub fn conjugate(&self) -> CoeffElement {
        self.build(self.even.clone(), self.odd.neg())
    }

    /// `(a + bc)(a - bc) = a^2 - b^2 c^2`, an element of `Q(h)`.
    pub fn norm(&self) -> RatFunc {
        let a2 = self.even.mul(&self.even);
        let b2 = self.odd.mul(&self.odd).mul(&self.field.c_squared);
        a2.sub(&b2)
    }

    pub fn inv(&self) -> Result<CoeffElement, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::ZeroInverse);
        }
        if self.odd.is_zero() {
            return Ok(self.build(self.even.inv().unwrap(), RatFunc::zero()));
        }
        if self.even.is_zero() {
            // (b c)^-1 = c / (b c^2)
            let d = self.odd.mul(&self.field.c_squared);
            let d = d.inv().ok_or_else(|| CoeffError::NotInvertible(self.to_text()))?;
            return Ok(self.build(RatFunc::zero(), d));
        }
        let n = self.norm();
        let ninv = n.inv().ok_or_else(|| CoeffError::NotInvertible(self.to_text()))?;
        Ok(self.build(self.even.mul(&ninv), self.odd.neg().mul(&ninv)))
    }

    pub fn is_invertible(&self) -> bool {
        !self.is_zero() && !self.norm().is_zero()
    }

    pub fn checked_div(&self, other: &CoeffElement) -> Result<CoeffElement, CoeffError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> CoeffElement {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Size heuristic, used to pick small pivots.
    pub fn size(&self) -> usize {
        self.even.size() + self.odd.size()
    }

    /// Substitute `h = h_value` and `c = c_branch * sqrt(c^2(h))`.
    pub fn eval_numeric(&self, h_value: &BigRational, c_branch: i8) -> Result<NumericValue, CoeffError> {
        if !(h_value.is_positive() && *h_value < BigRational::one()) {
            return Err(CoeffError::Domain(format!("h = {h_value} is outside (0, 1)")));
        }
        let lift = |r: &RatFunc| -> Result<BigRational, CoeffError> {
            match self.field.h_value() {
                Some(_) => Ok(r.as_constant().expect("specialized parts are constant")),
                None => r.eval(h_value).ok_or_else(|| CoeffError::Domain(format!("pole at h = {h_value}"))),
            }
        };
        let even = lift(&self.even)?;
        let odd = lift(&self.odd)?;
        let c2 = rational_to_f64(&lift(&self.field.c_squared)?);
        if c2 < 0.0 {
            return Err(CoeffError::Domain(format!("c^2 = {c2} < 0 at h = {h_value}")));
        }
        let c = c_branch.signum() as f64 * c2.sqrt();
        let value = rational_to_f64(&even) + rational_to_f64(&odd) * c;
        Ok(NumericValue { even, odd, c, value })
    }

    /// Floating-point value at `h` (generic fields) with the `+` branch unless `c_branch < 0`.
    pub fn to_f64(&self, h: f64, c_branch: i8) -> f64 {
        let (e, o, c2) = match self.field.h_value() {
            Some(_) => (
                rational_to_f64(&self.even.as_constant().unwrap()),
                rational_to_f64(&self.odd.as_constant().unwrap()),
                rational_to_f64(&self.field.c_squared.as_constant().unwrap()),
            ),
            None => (self.even.eval_f64(h), self.odd.eval_f64(h), self.field.c_squared.eval_f64(h)),
        };
        e + o * c_branch.signum() as f64 * c2.sqrt()
    }

    /// Specialize a generic element at a rational `h` into `target`.
    pub fn specialize(&self, target: &Arc<CoeffField>) -> Result<CoeffElement, CoeffError> {
        let h = target.h_value().ok_or_else(|| CoeffError::Params("target field is not specialized".into()))?;
        let ev = |r: &RatFunc| r.eval(h).ok_or_else(|| CoeffError::Domain(format!("pole at h = {h}")));
        Ok(target.element(RatFunc::from_rational(ev(&self.even)?), RatFunc::from_rational(ev(&self.odd)?)))
    }

    /// Canonical text `(even) + (odd)*c`.
    pub fn to_text(&self) -> String {
        format!("{} + {}*c", self.even.to_text(), self.odd.to_text())
    }

    /// Parse the canonical text form into `field`.
    pub fn parse(text: &str, field: &Arc<CoeffField>) -> Result<CoeffElement, CoeffError> {
        let err = || CoeffError::Parse(text.to_string());
        let t = text.trim();
        let body = t.strip_suffix("*c").ok_or_else(err)?;
        // split at the top-level " + (" that starts the odd part
        let mut depth = 0i32;
        let mut split = None;
        let bytes = body.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' if depth == 0 && i > 0 => split = Some(i),
                _ => {}
            }
        }
        let i = split.ok_or_else(err)?;
        let even = RatFunc::parse(&body[..i]).ok_or_else(err)?;
        let odd_text = body[i + 1..].trim();
        if !odd_text.starts_with('(') || matching_paren(&odd_text[1..]).is_none() {
            return Err(err());
        }
        let odd = RatFunc::parse(odd_text).ok_or_else(err)?;
        Ok(field.element(even, odd))
    }
}

impl PartialEq for CoeffElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other);
        self.even == other.even && self.odd == other.odd
    }
}

impl Eq for CoeffElement {}

impl fmt::Debug for CoeffElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for CoeffElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<'a> Add<&'a CoeffElement> for &'a CoeffElement {
    type Output = CoeffElement;
    fn add(self, rhs: &'a CoeffElement) -> CoeffElement {
        self.same_field(rhs);
        self.build(self.even.add(&rhs.even), self.odd.add(&rhs.odd))
    }
}

impl<'a> Sub<&'a CoeffElement> for &'a CoeffElement {
    type Output = CoeffElement;
    fn sub(self, rhs: &'a CoeffElement) -> CoeffElement {
        self.same_field(rhs);
        self.build(self.even.sub(&rhs.even), self.odd.sub(&rhs.odd))
    }
}

impl<'a> Mul<&'a CoeffElement> for &'a CoeffElement {
    type Output = CoeffElement;
    fn mul(self, rhs: &'a CoeffElement) -> CoeffElement {
        self.same_field(rhs);
        let (a, b, d, e) = (&self.even, &self.odd, &rhs.even, &rhs.odd);
        let even = if b.is_zero() || e.is_zero() { a.mul(d) } else { a.mul(d).add(&b.mul(e).mul(&self.field.c_squared)) };
        let odd = a.mul(e).add(&b.mul(d));
        self.build(even, odd)
    }
}

impl Neg for &CoeffElement {
    type Output = CoeffElement;
    fn neg(self) -> CoeffElement {
        self.build(self.even.neg(), self.odd.neg())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CoeffElement> for CoeffElement {
            type Output = CoeffElement;
            fn $m(self, rhs: CoeffElement) -> CoeffElement {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a CoeffElement> for CoeffElement {
            type Output = CoeffElement;
            fn $m(self, rhs: &'a CoeffElement) -> CoeffElement {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CoeffElement {
    type Output = CoeffElement;
    fn neg(self) -> CoeffElement {
        -(&self)
    }
}
