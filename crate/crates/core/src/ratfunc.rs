//! Rational functions of `h` in lowest terms.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;

/// `num / den` with `gcd(num, den) = 1` and `den` monic. Zero is `0 / 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn from_rational(r: BigRational) -> Self {
        RatFunc::from_poly(Poly::constant(r))
    }

    pub fn from_int(v: i64) -> Self {
        RatFunc::from_poly(Poly::from_int(v))
    }

    /// `h`.
    pub fn h() -> Self {
        RatFunc::from_poly(Poly::from_i64s(&[0, 1]))
    }

    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::normalize(num, den)
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if den.is_constant() {
            let d = den.leading().unwrap().clone();
            return if d.is_one() { RatFunc { num, den } } else { RatFunc { num: num.scale(&d.recip()), den: Poly::one() } };
        }
        if den.is_monomial() {
            let k = den.valuation().unwrap();
            let v = num.valuation().unwrap();
            let cancel = k.min(v);
            let lead = den.leading().unwrap().recip();
            let num = num.shift_down(cancel).scale(&lead);
            let den = if cancel == k { Poly::one() } else { Poly::monomial(BigRational::one(), k - cancel) };
            return RatFunc { num, den };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_exact(&g), den.div_exact(&g)) };
        let lead = den.leading().unwrap().clone();
        if lead.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lead.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        (self.den.is_one() && self.num.is_constant()).then(|| self.num.constant_term())
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            if self.den.is_one() {
                return RatFunc { num: self.num.add(&other.num), den: Poly::one() };
            }
            return Self::normalize(self.num.add(&other.num), self.den.clone());
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::normalize(num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFunc { num: self.num.mul(&other.num), den: Poly::one() };
        }
        Self::normalize(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(r), den: self.den.clone() }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    /// Value at a rational point; `None` when the denominator vanishes there.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn size(&self) -> usize {
        self.num.size() + self.den.size()
    }

    /// Integer-coefficient representative `(n, d)` with `n/d = self`,
    /// `d` having positive leading coefficient and `gcd(content(n), content(d)) = 1`.
    pub fn integral_parts(&self) -> (Poly, Poly) {
        let l = self.num.denominator_lcm().lcm(&self.den.denominator_lcm());
        let scale = BigRational::from_integer(l);
        let n = self.num.scale(&scale);
        let d = self.den.scale(&scale);
        let g = n.numerator_gcd().gcd(&d.numerator_gcd());
        let mut g = if g.is_zero() { BigInt::one() } else { g };
        if d.leading().is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        let gi = BigRational::from_integer(g).recip();
        (n.scale(&gi), d.scale(&gi))
    }

    /// Canonical text: `(num)`, `(num)/den` for an integer denominator, `(num)/(den)` otherwise.
    pub fn to_text(&self) -> String {
        let (n, d) = self.integral_parts();
        if d.is_one() {
            format!("({})", n.fmt_integral())
        } else if d.is_constant() {
            format!("({})/{}", n.fmt_integral(), d.fmt_integral())
        } else {
            format!("({})/({})", n.fmt_integral(), d.fmt_integral())
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        let t = t.strip_prefix('(')?;
        let close = matching_paren(t)?;
        let num = Poly::parse(&t[..close])?;
        let rest = t[close + 1..].trim();
        if rest.is_empty() {
            return Some(RatFunc::from_poly(num));
        }
        let rest = rest.strip_prefix('/')?.trim();
        let den = if let Some(inner) = rest.strip_prefix('(') {
            let close = matching_paren(inner)?;
            if !inner[close + 1..].trim().is_empty() {
                return None;
            }
            Poly::parse(&inner[..close])?
        } else {
            Poly::parse(rest)?
        };
        if den.is_zero() {
            return None;
        }
        Some(RatFunc::new(num, den))
    }
}

/// Index of the `)` closing an already-consumed `(`.
pub(crate) fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 1usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
