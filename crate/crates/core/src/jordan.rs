//! Finite-difference dilation: Stirling numbers and Jordan's rescaling formula.
//!
//! Conventions: `stirling_first(i, k)` is signed, the coefficient of `x^k` in the
//! falling factorial `x (x-1) ... (x-i+1)`; `stirling_second(k, j)` counts
//! partitions of `k` elements into `j` blocks. With these,
//! `Δ_{n'}^j f = sum_{i>=j} (j!/i!) sum_{k=j}^{i} ω^k s(i,k) S(k,j) Δ_n^i f`
//! holds exactly, where one step of `n'` is `ω` steps of `n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

fn table(n: u32, first: bool) -> Vec<Vec<BigInt>> {
    let n = n as usize;
    let mut t = vec![vec![BigInt::zero(); n + 1]; n + 1];
    t[0][0] = BigInt::one();
    for m in 0..n {
        for k in 1..=m + 1 {
            let prev = t[m][k - 1].clone();
            let stay = &t[m][k] * BigInt::from(if first { m } else { k });
            t[m + 1][k] = if first { prev - stay } else { prev + stay };
        }
    }
    t
}

fn check(top: u32, bottom: u32) -> Result<()> {
    if bottom > top {
        return Err(Error::Index(format!("Stirling index ({top}, {bottom}) needs bottom <= top")));
    }
    Ok(())
}

/// Signed Stirling number of the first kind.
pub fn stirling_first(i: u32, k: u32) -> Result<BigInt> {
    check(i, k)?;
    Ok(table(i, true)[i as usize][k as usize].clone())
}

/// Stirling number of the second kind.
pub fn stirling_second(k: u32, j: u32) -> Result<BigInt> {
    check(k, j)?;
    Ok(table(k, false)[k as usize][j as usize].clone())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanExpansion {
    pub target_order: u32,
    #[serde(serialize_with = "ser_rational")]
    pub omega: BigRational,
    /// `i -> coefficient of Δ_n^i`.
    #[serde(serialize_with = "ser_map")]
    pub coefficients: BTreeMap<u32, BigRational>,
    /// Slow-varying order; `None` keeps every computed term.
    pub truncation_p: Option<u32>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_map<S: serde::Serializer>(m: &BTreeMap<u32, BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v.to_string())))
}

/// Coefficients of `Δ_n^i`, `j <= i <= min(max_i, p)`, in the expansion of `Δ_{n'}^j`.
pub fn jordan_coefficients(j: u32, omega: &BigRational, max_i: u32, p: Option<u32>) -> Result<JordanExpansion> {
    if j == 0 || max_i < j {
        return Err(Error::Index(format!("need 1 <= j <= max_i, got j = {j}, max_i = {max_i}")));
    }
    if !omega.is_positive() {
        return Err(Error::Unsupported(format!("increment ratio {omega} must be positive")));
    }
    let top = p.map_or(max_i, |p| p.min(max_i));
    let first = table(top, true);
    let second = table(top, false);
    let fact = |n: u32| (1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b));
    let mut coefficients = BTreeMap::new();
    for i in j..=top {
        let mut sum = BigRational::zero();
        let mut wk = (0..j).fold(BigRational::one(), |a, _| a * omega);
        for k in j..=i {
            let term = &first[i as usize][k as usize] * &second[k as usize][j as usize];
            sum += &wk * BigRational::from_integer(term);
            wk *= omega;
        }
        coefficients.insert(i, sum * BigRational::new(fact(j), fact(i)));
    }
    Ok(JordanExpansion { target_order: j, omega: omega.clone(), coefficients, truncation_p: p })
}

/// Samples `f(k / subdivisions)`, `k = 0, 1, ...`.
#[derive(Clone, Debug)]
pub struct Samples {
    pub values: Vec<BigRational>,
    pub subdivisions: u32,
}

impl Samples {
    pub fn integers(values: Vec<BigRational>) -> Self {
        Samples { values, subdivisions: 1 }
    }

    /// Samples of the polynomial `sum_d coeffs[d] n^d`.
    pub fn polynomial(coeffs: &[BigRational], len: usize, subdivisions: u32) -> Self {
        let q = BigRational::from_integer(subdivisions.into());
        let values = (0..len)
            .map(|k| {
                let n = BigRational::from_integer(k.into()) / &q;
                coeffs.iter().rev().fold(BigRational::zero(), |acc, a| acc * &n + a)
            })
            .collect();
        Samples { values, subdivisions }
    }
}

fn forward_difference(values: &[BigRational], start: usize, step: usize, order: u32) -> BigRational {
    let mut acc = BigRational::zero();
    for m in 0..=order {
        let c = BigRational::from_integer(binomial(BigInt::from(order), BigInt::from(m)));
        let v = &values[start + m as usize * step];
        if (order - m).is_multiple_of(2) {
            acc += c * v;
        } else {
            acc -= c * v;
        }
    }
    acc
}

/// Largest `|Δ_{n'}^j f - sum_i c_i Δ_n^i f|` over every base point the samples allow.
pub fn verify_on_sequence(exp: &JordanExpansion, samples: &Samples) -> Result<BigRational> {
    let q = samples.subdivisions as usize;
    let wq = &exp.omega * BigRational::from_integer(samples.subdivisions.into());
    if !wq.is_integer() {
        return Err(Error::Unsupported(format!("samples at spacing 1/{q} cannot resolve the increment {}", exp.omega)));
    }
    let wstep = wq.to_integer().to_usize().ok_or_else(|| Error::Unsupported("increment too large".into()))?;
    let max_i = exp.coefficients.keys().max().copied().unwrap_or(exp.target_order);
    let span = (exp.target_order as usize * wstep).max(max_i as usize * q);
    let needed = span + 1;
    if samples.values.len() < needed {
        return Err(Error::InsufficientSamples { needed, got: samples.values.len() });
    }
    let mut worst = BigRational::zero();
    for start in 0..samples.values.len() - span {
        let lhs = forward_difference(&samples.values, start, wstep, exp.target_order);
        let rhs =
            exp.coefficients.iter().fold(BigRational::zero(), |acc, (&i, c)| acc + c * forward_difference(&samples.values, start, q, i));
        let r = (lhs - rhs).abs();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Check `exp` on `n -> 1 + 2n + ... + (d+1) n^d`, sampled finely enough to resolve `omega`.
pub fn verify_polynomial(exp: &JordanExpansion, degree: u32) -> Result<BigRational> {
    let q = exp.omega.denom().to_u32().ok_or_else(|| Error::Unsupported("increment denominator too large".into()))?;
    let wstep = (&exp.omega * BigRational::from_integer(q.into())).to_integer().to_usize().unwrap_or(0);
    let max_i = exp.coefficients.keys().max().copied().unwrap_or(exp.target_order) as usize;
    let len = (exp.target_order as usize * wstep).max(max_i * q as usize) + 4;
    let coeffs: Vec<BigRational> = (1..=degree as i64 + 1).map(|k| BigRational::from_integer(k.into())).collect();
    verify_on_sequence(exp, &Samples::polynomial(&coeffs, len, q))
}
