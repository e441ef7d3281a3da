#![allow(dead_code)]

use std::sync::Arc;

use multiscale::coeff::{CoeffElement, CoeffField, FieldExt, ModelParams};
use multiscale::diffpoly::{DiffMonomial, DiffPolynomial, Factor, FieldSymbol};

pub mod displays;

pub fn field(s: u8) -> Arc<CoeffField> {
    CoeffField::new(ModelParams::new(s))
}

pub fn el(field: &Arc<CoeffField>, text: &str) -> CoeffElement {
    CoeffElement::parse(text, field).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Published closed forms of the order-five coefficients.
pub fn alpha1(f: &Arc<CoeffField>) -> CoeffElement {
    let s = f.s() as i64;
    el(f, &format!("(0) + (3 - {}*h^2)/24*c", 3 * s + 1))
}

pub fn alpha2(f: &Arc<CoeffField>) -> CoeffElement {
    &f.s_elem() * &f.h().pow(2) - &f.rational(3, 4)
}

/// Published closed forms of the order-seven coefficients, assembled from the
/// factored expressions with independent arithmetic.
pub fn alpha3(f: &Arc<CoeffField>) -> CoeffElement {
    let (h2, s) = (f.h().pow(2), f.s_elem());
    let inner = &(&f.int(16) * &(&h2 * &s)) - &(&f.int(5) * &(&f.one() + &(&f.int(3) * &s)));
    &(&(&h2 * &inner) + &f.int(7)) * &f.rational(1, 64)
}

pub fn alpha4(f: &Arc<CoeffField>) -> CoeffElement {
    let (h2, s) = (f.h().pow(2), f.s_elem());
    &(&(&f.c() * &h2) * &(&f.one() + &(&f.int(7) * &s))) * &f.rational(1, 12)
}

pub fn alpha5(f: &Arc<CoeffField>) -> CoeffElement {
    let (h2, s) = (f.h().pow(2), f.s_elem());
    let inner = &(&f.int(16) * &(&h2 * &s)) - &(&f.int(3) * &(&f.int(3) + &s));
    &(&(&h2 * &inner) - &f.int(3)) * &f.rational(1, 48)
}

pub fn alpha6(f: &Arc<CoeffField>) -> CoeffElement {
    let (h2, s) = (f.h().pow(2), f.s_elem());
    let h4 = h2.pow(2);
    let bracket = &(&(&h4 * &(&(&f.int(15) * &s) + &f.one())) + &(&f.int(30) * &(&h2 * &(&s - &f.one())))) - &f.int(15);
    -(&(&f.c() * &bracket) * &f.rational(1, 1920))
}

pub fn phi(j: u8, order: u8) -> Factor {
    Factor::new(FieldSymbol::phi(j), order)
}

pub fn varphi(j: u8, order: u8) -> Factor {
    Factor::new(FieldSymbol::varphi(j), order)
}

pub fn mono(fs: &[Factor]) -> DiffMonomial {
    DiffMonomial::from_factors(fs.iter().copied())
}

/// Sum of `coeff * monomial` terms.
pub fn poly(terms: &[(CoeffElement, &[Factor])]) -> DiffPolynomial {
    let mut p = DiffPolynomial::zero();
    for (c, fs) in terms {
        p.add_term(mono(fs), c.clone());
    }
    p
}

type Fraction = (i64, i64);

/// Output of `oracle/lattice_order7.py`: `(s, h, [alpha1, ..., alpha6])` at
/// points where `c` is rational (`c = 4/5, 3/5, 1, 1`).
pub const EXPANSION_POINTS: &[(u8, Fraction, [Fraction; 6])] = &[
    (1, (3, 5), [(13, 250), (-39, 100), (271, 40000), (24, 125), (-1093, 10000), (2693, 500000)]),
    (1, (4, 5), [(11, 1000), (-11, 100), (-1129, 40000), (32, 125), (-2579, 30000), (5279, 2000000)]),
    (0, (1, 2), [(11, 96), (-3, 4), (23, 256), (1, 48), (-7, 64), (359, 30720)]),
    (0, (3, 5), [(11, 100), (-3, 4), (13, 160), (3, 100), (-13, 100), (1337, 100000)]),
];

/// Largest gap between the engine's coefficients and [`EXPANSION_POINTS`].
pub fn expansion_gap(alphas: impl Fn(u8) -> Vec<CoeffElement>) -> f64 {
    let mut worst = 0.0f64;
    for &(s, (hn, hd), want) in EXPANSION_POINTS {
        let h = num_rational::BigRational::new(hn.into(), hd.into());
        for (a, (n, d)) in alphas(s).iter().zip(want) {
            let v = a.eval_numeric(&h, 1).unwrap().value;
            worst = worst.max((v - n as f64 / d as f64).abs());
        }
    }
    worst
}

/// `alpha3` for `s = 1` as produced by the independent expansion.
pub fn alpha3_expanded(f: &Arc<CoeffField>) -> CoeffElement {
    el(f, "(7 - 24*h^2 + 16*h^4)/64 + (0)*c")
}
