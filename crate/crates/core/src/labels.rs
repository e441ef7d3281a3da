//! Conventional names for the coefficients of the forcing polynomials.

use crate::diffpoly::{enumerate_basis, DiffMonomial, Factor, FieldSymbol, Grading};

/// A coefficient name attached to a basis monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeled {
    pub name: String,
    pub monomial: DiffMonomial,
}

fn p(j: u8, l: u8) -> Factor {
    Factor::new(FieldSymbol::phi(j), l)
}

fn v(j: u8, l: u8) -> Factor {
    Factor::new(FieldSymbol::varphi(j), l)
}

fn build(prefix: &str, terms: &[&[Factor]]) -> Vec<Labeled> {
    terms
        .iter()
        .enumerate()
        .map(|(i, fs)| Labeled { name: format!("{prefix}{}", i + 1), monomial: DiffMonomial::from_factors(fs.iter().copied()) })
        .collect()
}

/// `f^(t2)` in `P_6^(1)`.
pub fn a_terms() -> Vec<Labeled> {
    build("a", &[&[p(1, 1), p(1, 1), p(1, 1)], &[p(1, 1), p(1, 3)], &[p(1, 2), p(1, 2)]])
}

/// `f^(t3)` in `P_8^(1)`.
pub fn b_terms() -> Vec<Labeled> {
    build(
        "b",
        &[
            &[p(1, 1), p(1, 2), p(1, 2)],
            &[p(1, 1), p(1, 5)],
            &[p(1, 2), p(1, 4)],
            &[p(1, 1), p(1, 1), p(1, 1), p(1, 1)],
            &[p(1, 1), p(1, 1), p(1, 3)],
            &[p(1, 3), p(1, 3)],
        ],
    )
}

/// `h^(t2)` in `P_8^(2)`.
pub fn c_terms() -> Vec<Labeled> {
    build(
        "c",
        &[
            &[p(1, 3), p(1, 3)],
            &[p(1, 2), p(1, 4)],
            &[p(1, 1), p(1, 5)],
            &[p(1, 1), p(1, 2), p(1, 2)],
            &[p(1, 1), p(1, 1), p(1, 3)],
            &[p(1, 1), p(1, 1), p(1, 1), p(1, 1)],
            &[p(1, 1), p(2, 3)],
            &[p(1, 2), p(2, 2)],
            &[p(1, 3), p(2, 1)],
            &[p(1, 1), p(1, 1), p(2, 1)],
            &[p(2, 1), p(2, 1)],
        ],
    )
}

/// `g^(t2)` in `P_9^(2)` (density fields).
pub fn d_terms() -> Vec<Labeled> {
    build(
        "d",
        &[
            &[v(1, 2), v(1, 3)],
            &[v(1, 1), v(1, 4)],
            &[v(1, 0), v(1, 5)],
            &[v(1, 1), v(1, 1), v(1, 1)],
            &[v(1, 0), v(1, 1), v(1, 2)],
            &[v(1, 0), v(1, 0), v(1, 3)],
            &[v(1, 0), v(1, 0), v(1, 0), v(1, 1)],
            &[v(1, 0), v(2, 3)],
            &[v(1, 1), v(2, 2)],
            &[v(1, 2), v(2, 1)],
            &[v(2, 0), v(1, 3)],
            &[v(1, 0), v(1, 0), v(2, 1)],
            &[v(1, 0), v(2, 0), v(1, 1)],
            &[v(2, 0), v(2, 1)],
        ],
    )
}

/// Unknown ansatz coefficients named `prefix1..` in basis order.
pub fn generic_terms(prefix: &str, degree: u32, r: u8, grading: Grading) -> Vec<Labeled> {
    enumerate_basis(degree, r, grading)
        .basis
        .into_iter()
        .enumerate()
        .map(|(i, m)| Labeled { name: format!("{prefix}{}", i + 1), monomial: m })
        .collect()
}
