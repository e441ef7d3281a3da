use serde::Serialize;

use super::monomial::DiffMonomial;
use super::symbol::{Factor, FieldSymbol, Grading};

/// Monomials of a fixed degree spanning `P_n^(r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedSpaceBasis {
    pub degree: u32,
    pub max_field_index: u8,
    pub grading: Grading,
    #[serde(serialize_with = "serialize_monomials")]
    pub basis: Vec<DiffMonomial>,
}

fn serialize_monomials<S: serde::Serializer>(b: &[DiffMonomial], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(b.iter().map(|m| m.to_string()))
}

impl GradedSpaceBasis {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, m: &DiffMonomial) -> bool {
        self.basis.binary_search(m).is_ok()
    }

    pub fn position(&self, m: &DiffMonomial) -> Option<usize> {
        self.basis.binary_search(m).ok()
    }
}

/// All monomials of degree `n` with at least two factors drawn from fields of
/// index `<= r`, sorted in the canonical monomial order.
pub fn enumerate_basis(n: u32, r: u8, grading: Grading) -> GradedSpaceBasis {
    let mut atoms: Vec<Factor> = Vec::new();
    for j in 1..=r {
        let sym = FieldSymbol::new(grading.kind(), j);
        let mut order = grading.min_order();
        while Factor::new(sym, order).weight() <= n {
            atoms.push(Factor::new(sym, order));
            order += 1;
        }
    }
    atoms.sort();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    collect(&atoms, 0, n, &mut stack, &mut out);
    out.sort();
    GradedSpaceBasis { degree: n, max_field_index: r, grading, basis: out }
}

fn collect(atoms: &[Factor], start: usize, remaining: u32, stack: &mut Vec<Factor>, out: &mut Vec<DiffMonomial>) {
    if remaining == 0 {
        if stack.len() >= 2 {
            out.push(DiffMonomial::from_factors(stack.iter().copied()));
        }
        return;
    }
    for i in start..atoms.len() {
        let w = atoms[i].weight();
        if w <= remaining {
            stack.push(atoms[i]);
            collect(atoms, i, remaining - w, stack, out);
            stack.pop();
        }
    }
}
