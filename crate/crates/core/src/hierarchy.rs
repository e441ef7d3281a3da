//! Potential KdV and KdV hierarchies generated by the recursion operator.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::coeff::{CoeffElement, FieldExt};
use crate::diffpoly::{DiffPolynomial, FieldSymbol, Grading, LinearOperator};
use crate::error::{Error, Result};

type FlowCache = BTreeMap<(Grading, u8, bool), Flow>;

/// Coefficients shared by all flows of one hierarchy.
#[derive(Clone, Debug)]
pub struct HierarchyContext {
    pub alpha1: CoeffElement,
    pub alpha2: CoeffElement,
    pub betas: BTreeMap<u8, CoeffElement>,
    pub variant: Grading,
    cache: Arc<Mutex<FlowCache>>,
}

/// One flow `K_j` or `H_j` with its Fréchet derivative along the leading field.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    pub variant: Grading,
    pub j: u8,
    pub polynomial: DiffPolynomial,
    pub linearization: LinearOperator,
}

impl Flow {
    fn new(variant: Grading, j: u8, polynomial: DiffPolynomial) -> Self {
        let linearization = polynomial.frechet(leading_field(variant));
        Flow { variant, j, polynomial, linearization }
    }

    pub fn label(&self) -> String {
        match self.variant {
            Grading::Potential => format!("K{}", self.j),
            Grading::Kdv => format!("H{}", self.j),
        }
    }

    /// `F'[u] psi` for an arbitrary polynomial `psi`.
    pub fn linearize(&self, psi: &DiffPolynomial) -> DiffPolynomial {
        self.linearization.apply(psi)
    }
}

pub fn leading_field(variant: Grading) -> FieldSymbol {
    FieldSymbol::new(variant.kind(), 1)
}

impl HierarchyContext {
    pub fn new(alpha1: CoeffElement, alpha2: CoeffElement, variant: Grading) -> Result<Self> {
        if alpha1.is_zero() {
            return Err(Error::Invariant("alpha1 must not vanish".into()));
        }
        Ok(HierarchyContext { alpha1, alpha2, betas: BTreeMap::new(), variant, cache: Default::default() })
    }

    pub fn with_beta(mut self, j: u8, beta: CoeffElement) -> Self {
        self.betas.insert(j, beta);
        self.cache = Default::default();
        self
    }

    pub fn with_variant(&self, variant: Grading) -> Self {
        HierarchyContext { variant, ..self.clone() }
    }

    fn one(&self) -> CoeffElement {
        self.alpha1.field().one()
    }

    fn k(&self) -> Result<CoeffElement> {
        let three_a1 = self.alpha1.scale_rational(&num_rational::BigRational::from_integer(3.into()));
        Ok(self.alpha2.checked_div(&three_a1)?)
    }

    /// `L[f] = d^2 f + 4k dphi f + 2k d^2phi int f` with `k = alpha2 / (3 alpha1)`.
    pub fn recursion_apply(&self, f: &DiffPolynomial) -> Result<DiffPolynomial> {
        let k = self.k()?;
        let phi = FieldSymbol::phi(1);
        let dphi = DiffPolynomial::atom(self.one(), phi, 1);
        let d2phi = DiffPolynomial::atom(self.one(), phi, 2);
        let integral = f.integrate_x()?;
        let four = crate::coeff::FieldExt::int(self.alpha1.field(), 4);
        let two = crate::coeff::FieldExt::int(self.alpha1.field(), 2);
        let mut out = f.d_x_n(2);
        out.add_assign(&dphi.mul(f).scale(&(&four * &k)));
        out.add_assign(&d2phi.mul(&integral).scale(&(&two * &k)));
        Ok(out)
    }

    /// `int L^(j-1)[d^2 phi]`, the flow with unit normalization.
    pub fn unit_potential_flow(&self, j: u8) -> Result<DiffPolynomial> {
        if !(2..=4).contains(&j) {
            return Err(Error::Unsupported(format!("hierarchy flow j = {j}")));
        }
        let mut f = DiffPolynomial::atom(self.one(), FieldSymbol::phi(1), 2);
        for _ in 1..j {
            f = self.recursion_apply(&f)?;
        }
        f.integrate_x()
    }

    fn beta(&self, j: u8) -> Result<CoeffElement> {
        if j == 2 {
            return Ok(self.alpha1.clone());
        }
        self.betas.get(&j).cloned().ok_or_else(|| Error::Invariant(format!("beta{j} is not set")))
    }

    /// `K_j` (potential variant) or `H_j = d_x K_j` renamed to densities (kdv variant).
    pub fn build_flow(&self, j: u8) -> Result<Flow> {
        self.cached(j, false, || Ok(self.unit_potential_flow(j)?.scale(&self.beta(j)?)))
    }

    /// The flow with `beta_j = 1`; used while `beta_j` is still being fixed.
    pub fn build_unit_flow(&self, j: u8) -> Result<Flow> {
        self.cached(j, true, || {
            let k = self.unit_potential_flow(j)?;
            Ok(if j == 2 { k.scale(&self.alpha1) } else { k })
        })
    }

    fn cached(&self, j: u8, unit: bool, build: impl FnOnce() -> Result<DiffPolynomial>) -> Result<Flow> {
        let key = (self.variant, j, unit);
        if let Some(f) = self.cache.lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let k = build()?;
        let poly = match self.variant {
            Grading::Potential => k,
            Grading::Kdv => k.d_x().to_density()?,
        };
        let flow = Flow::new(self.variant, j, poly);
        self.cache.lock().unwrap().entry(key).or_insert_with(|| flow.clone());
        Ok(flow)
    }
}

/// `f'[g] - g'[f]`; zero iff the flows commute.
pub fn commutator_check(f: &Flow, g: &Flow) -> DiffPolynomial {
    f.linearize(&g.polynomial).sub(&g.linearize(&f.polynomial))
}
