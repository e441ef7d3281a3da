//! Multiscale reduction of the combined discrete NLS family and asymptotic
//! integrability tests.

pub mod coeff;
pub mod compat;
pub mod diffpoly;
pub mod error;
pub mod hierarchy;
pub mod jordan;
pub mod labels;
pub mod linsolve;
pub mod numeric;
pub mod poly;
pub mod ratfunc;
pub mod reduction;
pub mod report;
pub mod series;

pub use coeff::{CoeffElement, CoeffField, FieldExt, ModelParams};
pub use error::{CoeffError, Error, Result};
