//! Graded differential polynomials in derivatives of indexed fields.

mod basis;
mod monomial;
mod polynomial;
mod symbol;

pub use basis::{enumerate_basis, GradedSpaceBasis};
pub use monomial::DiffMonomial;
pub use polynomial::{DiffPolynomial, LinearOperator};
pub use symbol::{Factor, FieldKind, FieldSymbol, Grading};
