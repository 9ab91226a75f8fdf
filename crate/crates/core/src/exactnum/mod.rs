//! Exact arithmetic: the real quadratic field `ℚ(√D)`, the symbolic scalar
//! ring used as group-ring coefficients, and rational functions in one
//! variable over `ℚ(√D)`.

mod quad;
mod ratfunc;
mod scalar;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use quad::{QuadElem, DEFAULT_D};
pub use ratfunc::{Poly, RatFunc};
pub use scalar::{Monomial, ScalarPoly};

pub(crate) use quad::rat_to_rug;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mixed quadratic fields: sqrt({0}) and sqrt({1})")]
    FieldMismatch(u32, u32),
    #[error("radicand {0} is not a squarefree integer greater than 1")]
    BadRadicand(u32),
    #[error("symbol exponent exceeds 16 bits")]
    ExponentOverflow,
    #[error("evaluation at a pole (z = {0})")]
    Pole(String),
}
