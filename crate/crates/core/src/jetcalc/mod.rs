//! Truncated multivariate Taylor jets with an explicit derivative budget.

mod compose;
mod elementary;
mod jet;
mod layout;
mod multi_index;
mod operator;
mod scalar;
mod series;

pub use compose::{compose, compose_complex};
pub use jet::{CJet, Jet};
pub use layout::Layout;
pub use multi_index::{binomial, factorial, MultiIndex};
pub use operator::DiffOp;
pub use scalar::Scalar;
pub use series::HbarSeries;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("dimension mismatch: {0} vs {1} variables")]
    DimensionMismatch(usize, usize),
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("derivative budget exhausted")]
    BudgetExhausted,
    #[error("coefficient of degree {degree} requested beyond valid order {valid}")]
    BeyondValidOrder { degree: usize, valid: usize },
    #[error("inverse of a jet with zero constant term")]
    ZeroConstantTerm,
    #[error("function requires a positive argument, got {0}")]
    NonPositive(f64),
    #[error("expansion point mismatch in variable {var}: expected {expected}, found {found}")]
    ExpansionPointMismatch { var: usize, expected: f64, found: f64 },
    #[error("hbar truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
}
