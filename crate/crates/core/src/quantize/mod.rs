//! Operators on configuration space: covariant momenta, Weyl and S-ordering,
//! closed-form hermitian operators and formal adjoints.

mod closed;
mod operator;
mod ordering;
mod symbol;

pub use closed::{closed_form, op_cubic, op_cubic_with, op_linear, op_quadratic};
pub use operator::{formal_adjoint, multi_index_key, CoefficientDefect, ConfigOp, DiffOperator};
pub use ordering::{momentum_operator, quantization_morphism, s_order, weyl_monomial, weyl_order, weyl_order_psymbol};
pub use symbol::{MomentumSymbol, PSymbol};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::jetcalc::JetError;
use crate::morphism::MorphismError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error("momentum degree {0} not supported (degree <= 3 supported)")]
    UnsupportedDegree(usize),
    #[error("symbol mixes momentum degrees {0:?}; give one homogeneous degree plus an optional potential")]
    MixedDegree(Vec<usize>),
    #[error("closed form expects a degree-{expected} symbol, got degree {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

#[cfg(test)]
mod tests;
