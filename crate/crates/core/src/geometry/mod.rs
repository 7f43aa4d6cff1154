//! Metrics, Levi-Civita connections, curvature, and the lifted symplectic
//! connection on phase space.

mod connection;
mod lift;
mod metric;
mod model;
mod phase;
mod tensor;
mod transform;

pub use connection::{
    christoffel, riemann, ricci, Connection, ConnectionField, CurvatureSign, Riemann,
    RicciContraction, CONVENTION,
};
pub use lift::{
    adopted_frame, frame_to_adopted, lift_flat, lift_general, AdoptedFrame, Frame, LiftedConnection,
    FLATNESS_TOLERANCE,
};
pub use metric::{jet_matrix_inverse, metric_jets, MetricJets};
pub use model::{catalog, catalog_names, MetricModel, ModelSpec};
pub use phase::{omega_lower, omega_upper, phase_variable_names, poisson_bracket, PhasePoint, VectorField};
pub use tensor::{covariant_derivative, IndexKind, TensorJet};
pub use transform::{point_transform, PhaseMap, PointTransformation};

use thiserror::Error;

use crate::exprlang::ExprError;
use crate::jetcalc::JetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("expression error in {context}: {source}")]
    Expr {
        context: String,
        #[source]
        source: ExprError,
    },
    #[error("singular metric at the evaluation point (det = {0:e})")]
    SingularMetric(f64),
    #[error("singular Jacobian at the evaluation point (det = {0:e})")]
    SingularJacobian(f64),
    #[error("base connection is not flat (max |R| = {0:e})")]
    NonFlat(f64),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("point has {found} coordinates, expected {expected}")]
    PointDimension { expected: usize, found: usize },
}
