use crate::exprlang::Expr;
use crate::jetcalc::{compose, Jet, Scalar};

use super::metric::jet_matrix_inverse;
use super::model::MetricModel;
use super::phase::PhasePoint;
use super::GeometryError;

/// Configuration map `x = φ(x′)` and its cotangent lift
/// `T(x′, p′) = (φ(x′), (φ′)^{-T} p′)`, i.e. `p_i = [(φ′)^{-1}]^j_i p′_j`.
#[derive(Debug, Clone)]
pub struct PointTransformation {
    pub phi: Vec<Expr>,
}

/// Jets of `T` at a source point together with the image point.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    pub source: PhasePoint,
    pub target: PhasePoint,
    /// `2N` component jets in the `2N` source variables.
    pub components: Vec<Jet>,
    /// `J^i_j = ∂φ^i/∂x′^j` and its inverse, as jets in the `N` source positions.
    pub jacobian: Vec<Vec<Jet>>,
    pub jacobian_inv: Vec<Vec<Jet>>,
}

impl PointTransformation {
    /// The chart-to-Cartesian map of a model, when it has one.
    pub fn to_cartesian(model: &MetricModel) -> Option<Self> {
        model.to_cartesian.clone().map(|phi| PointTransformation { phi })
    }

    pub fn identity(model: &MetricModel) -> Self {
        let vars = model.variable_names();
        PointTransformation {
            phi: vars
                .iter()
                .map(|v| crate::exprlang::parse(v, &vars).expect("variable name parses"))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.phi.len()
    }

    pub fn phase_map(&self, source: &PhasePoint, order: usize) -> Result<PhaseMap, GeometryError> {
        let n = self.dimension();
        if source.n() != n {
            return Err(GeometryError::PointDimension {
                expected: n,
                found: source.n(),
            });
        }
        let expr_err = |i: usize| {
            move |e| GeometryError::Expr {
                context: format!("transformation component {i}"),
                source: e,
            }
        };
        // Configuration-space jets for the Jacobian.
        let xs: Vec<Jet> = (0..n).map(|i| Jet::variable(n, order, i, source.x[i])).collect();
        let phi_x: Vec<Jet> = self
            .phi
            .iter()
            .enumerate()
            .map(|(i, e)| e.eval_with(&xs).map_err(expr_err(i)))
            .collect::<Result<_, _>>()?;
        let mut jacobian = Vec::with_capacity(n);
        for f in &phi_x {
            jacobian.push((0..n).map(|j| f.partial(j)).collect::<Result<Vec<_>, _>>()?);
        }
        let (jacobian_inv, _) = jet_matrix_inverse(&jacobian)?;

        let zs = source.coordinate_jets(order);
        let mut components = Vec::with_capacity(2 * n);
        for (i, e) in self.phi.iter().enumerate() {
            components.push(e.eval_with(&zs[..n]).map_err(expr_err(i))?);
        }
        for i in 0..n {
            let mut acc = zs[0].zero_like();
            for j in 0..n {
                acc = &acc + &(&jacobian_inv[j][i].embed(2 * n, 0) * &zs[n + j]);
            }
            components.push(acc);
        }
        let target = PhasePoint::new(
            components[..n].iter().map(Jet::value).collect(),
            components[n..].iter().map(Jet::value).collect(),
        );
        Ok(PhaseMap {
            source: source.clone(),
            target,
            components,
            jacobian,
            jacobian_inv,
        })
    }
}

/// Pull back a phase jet expanded at `T(z′)` to a jet at `z′`.
pub fn point_transform<S: Scalar>(map: &PhaseMap, f: &Jet<S>) -> Result<Jet<S>, GeometryError> {
    Ok(compose(f, &map.target.z(), &map.components)?)
}
