use crate::jetcalc::{Jet, Scalar};

use super::connection::Connection;
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Upper,
    Lower,
}

/// Tensor field jets in a coordinate frame, components stored row-major.
#[derive(Debug, Clone)]
pub struct TensorJet<S: Scalar = f64> {
    dim: usize,
    kinds: Vec<IndexKind>,
    comps: Vec<Jet<S>>,
}

impl<S: Scalar> TensorJet<S> {
    pub fn scalar(f: Jet<S>) -> Self {
        TensorJet {
            dim: f.nvars(),
            kinds: Vec::new(),
            comps: vec![f],
        }
    }

    pub fn from_fn(dim: usize, kinds: Vec<IndexKind>, mut f: impl FnMut(&[usize]) -> Jet<S>) -> Self {
        let rank = kinds.len();
        let total = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let mut comps = Vec::with_capacity(total);
        for flat in 0..total {
            decode(flat, dim, &mut idx);
            comps.push(f(&idx));
        }
        TensorJet { dim, kinds, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[IndexKind] {
        &self.kinds
    }

    pub fn components(&self) -> &[Jet<S>] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Jet<S> {
        &self.comps[encode(idx, self.dim)]
    }

    pub fn valid_order(&self) -> usize {
        self.comps.iter().map(Jet::valid_order).min().unwrap_or(0)
    }

    /// Largest `|T_{..a..b..} − T_{..b..a..}|` for the slot pair `(s, t)`.
    pub fn asymmetry(&self, s: usize, t: usize) -> Result<f64, GeometryError> {
        let mut m = 0.0f64;
        let mut idx = vec![0; self.rank()];
        for flat in 0..self.comps.len() {
            decode(flat, self.dim, &mut idx);
            idx.swap(s, t);
            let other = &self.comps[encode(&idx, self.dim)];
            m = m.max(self.comps[flat].max_abs_diff(other)?);
        }
        Ok(m)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, GeometryError> {
        let mut m = 0.0f64;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            m = m.max(a.max_abs_diff(b)?);
        }
        Ok(m)
    }
}

pub(crate) fn decode(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

pub(crate) fn encode(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// `∇T` with the derivative index appended last:
/// `(∇T)^{..a..}_{..b.. c} = ∂_c T + Γ^a_{l c} T^{..l..} − Γ^l_{b c} T_{..l..}`.
/// Jets must be expanded in coordinates matching the connection's frame.
pub fn covariant_derivative<S: Scalar>(
    t: &TensorJet<S>,
    conn: &Connection,
) -> Result<TensorJet<S>, GeometryError> {
    let d = t.dim;
    if conn.dim() != d {
        return Err(GeometryError::PointDimension {
            expected: d,
            found: conn.dim(),
        });
    }
    let rank = t.rank();
    let mut kinds = t.kinds.clone();
    kinds.push(IndexKind::Lower);
    let total = t.comps.len() * d;
    let mut comps = Vec::with_capacity(total);
    let mut idx = vec![0; rank + 1];
    let mut shifted = vec![0; rank];
    for flat in 0..total {
        decode(flat, d, &mut idx);
        let c = idx[rank];
        let base = &t.comps[flat / d];
        let mut acc = base.partial(c)?;
        for s in 0..rank {
            shifted.copy_from_slice(&idx[..rank]);
            for l in 0..d {
                let (a, b) = match t.kinds[s] {
                    IndexKind::Upper => (idx[s], l),
                    IndexKind::Lower => (l, idx[s]),
                };
                if !conn.is_nonzero(a, b, c) {
                    continue;
                }
                shifted[s] = l;
                let comp = &t.comps[encode(&shifted, d)];
                if comp.is_zero() {
                    continue;
                }
                let term = comp.mul_real(conn.get(a, b, c))?;
                acc = match t.kinds[s] {
                    IndexKind::Upper => acc.try_add(&term)?,
                    IndexKind::Lower => acc.try_sub(&term)?,
                };
            }
        }
        comps.push(acc);
    }
    Ok(TensorJet { dim: d, kinds, comps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, ConnectionField};

    #[test]
    fn scalar_gradient_is_partial() {
        let x = Jet::variable(2, 4, 0, 1.5);
        let y = Jet::variable(2, 4, 1, 0.2);
        let f = &(&x * &x) * &y;
        let cf = ConnectionField::new(&catalog("euclidean-polar").unwrap(), &[1.5, 0.2], 4).unwrap();
        let grad = covariant_derivative(&TensorJet::scalar(f.clone()), &cf.gamma).unwrap();
        assert_eq!(grad.get(&[0]).coeffs(), f.partial(0).unwrap().coeffs());
        let hess = covariant_derivative(&grad, &cf.gamma).unwrap();
        assert!(hess.asymmetry(0, 1).unwrap() < 1e-14);
    }

    #[test]
    fn covariant_laplacian_on_polar_matches_flat() {
        // f = x² + y² - xy in polar coordinates; g^{ij}∇_i∇_j f = Δf = 4.
        let (r0, t0) = (1.3, 0.7);
        let model = catalog("euclidean-polar").unwrap();
        let cf = ConnectionField::new(&model, &[r0, t0], 6).unwrap();
        let f = crate::exprlang::parse(
            "r^2 - r^2*cos(theta)*sin(theta)",
            &["r", "theta"],
        )
        .unwrap()
        .eval_jet(&[r0, t0], 6)
        .unwrap();
        let hess = covariant_derivative(
            &covariant_derivative(&TensorJet::scalar(f), &cf.gamma).unwrap(),
            &cf.gamma,
        )
        .unwrap();
        let mut lap = hess.get(&[0, 0]).zero_like();
        for i in 0..2 {
            for j in 0..2 {
                lap = &lap + &(&cf.metric.ginv[i][j] * hess.get(&[i, j]));
            }
        }
        let four = lap.constant_like(4.0);
        assert!(lap.max_abs_diff(&four).unwrap() < 1e-12);
    }

    #[test]
    fn index_roundtrip() {
        let mut idx = [0; 3];
        for flat in 0..27 {
            decode(flat, 3, &mut idx);
            assert_eq!(encode(&idx, 3), flat);
        }
    }
}
