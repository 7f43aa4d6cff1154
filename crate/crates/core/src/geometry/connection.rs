use crate::jetcalc::Jet;

use super::metric::{metric_jets, MetricJets};
use super::model::MetricModel;
use super::GeometryError;

/// Connection coefficients `Γ^a_{bc}` in a coordinate frame, with the last
/// lower index the differentiation direction: `∇_{∂_c} ∂_b = Γ^a_{bc} ∂_a`.
#[derive(Debug, Clone)]
pub struct Connection {
    dim: usize,
    comps: Vec<Jet>,
    nonzero: Vec<bool>,
}

impl Connection {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> Jet) -> Self {
        let mut comps = Vec::with_capacity(dim * dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    comps.push(f(a, b, c));
                }
            }
        }
        let nonzero = comps.iter().map(|j| !j.is_zero()).collect();
        Connection { dim, comps, nonzero }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Jet {
        &self.comps[self.idx(a, b, c)]
    }

    pub fn is_nonzero(&self, a: usize, b: usize, c: usize) -> bool {
        self.nonzero[self.idx(a, b, c)]
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Connection) -> Result<f64, GeometryError> {
        let mut m = 0.0f64;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            m = m.max(a.max_abs_diff(b)?);
        }
        Ok(m)
    }

    /// Largest `|Γ^a_{bc} − Γ^a_{cb}|`.
    pub fn asymmetry(&self) -> Result<f64, GeometryError> {
        let mut m = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in b + 1..self.dim {
                    m = m.max(self.get(a, b, c).max_abs_diff(self.get(a, c, b))?);
                }
            }
        }
        Ok(m)
    }

    pub fn embed(&self, nvars: usize, offset: usize) -> Connection {
        Connection {
            dim: self.dim,
            comps: self.comps.iter().map(|j| j.embed(nvars, offset)).collect(),
            nonzero: self.nonzero.clone(),
        }
    }

    /// Valid order common to all components.
    pub fn valid_order(&self) -> usize {
        self.comps.iter().map(Jet::valid_order).min().unwrap_or(0)
    }
}

/// Levi-Civita connection `Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk})`.
pub fn christoffel(m: &MetricJets) -> Result<Connection, GeometryError> {
    let n = m.dimension();
    // dg[l][k][j] = ∂_j g_{lk}
    let mut dg = vec![vec![Vec::with_capacity(n); n]; n];
    for l in 0..n {
        for k in 0..n {
            for j in 0..n {
                dg[l][k].push(m.g[l][k].partial(j)?);
            }
        }
    }
    let mut lowered = vec![Vec::with_capacity(n * n); n];
    for (l, low) in lowered.iter_mut().enumerate() {
        for j in 0..n {
            for k in 0..n {
                let s = &(&dg[l][k][j] + &dg[l][j][k]) - &dg[j][k][l];
                low.push(s.scale(0.5));
            }
        }
    }
    Ok(Connection::from_fn(n, |i, j, k| {
        let mut acc = lowered[0][j * n + k].zero_like();
        for (l, low) in lowered.iter().enumerate() {
            let t = &low[j * n + k];
            if !t.is_zero() && !m.ginv[i][l].is_zero() {
                acc = &acc + &(&m.ginv[i][l] * t);
            }
        }
        acc
    }))
}

/// Overall sign of the curvature tensor. Only [`CurvatureSign::Standard`]
/// is consistent with the lifted-connection identities (see the calibration tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSign {
    /// `R^l_{ijk} = ∂_jΓ^l_{ik} − ∂_kΓ^l_{ij} + Γ^m_{ik}Γ^l_{mj} − Γ^m_{ij}Γ^l_{mk}`
    Standard,
    Opposite,
}

/// Which lower slot of `R^l_{ijk}` the upper index is contracted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicciContraction {
    /// `R_{ik} = R^l_{ilk}`
    Second,
    /// `R_{ij} = R^l_{ijl}`
    Third,
}

/// The conventions fixed by calibration.
pub const CONVENTION: (CurvatureSign, RicciContraction) =
    (CurvatureSign::Standard, RicciContraction::Second);

/// `R^l_{ijk}`, antisymmetric in `j, k`.
#[derive(Debug, Clone)]
pub struct Riemann {
    dim: usize,
    comps: Vec<Jet>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> &Jet {
        let d = self.dim;
        &self.comps[((l * d + i) * d + j) * d + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.max_abs()))
    }

    /// Largest constant-term modulus (the curvature at the point itself).
    pub fn max_value(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.value().abs()))
    }

    pub fn embed(&self, nvars: usize, offset: usize) -> Riemann {
        Riemann {
            dim: self.dim,
            comps: self.comps.iter().map(|j| j.embed(nvars, offset)).collect(),
        }
    }
}

/// Curvature of a coordinate-frame connection whose jets are expanded in
/// exactly `dim` variables.
pub fn riemann(conn: &Connection, sign: CurvatureSign) -> Result<Riemann, GeometryError> {
    let d = conn.dim();
    let template = conn.get(0, 0, 0);
    if template.nvars() != d {
        return Err(GeometryError::InvalidModel(format!(
            "connection of dimension {d} expanded in {} variables",
            template.nvars()
        )));
    }
    let s = match sign {
        CurvatureSign::Standard => 1.0,
        CurvatureSign::Opposite => -1.0,
    };
    // Derivatives ∂_j Γ^l_{ik}, computed once.
    let mut dgamma: Vec<Option<Jet>> = Vec::with_capacity(d * d * d * d);
    for l in 0..d {
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    dgamma.push(if conn.is_nonzero(l, i, k) {
                        Some(conn.get(l, i, k).partial(j)?)
                    } else {
                        None
                    });
                }
            }
        }
    }
    let dg = |l: usize, i: usize, k: usize, j: usize| dgamma[((l * d + i) * d + k) * d + j].as_ref();
    let zero = template.truncate(template.valid_order().saturating_sub(1)).zero_like();
    let mut comps = vec![zero.clone(); d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in j + 1..d {
                    let mut acc = zero.clone();
                    if let Some(t) = dg(l, i, k, j) {
                        acc = &acc + t;
                    }
                    if let Some(t) = dg(l, i, j, k) {
                        acc = &acc - t;
                    }
                    for m in 0..d {
                        if conn.is_nonzero(m, i, k) && conn.is_nonzero(l, m, j) {
                            acc = &acc + &(conn.get(m, i, k) * conn.get(l, m, j));
                        }
                        if conn.is_nonzero(m, i, j) && conn.is_nonzero(l, m, k) {
                            acc = &acc - &(conn.get(m, i, j) * conn.get(l, m, k));
                        }
                    }
                    let acc = acc.scale(s);
                    comps[((l * d + i) * d + k) * d + j] = -&acc;
                    comps[((l * d + i) * d + j) * d + k] = acc;
                }
            }
        }
    }
    Ok(Riemann { dim: d, comps })
}

pub fn ricci(r: &Riemann, contraction: RicciContraction) -> Vec<Vec<Jet>> {
    let d = r.dim();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let mut acc = r.get(0, 0, 0, 0).zero_like();
                    for l in 0..d {
                        let t = match contraction {
                            RicciContraction::Second => r.get(l, a, l, b),
                            RicciContraction::Third => r.get(l, a, b, l),
                        };
                        acc = &acc + t;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Metric, Levi-Civita connection and curvature at a configuration point.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    pub metric: MetricJets,
    pub gamma: Connection,
    pub riemann: Riemann,
    pub ricci: Vec<Vec<Jet>>,
}

impl ConnectionField {
    pub fn new(model: &MetricModel, x0: &[f64], order: usize) -> Result<Self, GeometryError> {
        Self::with_convention(model, x0, order, CONVENTION.0, CONVENTION.1)
    }

    pub fn with_convention(
        model: &MetricModel,
        x0: &[f64],
        order: usize,
        sign: CurvatureSign,
        contraction: RicciContraction,
    ) -> Result<Self, GeometryError> {
        let metric = metric_jets(model, x0, order)?;
        let gamma = christoffel(&metric)?;
        let riemann = riemann(&gamma, sign)?;
        let ricci = ricci(&riemann, contraction);
        Ok(ConnectionField {
            metric,
            gamma,
            riemann,
            ricci,
        })
    }

    pub fn dimension(&self) -> usize {
        self.gamma.dim()
    }

    pub fn point(&self) -> &[f64] {
        &self.metric.point
    }

    /// `max|R| / max(1, max|Γ|)²` over all Taylor coefficients. Flat charts give
    /// roundoff only, which scales with the size of the Christoffel jets.
    pub fn curvature_norm(&self) -> f64 {
        self.riemann.max_abs() / self.gamma.max_abs().max(1.0).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    /// Central finite-difference Christoffel symbols from pointwise metric evaluation.
    fn fd_christoffel(model: &MetricModel, x: &[f64]) -> Vec<f64> {
        let n = model.dimension();
        let h = 1e-5;
        let g_at = |y: &[f64]| -> Vec<Vec<f64>> {
            model
                .metric
                .iter()
                .map(|row| row.iter().map(|e| e.eval(y).unwrap()).collect())
                .collect()
        };
        let mut dg = vec![vec![vec![0.0; n]; n]; n]; // dg[a][b][c] = ∂_c g_ab
        for c in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += h;
            xm[c] -= h;
            let (gp, gm) = (g_at(&xp), g_at(&xm));
            for a in 0..n {
                for b in 0..n {
                    dg[a][b][c] = (gp[a][b] - gm[a][b]) / (2.0 * h);
                }
            }
        }
        let m = metric_jets(model, x, 0).unwrap();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += 0.5 * m.ginv[i][l].value() * (dg[l][k][j] + dg[l][j][k] - dg[j][k][l]);
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        for (name, x) in [
            ("euclidean-polar", vec![1.7, 0.4]),
            ("unit-sphere", vec![1.1, -0.3]),
            ("euclidean-spherical", vec![1.2, 0.8, 2.0]),
            ("hyperbolic-half-plane", vec![0.3, 1.4]),
        ] {
            let model = catalog(name).unwrap();
            let cf = ConnectionField::new(&model, &x, 3).unwrap();
            let fd = fd_christoffel(&model, &x);
            for (j, f) in cf.gamma.components().iter().zip(&fd) {
                assert!((j.value() - f).abs() < 1e-8, "{name}");
            }
            assert!(cf.gamma.asymmetry().unwrap() < 1e-15);
        }
    }

    #[test]
    fn named_symbols() {
        let r = 1.7;
        let cf = ConnectionField::new(&catalog("euclidean-polar").unwrap(), &[r, 0.4], 3).unwrap();
        assert!((cf.gamma.get(0, 1, 1).value() + r).abs() < 1e-14);
        assert!((cf.gamma.get(1, 0, 1).value() - 1.0 / r).abs() < 1e-14);
        let t: f64 = 1.1;
        let cf = ConnectionField::new(&catalog("unit-sphere").unwrap(), &[t, 0.2], 3).unwrap();
        assert!((cf.gamma.get(0, 1, 1).value() + t.sin() * t.cos()).abs() < 1e-14);
        assert!((cf.gamma.get(1, 0, 1).value() - 1.0 / t.tan()).abs() < 1e-14);
    }

    #[test]
    fn flat_models_have_no_curvature() {
        for name in ["euclidean-cartesian", "euclidean-polar", "euclidean-spherical"] {
            let model = catalog(name).unwrap();
            let x: Vec<f64> = model.sample_box.iter().map(|(a, b)| 0.37 * a + 0.63 * b).collect();
            let cf = ConnectionField::new(&model, &x, 5).unwrap();
            assert!(cf.curvature_norm() < 1e-10, "{name}: {}", cf.curvature_norm());
        }
    }

    #[test]
    fn constant_curvature_ricci() {
        for (name, k, x) in [
            ("unit-sphere", 1.0, [0.9, 0.3]),
            ("hyperbolic-half-plane", -1.0, [0.2, 1.3]),
        ] {
            let model = catalog(name).unwrap();
            let cf = ConnectionField::new(&model, &x, 5).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let expected = cf.metric.g[i][j].scale(k);
                    let d = cf.ricci[i][j].max_abs_diff(&expected).unwrap();
                    assert!(d < 1e-10, "{name} R_{i}{j}: {d}");
                }
            }
        }
    }

    #[test]
    fn metric_is_parallel() {
        // ∇_k g_ij = ∂_k g_ij − Γ^l_{ik} g_lj − Γ^l_{jk} g_il
        for name in ["unit-sphere", "euclidean-spherical", "hyperbolic-half-plane"] {
            let model = catalog(name).unwrap();
            let x: Vec<f64> = model.sample_box.iter().map(|(a, b)| 0.6 * a + 0.4 * b).collect();
            let cf = ConnectionField::new(&model, &x, 5).unwrap();
            let n = model.dimension();
            let g = &cf.metric.g;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut t = g[i][j].partial(k).unwrap();
                        for l in 0..n {
                            t = &t - &(cf.gamma.get(l, i, k) * &g[l][j]);
                            t = &t - &(cf.gamma.get(l, j, k) * &g[i][l]);
                        }
                        assert!(t.max_abs() < 1e-10, "{name}");
                    }
                }
            }
        }
    }

    #[test]
    fn opposite_sign_flips_ricci() {
        let model = catalog("unit-sphere").unwrap();
        let a = ConnectionField::new(&model, &[1.0, 0.0], 4).unwrap();
        let b = ConnectionField::with_convention(
            &model,
            &[1.0, 0.0],
            4,
            CurvatureSign::Opposite,
            RicciContraction::Second,
        )
        .unwrap();
        let c = ConnectionField::with_convention(
            &model,
            &[1.0, 0.0],
            4,
            CurvatureSign::Standard,
            RicciContraction::Third,
        )
        .unwrap();
        assert!((a.ricci[0][0].value() - 1.0).abs() < 1e-13);
        assert!((b.ricci[0][0].value() + 1.0).abs() < 1e-13);
        assert!((c.ricci[0][0].value() + 1.0).abs() < 1e-13);
    }
}
