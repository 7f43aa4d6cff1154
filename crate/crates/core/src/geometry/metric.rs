use crate::jetcalc::Jet;

use super::model::MetricModel;
use super::GeometryError;

/// Jets of `g_ij`, `g^ij` and `√|det g|` at a configuration point.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub point: Vec<f64>,
    pub g: Vec<Vec<Jet>>,
    pub ginv: Vec<Vec<Jet>>,
    pub det: Jet,
    pub sqrt_det: Jet,
}

impl MetricJets {
    pub fn dimension(&self) -> usize {
        self.g.len()
    }
}

pub fn metric_jets(model: &MetricModel, x0: &[f64], order: usize) -> Result<MetricJets, GeometryError> {
    let n = model.dimension();
    if x0.len() != n {
        return Err(GeometryError::PointDimension {
            expected: n,
            found: x0.len(),
        });
    }
    let mut g = Vec::with_capacity(n);
    for (i, row) in model.metric.iter().enumerate() {
        let mut jets = Vec::with_capacity(n);
        for (j, e) in row.iter().enumerate() {
            jets.push(e.eval_jet(x0, order).map_err(|source| GeometryError::Expr {
                context: format!("metric[{i}][{j}]"),
                source,
            })?);
        }
        g.push(jets);
    }
    let (ginv, det) = jet_matrix_inverse(&g).map_err(|e| match e {
        GeometryError::SingularJacobian(d) => GeometryError::SingularMetric(d),
        other => other,
    })?;
    let abs_det = if det.value() < 0.0 { -&det } else { det.clone() };
    let sqrt_det = abs_det.sqrt()?;
    Ok(MetricJets {
        point: x0.to_vec(),
        g,
        ginv,
        det,
        sqrt_det,
    })
}

/// Inverse and determinant of a square matrix of jets by Gauss-Jordan
/// elimination with partial pivoting on the constant terms.
pub fn jet_matrix_inverse(m: &[Vec<Jet>]) -> Result<(Vec<Vec<Jet>>, Jet), GeometryError> {
    let n = m.len();
    let template = &m[0][0];
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, j| s.max(j.value().abs()))
        .max(1e-300);
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| template.constant_like(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let mut det = template.constant_like(1.0);
    let mut det_value = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].value().abs().total_cmp(&a[y][col].value().abs()))
            .expect("nonempty range");
        let pv = a[pivot][col].value();
        det_value *= pv;
        if pv.abs() <= 1e-12 * scale {
            return Err(GeometryError::SingularJacobian(if pv == 0.0 { 0.0 } else { det_value }));
        }
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -&det;
        }
        det = &det * &a[col][col];
        let pinv = a[col][col].inverse()?;
        for k in 0..n {
            a[col][k] = &a[col][k] * &pinv;
            inv[col][k] = &inv[col][k] * &pinv;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for k in 0..n {
                let da = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &da;
                let di = &factor * &inv[col][k];
                inv[row][k] = &inv[row][k] - &di;
            }
        }
    }
    Ok((inv, det))
}
