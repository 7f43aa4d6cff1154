use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exprlang::{parse, Expr};

use super::GeometryError;

/// A configuration-space chart with a metric given by expressions.
#[derive(Debug, Clone)]
pub struct MetricModel {
    pub name: String,
    pub variables: Vec<String>,
    /// Full symmetric N×N array; entry `[j][i]` for `j > i` is a copy of `[i][j]`.
    pub metric: Vec<Vec<Expr>>,
    pub to_cartesian: Option<Vec<Expr>>,
    pub flat: bool,
    pub sample_box: Vec<(f64, f64)>,
    pub momentum_box: (f64, f64),
}

/// Serializable model description, as found in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub dimension: usize,
    pub variables: Vec<String>,
    /// Upper-triangular rows: row `i` lists `g_ii, g_i(i+1), …, g_iN`.
    pub metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_cartesian: Option<Vec<String>>,
    #[serde(default)]
    pub flat: bool,
    pub sample_box: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_box: Option<[f64; 2]>,
}

const PI: f64 = std::f64::consts::PI;

fn spec(
    name: &str,
    vars: &[&str],
    metric: &[&[&str]],
    to_cart: Option<&[&str]>,
    flat: bool,
    sample_box: &[[f64; 2]],
) -> ModelSpec {
    ModelSpec {
        name: name.to_string(),
        dimension: vars.len(),
        variables: vars.iter().map(|s| s.to_string()).collect(),
        metric: metric
            .iter()
            .map(|row| row.iter().map(|s| s.to_string()).collect())
            .collect(),
        to_cartesian: to_cart.map(|m| m.iter().map(|s| s.to_string()).collect()),
        flat,
        sample_box: sample_box.to_vec(),
        momentum_box: None,
    }
}

fn catalog_specs() -> Vec<ModelSpec> {
    // Sample boxes keep at least 0.1 away from coordinate singularities
    // (r = 0, sin θ = 0, y = 0).
    vec![
        spec(
            "euclidean-cartesian",
            &["x1", "x2"],
            &[&["1", "0"], &["1"]],
            Some(&["x1", "x2"]),
            true,
            &[[-2.0, 2.0], [-2.0, 2.0]],
        ),
        spec(
            "euclidean-cartesian-3",
            &["x1", "x2", "x3"],
            &[&["1", "0", "0"], &["1", "0"], &["1"]],
            Some(&["x1", "x2", "x3"]),
            true,
            &[[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
        ),
        spec(
            "euclidean-polar",
            &["r", "theta"],
            &[&["1", "0"], &["r^2"]],
            Some(&["r*cos(theta)", "r*sin(theta)"]),
            true,
            &[[0.5, 2.5], [-PI, PI]],
        ),
        spec(
            "euclidean-spherical",
            &["r", "theta", "phi"],
            &[&["1", "0", "0"], &["r^2", "0"], &["r^2*sin(theta)^2"]],
            Some(&[
                "r*sin(theta)*cos(phi)",
                "r*sin(theta)*sin(phi)",
                "r*cos(theta)",
            ]),
            true,
            &[[0.5, 2.5], [0.4, PI - 0.4], [-PI, PI]],
        ),
        spec(
            "unit-sphere",
            &["theta", "phi"],
            &[&["1", "0"], &["sin(theta)^2"]],
            None,
            false,
            &[[0.4, PI - 0.4], [-PI, PI]],
        ),
        spec(
            "hyperbolic-half-plane",
            &["x", "y"],
            &[&["1/y^2", "0"], &["1/y^2"]],
            None,
            false,
            &[[-1.0, 1.0], [0.5, 2.0]],
        ),
    ]
}

pub fn catalog_names() -> Vec<String> {
    catalog_specs().into_iter().map(|s| s.name).collect()
}

/// Built-in model by name.
pub fn catalog(name: &str) -> Result<MetricModel, GeometryError> {
    let spec = catalog_specs()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| GeometryError::UnknownModel(name.to_string()))?;
    MetricModel::from_spec(&spec)
}

impl MetricModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<MetricModel, GeometryError> {
        let n = spec.dimension;
        let invalid = |msg: String| GeometryError::InvalidModel(format!("{}: {msg}", spec.name));
        if n == 0 {
            return Err(invalid("dimension must be positive".into()));
        }
        if spec.variables.len() != n {
            return Err(invalid(format!(
                "{} variables for dimension {n}",
                spec.variables.len()
            )));
        }
        for (i, v) in spec.variables.iter().enumerate() {
            if spec.variables[..i].contains(v) {
                return Err(invalid(format!("duplicate variable '{v}'")));
            }
            if v.starts_with('p') && v[1..].chars().all(|c| c.is_ascii_digit()) && v.len() > 1 {
                return Err(invalid(format!("variable '{v}' clashes with momentum names")));
            }
        }
        if spec.metric.len() != n {
            return Err(invalid(format!("metric has {} rows, expected {n}", spec.metric.len())));
        }
        let vars: Vec<&str> = spec.variables.iter().map(String::as_str).collect();
        let parse_in = |text: &str, context: String| {
            parse(text, &vars).map_err(|source| GeometryError::Expr { context, source })
        };
        let mut upper: Vec<Vec<Expr>> = Vec::with_capacity(n);
        for (i, row) in spec.metric.iter().enumerate() {
            if row.len() != n - i {
                return Err(invalid(format!(
                    "metric row {i} has {} entries, expected {} (upper triangle)",
                    row.len(),
                    n - i
                )));
            }
            let mut parsed = Vec::with_capacity(row.len());
            for (k, text) in row.iter().enumerate() {
                parsed.push(parse_in(text, format!("metric[{i}][{}]", i + k))?);
            }
            upper.push(parsed);
        }
        let metric = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let (a, b) = if i <= j { (i, j) } else { (j, i) };
                        upper[a][b - a].clone()
                    })
                    .collect()
            })
            .collect();
        let to_cartesian = match &spec.to_cartesian {
            None => None,
            Some(map) => {
                if map.len() != n {
                    return Err(invalid(format!("to_cartesian has {} entries", map.len())));
                }
                Some(
                    map.iter()
                        .enumerate()
                        .map(|(i, t)| parse_in(t, format!("to_cartesian[{i}]")))
                        .collect::<Result<_, _>>()?,
                )
            }
        };
        if spec.sample_box.len() != n {
            return Err(invalid(format!(
                "sample_box has {} intervals, expected {n}",
                spec.sample_box.len()
            )));
        }
        let ordered = |[lo, hi]: [f64; 2]| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !spec.sample_box.iter().copied().all(ordered) {
            return Err(invalid("sample_box intervals must be finite with lo <= hi".into()));
        }
        let momentum_box = spec.momentum_box.unwrap_or([-1.0, 1.0]);
        if !ordered(momentum_box) {
            return Err(invalid("momentum_box must be finite with lo <= hi".into()));
        }
        Ok(MetricModel {
            name: spec.name.clone(),
            variables: spec.variables.clone(),
            metric,
            to_cartesian,
            flat: spec.flat,
            sample_box: spec.sample_box.iter().map(|[a, b]| (*a, *b)).collect(),
            momentum_box: (momentum_box[0], momentum_box[1]),
        })
    }

    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(String::as_str).collect()
    }

    /// Uniform configuration point from the sample box, rejecting points where
    /// the metric is degenerate or not finite.
    pub fn sample_config<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        for _ in 0..1000 {
            let x: Vec<f64> = self
                .sample_box
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo })
                .collect();
            if self.is_regular_at(&x) {
                return x;
            }
        }
        panic!("model {}: no regular point found in the sample box", self.name);
    }

    /// Configuration point plus momenta from the momentum box.
    pub fn sample_phase<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let x = self.sample_config(rng);
        let (lo, hi) = self.momentum_box;
        let p = (0..self.dimension())
            .map(|_| if lo < hi { rng.gen_range(lo..hi) } else { lo })
            .collect();
        (x, p)
    }

    pub fn is_regular_at(&self, x: &[f64]) -> bool {
        match super::metric::metric_jets(self, x, 0) {
            Ok(m) => m.sqrt_det.value().is_finite() && m.sqrt_det.value() > 1e-6,
            Err(_) => false,
        }
    }
}
