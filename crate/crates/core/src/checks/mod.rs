//! Verification suites: sampled property checks with a deterministic JSON report.

mod cases;
mod inputs;

pub use inputs::{random_cjet, random_jet, random_polynomial, random_symbol};

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{catalog, GeometryError, MetricModel, ModelSpec, PhasePoint};
use crate::quantize::CoefficientDefect;

use cases::{CheckKind, Outcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] GeometryError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model '{0}' is not flat; the flat suite needs a flat model")]
    NotFlat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Moyal,
    Flat,
    Curved,
    Operators,
    #[default]
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["moyal", "flat", "curved", "operators", "all"];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Moyal => "moyal",
            Suite::Flat => "flat",
            Suite::Curved => "curved",
            Suite::Operators => "operators",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = CheckError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moyal" => Ok(Suite::Moyal),
            "flat" => Ok(Suite::Flat),
            "curved" => Ok(Suite::Curved),
            "operators" => Ok(Suite::Operators),
            "all" => Ok(Suite::All),
            _ => Err(CheckError::Config(format!(
                "unknown suite '{s}' (expected one of {})",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

/// A catalog name or an inline model table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Catalog(String),
    Spec(ModelSpec),
}

impl ModelSource {
    pub fn load(&self) -> Result<MetricModel, GeometryError> {
        match self {
            ModelSource::Catalog(name) => catalog(name),
            ModelSource::Spec(spec) => MetricModel::from_spec(spec),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ModelSource::Catalog(name) => name,
            ModelSource::Spec(spec) => &spec.name,
        }
    }
}

/// Fixed evaluation point replacing the random samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointOverride {
    pub x: Vec<f64>,
    /// Momenta; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSource,
    pub suite: Suite,
    /// Jet order.
    pub order: usize,
    /// ħ truncation K.
    pub hbar_order: usize,
    /// Overrides every per-check tolerance when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub a: f64,
    pub b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PointOverride>,
    /// Run only checks whose id starts with one of these prefixes.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSource::Catalog("euclidean-cartesian".into()),
            suite: Suite::All,
            order: 8,
            hbar_order: 4,
            tolerance: None,
            seed: 20240917,
            samples: 20,
            a: 0.0,
            b: 0.0,
            point: None,
            only: Vec::new(),
        }
    }
}

/// Highest momentum degree handled by the operator checks.
pub const MAX_SYMBOL_DEGREE: usize = 3;

impl RunConfig {
    pub fn for_model(name: &str) -> Self {
        RunConfig {
            model: ModelSource::Catalog(name.into()),
            ..Default::default()
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn from_text(text: &str) -> Result<Self, CheckError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CheckError::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| CheckError::Config(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        if self.order < self.hbar_order + MAX_SYMBOL_DEGREE + 1 {
            return Err(CheckError::Config(format!(
                "jet order {} must be at least hbar order + {} (= {})",
                self.order,
                MAX_SYMBOL_DEGREE + 1,
                self.hbar_order + MAX_SYMBOL_DEGREE + 1
            )));
        }
        if self.hbar_order == 0 {
            return Err(CheckError::Config("hbar order must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CheckError::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.samples == 0 {
            return Err(CheckError::Config("sample count must be positive".into()));
        }
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(CheckError::Config("parameters a and b must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub model: String,
    /// Worst sample point.
    pub point: PointRecord,
    /// `null` when a sample errored.
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    pub failures: usize,
    /// Max defect per ħ order (or per ħ power for operators) over all samples.
    pub orders: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientDefect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub tool: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    fn current() -> Self {
        Environment {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
    pub environment: Environment,
    pub seed: u64,
    pub model: String,
    pub suite: Suite,
    pub config: RunConfig,
    pub passed: bool,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timestamp zeroed, for determinism comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        Report {
            timestamp: 0,
            ..self.clone()
        }
        .to_json()
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Fixed-width text table, one line per check.
    pub fn table(&self) -> String {
        let mut out = format!(
            "model {}  suite {}  seed {}  samples {}\n",
            self.model, self.suite, self.seed, self.config.samples
        );
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(5).max(5);
        out.push_str(&format!(
            "{:<width$}  {:>11}  {:>9}  {:>7}  result\n",
            "check", "max defect", "tolerance", "fails"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:>11.3e}  {:>9.1e}  {:>7}  {}\n",
                c.id,
                c.max_defect,
                c.tolerance,
                format!("{}/{}", c.failures, c.samples),
                if c.passed { "pass" } else { "FAIL" }
            ));
            if let Some(note) = &c.note {
                out.push_str(&format!("{:<width$}  note: {note}\n", ""));
            }
        }
        out.push_str(&format!(
            "{} of {} checks passed\n",
            self.summary.passed, self.summary.total
        ));
        out
    }
}

struct CheckDef {
    id: String,
    kind: CheckKind,
    tolerance: f64,
}

fn suite_checks(suite: Suite, model: &MetricModel) -> Result<Vec<CheckDef>, CheckError> {
    let def = |id: &str, kind, tolerance| CheckDef {
        id: id.to_string(),
        kind,
        tolerance,
    };
    let lift = || {
        vec![
            def("lift.torsion", CheckKind::LiftTorsion, 1e-12),
            def("lift.symplecticity", CheckKind::LiftSymplecticity, 1e-10),
            def("lift.frame-consistency", CheckKind::LiftFrameConsistency, 1e-9),
        ]
    };
    let mut out = Vec::new();
    match suite {
        Suite::Moyal => out.push(def("moyal.associativity", CheckKind::MoyalAssociativity, 1e-9)),
        Suite::Flat => {
            if !model.flat {
                return Err(CheckError::NotFlat(model.name.clone()));
            }
            if model.to_cartesian.is_some() {
                out.push(def("flat.covariance", CheckKind::FlatCovariance, 1e-9));
            }
            out.push(def("flat.covariant-form", CheckKind::FlatCovariantForm, 1e-9));
            out.push(def("flat.lift-reduction", CheckKind::LiftFlatReduction, 1e-12));
            out.push(def("flat.equivalence", CheckKind::FlatEquivalence, 1e-9));
            out.push(def("flat.commutators", CheckKind::Commutators, 1e-9));
            out.push(def("flat.connection-identities", CheckKind::ConnectionIdentities, 1e-9));
            out.push(def("flat.canonicity", CheckKind::Canonicity, 1e-10));
            out.extend(lift());
        }
        Suite::Curved => {
            out.push(def("curved.equivalence", CheckKind::CurvedEquivalence, 1e-8));
            out.push(def("curved.associativity", CheckKind::CurvedAssociativity, 1e-8));
            out.push(def("curved.fedosov-agreement", CheckKind::FedosovAgreement, 1e-9));
            out.push(def("curved.d3-symmetry", CheckKind::D3Symmetry, 1e-9));
            out.extend(lift());
        }
        Suite::Operators => {
            for d in 1..=MAX_SYMBOL_DEGREE {
                out.push(def(&format!("operators.s-order.d{d}"), CheckKind::SOrder(d), 1e-8));
                out.push(def(&format!("operators.hermiticity.d{d}"), CheckKind::Hermiticity(d), 1e-9));
            }
            out.push(def("operators.natural.b-independence", CheckKind::NaturalB, 1e-12));
            let tol = if model.flat { 1e-12 } else { 1e-10 };
            out.push(def("operators.natural.a-dependence", CheckKind::NaturalA, tol));
        }
        Suite::All => {
            let mut suites = vec![Suite::Moyal];
            if model.flat {
                suites.push(Suite::Flat);
            }
            suites.extend([Suite::Curved, Suite::Operators]);
            for s in suites {
                for c in suite_checks(s, model)? {
                    if !out.iter().any(|o: &CheckDef| o.id == c.id) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| x.id.cmp(&y.id));
    Ok(out)
}

/// Check ids the suite would run on the model.
pub fn check_ids(suite: Suite, model: &MetricModel) -> Result<Vec<String>, CheckError> {
    Ok(suite_checks(suite, model)?.into_iter().map(|c| c.id).collect())
}

/// FNV-1a; a stable per-check RNG stream.
fn stream_id(id: &str) -> u64 {
    id.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn sample_rng(seed: u64, id: &str, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(sample as u64));
    rng.set_stream(stream_id(id));
    rng
}

fn sample_point(model: &MetricModel, cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<PhasePoint, CheckError> {
    let n = model.dimension();
    match &cfg.point {
        Some(o) => {
            let p = o.p.clone().unwrap_or_else(|| vec![0.0; n]);
            if o.x.len() != n || p.len() != n {
                return Err(GeometryError::PointDimension {
                    expected: n,
                    found: if o.x.len() != n { o.x.len() } else { p.len() },
                }
                .into());
            }
            Ok(PhasePoint::new(o.x.clone(), p))
        }
        None => {
            let (x, p) = model.sample_phase(rng);
            Ok(PhasePoint::new(x, p))
        }
    }
}

fn run_check(def: &CheckDef, model: &MetricModel, cfg: &RunConfig) -> Result<CheckRecord, CheckError> {
    let tolerance = cfg.tolerance.unwrap_or(def.tolerance);
    let samples = if cfg.point.is_some() { 1 } else { cfg.samples };
    let outcomes: Vec<(PhasePoint, Result<Outcome, String>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, &def.id, i);
            let pt = sample_point(model, cfg, &mut rng)?;
            let res = cases::evaluate(def.kind, model, cfg, &pt, &mut rng).map_err(|e| e.to_string());
            Ok((pt, res))
        })
        .collect::<Result<_, CheckError>>()?;

    let mut worst: Option<usize> = None;
    let mut worst_defect = 0.0f64;
    let mut failures = 0;
    let mut orders: Vec<f64> = Vec::new();
    let mut note = None;
    for (i, (_, res)) in outcomes.iter().enumerate() {
        let defect = match res {
            Ok(o) => {
                if orders.len() < o.orders.len() {
                    orders.resize(o.orders.len(), 0.0);
                }
                for (acc, v) in orders.iter_mut().zip(&o.orders) {
                    *acc = acc.max(*v);
                }
                o.defect
            }
            Err(msg) => {
                note.get_or_insert_with(|| format!("sample {i}: {msg}"));
                f64::INFINITY
            }
        };
        // NaN counts as a failure
        if !(defect < tolerance) {
            failures += 1;
        }
        let rank = |d: f64| if d.is_nan() { f64::INFINITY } else { d };
        if worst.is_none() || rank(defect) > rank(worst_defect) {
            worst = Some(i);
            worst_defect = defect;
        }
    }
    let w = worst.expect("at least one sample");
    let (pt, res) = &outcomes[w];
    let passed = failures == 0;
    let mut coefficients = Vec::new();
    if let Ok(o) = res {
        if !passed {
            coefficients = o
                .coefficients
                .iter()
                .filter(|c| c.defect >= tolerance)
                .cloned()
                .collect();
        }
        if note.is_none() {
            note = o.note.clone();
        }
    }
    Ok(CheckRecord {
        id: def.id.clone(),
        model: model.name.clone(),
        point: PointRecord {
            x: pt.x.clone(),
            p: pt.p.clone(),
        },
        max_defect: worst_defect,
        tolerance,
        passed,
        samples,
        failures,
        orders,
        coefficients,
        note,
    })
}

/// Runs the configured suite. Checks run in parallel; records are ordered by id.
pub fn run_checks(cfg: &RunConfig) -> Result<Report, CheckError> {
    cfg.validate()?;
    let model = cfg.model.load()?;
    let mut defs = suite_checks(cfg.suite, &model)?;
    if !cfg.only.is_empty() {
        defs.retain(|d| cfg.only.iter().any(|p| d.id.starts_with(p.as_str())));
        if defs.is_empty() {
            return Err(CheckError::Config(format!(
                "no check in suite '{}' matches {:?}",
                cfg.suite, cfg.only
            )));
        }
    }
    let checks: Vec<CheckRecord> = defs
        .par_iter()
        .map(|d| run_check(d, &model, cfg))
        .collect::<Result<_, _>>()?;
    let passed_count = checks.iter().filter(|c| c.passed).count();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        timestamp,
        environment: Environment::current(),
        seed: cfg.seed,
        model: model.name.clone(),
        suite: cfg.suite,
        config: cfg.clone(),
        passed: passed_count == checks.len(),
        summary: Summary {
            total: checks.len(),
            passed: passed_count,
            failed: checks.len() - passed_count,
        },
        checks,
    })
}
