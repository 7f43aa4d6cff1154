//! Command-line front end. `main.rs` only forwards `std::env::args` to [`run`].

mod commands;

pub use commands::{
    config_expression, geometry_report, operator_report, operator_table, phase_expression, star_report, star_series,
    Engine, GeometryReport, OperatorReport, OperatorTable, StarReport, StarTerm, SymbolSpec, REPORTED_DERIVATIVES,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::checks::{run_checks, CheckError, ModelSource, PointOverride, RunConfig, Suite};
use crate::geometry::{catalog_names, GeometryError, MetricModel, PhasePoint};
use crate::jetcalc::JetError;
use crate::morphism::MorphismError;
use crate::quantize::QuantizeError;
use crate::starprod::StarError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Star(#[from] StarError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Jet(#[from] JetError),
    /// Already rendered with a caret line under the offending span.
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(name = "natstar", version, about = "Jet-level checks of natural star-products on cotangent bundles")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Catalog model name (see `natstar models`)
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// TOML or JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Jet order
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// ħ truncation K
    #[arg(long, global = true)]
    pub hbar_order: Option<usize>,
    /// Tolerance applied to every check
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Base RNG seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random points per check
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Quantization parameter a
    #[arg(long = "a", global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Quantization parameter b
    #[arg(long = "b", global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Write the JSON report here
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of a table
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Chart coordinates, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    /// Momenta, comma separated (default 0)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub momentum: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite
    Check {
        /// moyal, flat, curved, operators or all
        #[arg(long)]
        suite: Option<String>,
        /// Only checks whose id starts with one of these prefixes, comma separated
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[command(flatten)]
        at: PointArgs,
    },
    /// Star-product of two phase-space expressions at a point
    Star {
        #[arg(long, value_enum, default_value = "moyal")]
        engine: Engine,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[command(flatten)]
        at: PointArgs,
    },
    /// Closed-form and S-ordered operator of a symbol polynomial in momenta
    Operator {
        /// Phase-space expression, e.g. "r*p_theta" or "p1*p2^2"
        #[arg(long, conflicts_with = "natural")]
        symbol: Option<String>,
        /// Use ½ g^{ij} p_i p_j
        #[arg(long)]
        natural: bool,
        /// Potential V(x) added to the natural Hamiltonian
        #[arg(long, requires = "natural")]
        potential: Option<String>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
    },
    /// Connection, curvature and lifted connection at a point
    Geometry {
        #[command(flatten)]
        at: PointArgs,
    },
    /// List catalog models
    Models,
}

fn read_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::from_text(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(m) = &g.model {
        cfg.model = ModelSource::Catalog(m.clone());
    }
    macro_rules! set {
        ($field:ident, $val:expr) => {
            if let Some(v) = $val {
                cfg.$field = v;
            }
        };
    }
    set!(order, g.order);
    set!(hbar_order, g.hbar_order);
    set!(seed, g.seed);
    set!(samples, g.samples);
    set!(a, g.a);
    set!(b, g.b);
    if g.tol.is_some() {
        cfg.tolerance = g.tol;
    }
    Ok(cfg)
}

/// Point from the flags, else from the config, else the centre of the sample box.
fn resolve_point(model: &MetricModel, cfg: &RunConfig, at: Option<&PointArgs>) -> PhasePoint {
    let n = model.dimension();
    let x = at
        .and_then(|a| a.point.clone())
        .or_else(|| cfg.point.as_ref().map(|p| p.x.clone()))
        .unwrap_or_else(|| model.sample_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
    let p = at
        .and_then(|a| a.momentum.clone())
        .or_else(|| cfg.point.as_ref().and_then(|p| p.p.clone()))
        .unwrap_or_else(|| vec![0.0; n]);
    PhasePoint { x, p }
}

fn emit<T: Serialize>(g: &GlobalArgs, value: &T, table: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    if let Some(path) = &g.out {
        std::fs::write(path, format!("{json}\n")).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let text = if g.json { format!("{json}\n") } else { table.to_string() };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: "stdout".into(),
        source,
    })
}

/// Runs one command; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    let mut cfg = read_config(g)?;
    match &cli.command {
        Command::Models => {
            for name in catalog_names() {
                let _ = writeln!(out, "{name}");
            }
            Ok(EXIT_PASS)
        }
        Command::Check { suite, only, at } => {
            if let Some(s) = suite {
                cfg.suite = s.parse::<Suite>()?;
            }
            if let Some(o) = only {
                cfg.only = o.clone();
            }
            if let Some(x) = &at.point {
                cfg.point = Some(PointOverride {
                    x: x.clone(),
                    p: at.momentum.clone(),
                });
            }
            let report = run_checks(&cfg)?;
            // the file gets the full report; stdout gets the table unless --json
            emit(g, &report, &report.table(), out)?;
            Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Star { engine, f, g: gexpr, at } => {
            cfg.validate()?;
            let model = cfg.model.load()?;
            let pt = resolve_point(&model, &cfg, Some(at));
            let rep = star_report(&model, *engine, f, gexpr, &pt, cfg.order, cfg.hbar_order, cfg.a)?;
            emit(g, &rep, &rep.table(), out)?;
            Ok(EXIT_PASS)
        }
        Command::Operator {
            symbol,
            natural,
            potential,
            point,
        } => {
            cfg.validate()?;
            let model = cfg.model.load()?;
            let spec = match (symbol, natural) {
                (Some(s), _) => SymbolSpec::Expression(s.clone()),
                (None, true) => SymbolSpec::Natural(potential.clone()),
                (None, false) => {
                    return Err(CliError::Domain("give --symbol EXPR or --natural".into()));
                }
            };
            let at = PointArgs {
                point: point.clone(),
                momentum: None,
            };
            let pt = resolve_point(&model, &cfg, Some(&at));
            let rep = operator_report(&model, &spec, &pt.x, cfg.order, cfg.a, cfg.b)?;
            emit(g, &rep, &rep.table(), out)?;
            Ok(EXIT_PASS)
        }
        Command::Geometry { at } => {
            cfg.validate()?;
            let model = cfg.model.load()?;
            let pt = resolve_point(&model, &cfg, Some(at));
            let rep = geometry_report(&model, &pt, cfg.order)?;
            emit(g, &rep, &rep.table(), out)?;
            Ok(EXIT_PASS)
        }
    }
}

/// Parses arguments, runs, prints errors to stderr; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
