use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;

use crate::checks::{PointRecord, MAX_SYMBOL_DEGREE};
use crate::exprlang::parse;
use crate::geometry::{
    lift_flat, lift_general, phase_variable_names, ConnectionField, Connection, Frame, MetricModel, PhasePoint,
};
use crate::jetcalc::{CJet, HbarSeries, Jet, MultiIndex};
use crate::quantize::{
    closed_form, multi_index_key, op_quadratic, quantization_morphism, s_order, CoefficientDefect, DiffOperator,
    MomentumSymbol,
};
use crate::starprod::{CovariantStar, CurvilinearStar, FamilyAStar, FedosovLikeStar, MoyalStar, StarProduct};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Moyal,
    Curvilinear,
    Covariant,
    FamilyA,
    FedosovLike,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

impl Engine {
    /// Highest ħ order the engine defines.
    pub fn max_truncation(self) -> Option<usize> {
        match self {
            Engine::FamilyA | Engine::FedosovLike => Some(3),
            _ => None,
        }
    }
}

/// Parses an expression in the model's phase variables and expands it at the point.
pub fn phase_expression(model: &MetricModel, text: &str, pt: &PhasePoint, order: usize) -> Result<Jet, CliError> {
    let names = phase_variable_names(model);
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    let e = parse(text, &vars).map_err(|e| CliError::Parse(e.render(text)))?;
    pt.eval_expr(&e, order).map_err(|e| CliError::Parse(e.render(text)))
}

/// Parses an expression in the chart variables and expands it at `x`.
pub fn config_expression(model: &MetricModel, text: &str, x: &[f64], order: usize) -> Result<Jet, CliError> {
    let vars = model.variable_names();
    let e = parse(text, &vars).map_err(|e| CliError::Parse(e.render(text)))?;
    e.eval_jet(x, order).map_err(|e| CliError::Parse(e.render(text)))
}

fn check_point(model: &MetricModel, pt: &PhasePoint) -> Result<(), CliError> {
    let n = model.dimension();
    if pt.x.len() != n || pt.p.len() != n {
        return Err(CliError::Domain(format!(
            "point needs {n} positions and {n} momenta, got {} and {}",
            pt.x.len(),
            pt.p.len()
        )));
    }
    if !model.is_regular_at(&pt.x) {
        return Err(CliError::Domain(format!(
            "metric of '{}' is singular or undefined at x = {:?}",
            model.name, pt.x
        )));
    }
    Ok(())
}

/// `f ⋆ g` with the selected engine, truncated at `k` (clamped to the engine maximum).
#[allow(clippy::too_many_arguments)]
pub fn star_series(
    model: &MetricModel,
    engine: Engine,
    f: &CJet,
    g: &CJet,
    pt: &PhasePoint,
    order: usize,
    k: usize,
    a: f64,
) -> Result<HbarSeries, CliError> {
    check_point(model, pt)?;
    let k = engine.max_truncation().map_or(k, |m| k.min(m));
    let n = model.dimension();
    let out = match engine {
        Engine::Moyal => MoyalStar::new(n, k).star(f, g)?,
        Engine::Curvilinear => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            CurvilinearStar::new(&cf, pt, k).star(f, g)?
        }
        Engine::Covariant => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            CovariantStar::new(lift_flat(&cf, pt)?, k)?.star(f, g)?
        }
        Engine::FamilyA => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            FamilyAStar::new(lift_general(&cf, pt, Frame::Darboux)?, a, k)?.star(f, g)?
        }
        Engine::FedosovLike => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            FedosovLikeStar::new(lift_general(&cf, pt, Frame::Darboux)?, k)?.star(f, g)?
        }
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarTerm {
    pub hbar_power: usize,
    /// Derivative values `∂^β c_k` at the point, keyed by the multi-index `β`.
    pub derivatives: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarReport {
    pub engine: Engine,
    pub model: String,
    pub variables: Vec<String>,
    pub point: PointRecord,
    pub f: String,
    pub g: String,
    pub hbar_order: usize,
    pub terms: Vec<StarTerm>,
}

/// Derivatives up to this total degree are reported.
pub const REPORTED_DERIVATIVES: usize = 2;

fn cpair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn low_derivatives(j: &CJet, max: usize) -> BTreeMap<String, [f64; 2]> {
    let top = max.min(j.valid_order());
    j.iter()
        .filter(|(m, _)| m.degree() <= top)
        .map(|(m, _)| {
            let d = j.derivative_at(m).expect("index within order");
            (multi_index_key(m), cpair(d))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn star_report(
    model: &MetricModel,
    engine: Engine,
    f_text: &str,
    g_text: &str,
    pt: &PhasePoint,
    order: usize,
    k: usize,
    a: f64,
) -> Result<StarReport, CliError> {
    check_point(model, pt)?;
    let f = phase_expression(model, f_text, pt, order)?.to_complex();
    let g = phase_expression(model, g_text, pt, order)?.to_complex();
    let series = star_series(model, engine, &f, &g, pt, order, k, a)?;
    let mut variables = model.variables.clone();
    variables.extend(model.variables.iter().map(|v| format!("p_{v}")));
    Ok(StarReport {
        engine,
        model: model.name.clone(),
        variables,
        point: PointRecord {
            x: pt.x.clone(),
            p: pt.p.clone(),
        },
        f: f_text.into(),
        g: g_text.into(),
        hbar_order: series.truncation(),
        terms: series
            .terms()
            .iter()
            .enumerate()
            .map(|(k, t)| StarTerm {
                hbar_power: k,
                derivatives: low_derivatives(t, REPORTED_DERIVATIVES),
            })
            .collect(),
    })
}

fn fmt_c(c: [f64; 2]) -> String {
    let clean = |v: f64| if v.abs() < 5e-15 { 0.0 } else { v };
    let (re, im) = (clean(c[0]), clean(c[1]));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re:.10}"),
        (true, false) => format!("{im:.10}i"),
        _ => format!("{re:.10}{im:+.10}i"),
    }
}

fn derivative_label(key: &str, vars: &[String]) -> String {
    let parts: Vec<String> = key
        .split(',')
        .zip(vars)
        .filter_map(|(e, v)| match e.parse::<usize>().unwrap_or(0) {
            0 => None,
            1 => Some(format!("d{v}")),
            k => Some(format!("d{v}^{k}")),
        })
        .collect();
    if parts.is_empty() {
        "value".into()
    } else {
        parts.join(" ")
    }
}

impl StarReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "engine {}  model {}  x = {:?}  p = {:?}",
            self.engine, self.model, self.point.x, self.point.p
        );
        for t in &self.terms {
            let _ = writeln!(out, "hbar^{}:", t.hbar_power);
            let mut any = false;
            for (key, v) in &t.derivatives {
                if v[0].abs() < 5e-15 && v[1].abs() < 5e-15 {
                    continue;
                }
                any = true;
                let _ = writeln!(out, "  {:<24} {}", derivative_label(key, &self.variables), fmt_c(*v));
            }
            if !any {
                let _ = writeln!(out, "  0");
            }
        }
        out
    }
}

/// Coefficient jets by ħ power, then derivative multi-index; each jet is
/// flattened to its Taylor coefficients in graded order.
pub type OperatorTable = BTreeMap<String, BTreeMap<String, Vec<[f64; 2]>>>;

pub fn operator_table(op: &DiffOperator) -> OperatorTable {
    op.parts()
        .iter()
        .map(|(k, part)| {
            let row = part
                .terms()
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| {
                    let valid = c.valid_order();
                    let flat = c
                        .iter()
                        .filter(|(m, _)| m.degree() <= valid)
                        .map(|(_, v)| cpair(v))
                        .collect();
                    (multi_index_key(m), flat)
                })
                .collect();
            (format!("hbar^{k}"), row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorReport {
    pub model: String,
    pub variables: Vec<String>,
    pub point: Vec<f64>,
    pub degree: usize,
    pub a: f64,
    pub b: f64,
    pub closed_form: OperatorTable,
    pub s_order: OperatorTable,
    /// Coefficient-wise relative defect between the two operators.
    pub relative_defect: f64,
    pub coefficients: Vec<CoefficientDefect>,
    pub notes: Vec<String>,
}

/// Symbol source for the operator command.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    /// `½ g^{ij} p_i p_j` plus an optional potential expression.
    Natural(Option<String>),
    /// Phase-space expression, homogeneous in momenta plus an optional potential.
    Expression(String),
}

pub fn operator_report(
    model: &MetricModel,
    spec: &SymbolSpec,
    x: &[f64],
    order: usize,
    a: f64,
    b: f64,
) -> Result<OperatorReport, CliError> {
    let n = model.dimension();
    let pt = PhasePoint::new(x.to_vec(), vec![0.0; n]);
    check_point(model, &pt)?;
    let cf = ConnectionField::new(model, x, order)?;
    let symbol = match spec {
        SymbolSpec::Natural(v) => {
            let h = MomentumSymbol::natural(&cf);
            match v {
                Some(text) => h.with_potential(config_expression(model, text, x, order)?),
                None => h,
            }
        }
        SymbolSpec::Expression(text) => {
            let jet = phase_expression(model, text, &pt, order + MAX_SYMBOL_DEGREE)?;
            MomentumSymbol::from_phase_jet(&jet, n, order)?
        }
    };
    let s = quantization_morphism(&cf, a, b)?;
    let via_s = s_order(&symbol, &s, &cf)?;
    let closed = closed_form(&symbol, &cf, a, b)?;
    let mut notes = Vec::new();
    if matches!(spec, SymbolSpec::Natural(_)) {
        let b_spread = [0.0, 1.0]
            .iter()
            .map(|&bb| Ok(op_quadratic(&symbol, &cf, a, bb)?.relative_defect(&closed)?))
            .collect::<Result<Vec<f64>, CliError>>()?
            .into_iter()
            .fold(0.0, f64::max);
        notes.push(format!("b-independent: max difference over b in {{0, 1}} is {b_spread:.1e}"));
        let shift = closed.try_sub(&op_quadratic(&symbol, &cf, 1.0, b)?)?;
        let scalar = shift
            .coefficient(2, &MultiIndex::zero(n))
            .map(|c| c.value())
            .unwrap_or_default();
        notes.push(format!(
            "scalar hbar^2 term relative to a = 1: {}",
            fmt_c(cpair(scalar))
        ));
    }
    let mut variables = model.variables.clone();
    variables.truncate(n);
    Ok(OperatorReport {
        model: model.name.clone(),
        variables,
        point: x.to_vec(),
        degree: symbol.degree(),
        a,
        b,
        closed_form: operator_table(&closed),
        s_order: operator_table(&via_s),
        relative_defect: via_s.relative_defect(&closed)?,
        coefficients: via_s
            .coefficient_defects(&closed)?
            .into_iter()
            .filter(|c| c.defect > 1e-12)
            .collect(),
        notes,
    })
}

fn operator_lines(out: &mut String, title: &str, table: &OperatorTable, vars: &[String]) {
    let _ = writeln!(out, "{title}:");
    for (power, row) in table {
        for (key, flat) in row {
            let label = derivative_label(key, vars).replace("value", "1");
            let _ = writeln!(out, "  {power:<8} {label:<22} {}", fmt_c(flat[0]));
        }
    }
}

impl OperatorReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "model {}  x = {:?}  degree {}  a = {}  b = {}\n",
            self.model, self.point, self.degree, self.a, self.b
        );
        operator_lines(&mut out, "closed form (coefficient values)", &self.closed_form, &self.variables);
        operator_lines(&mut out, "S-ordered (coefficient values)", &self.s_order, &self.variables);
        let _ = writeln!(out, "relative defect {:.3e}", self.relative_defect);
        for c in &self.coefficients {
            let _ = writeln!(
                out,
                "  hbar^{} d[{}]: defect {:.3e}  closed {}  s-order {}",
                c.hbar_power,
                c.derivative,
                c.defect,
                fmt_c(c.rhs_value),
                fmt_c(c.lhs_value)
            );
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub model: String,
    pub variables: Vec<String>,
    pub point: PointRecord,
    /// `[a][b][c] = Γ^a_{bc}`
    pub christoffel: Vec<Vec<Vec<f64>>>,
    /// `[l][i][j][k] = R^l_{ijk}`
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    /// Lifted connection on phase space, `[a][b][c] = Γ̃^a_{bc}`, Darboux frame.
    pub lifted_darboux: Vec<Vec<Vec<f64>>>,
    /// Same in the adopted frame.
    pub lifted_adopted: Vec<Vec<Vec<f64>>>,
}

fn connection_values(c: &Connection) -> Vec<Vec<Vec<f64>>> {
    let d = c.dim();
    (0..d)
        .map(|a| (0..d).map(|b| (0..d).map(|k| c.get(a, b, k).value()).collect()).collect())
        .collect()
}

pub fn geometry_report(model: &MetricModel, pt: &PhasePoint, order: usize) -> Result<GeometryReport, CliError> {
    check_point(model, pt)?;
    let cf = ConnectionField::new(model, &pt.x, order)?;
    let n = cf.dimension();
    let darboux = lift_general(&cf, pt, Frame::Darboux)?;
    let adopted = lift_general(&cf, pt, Frame::Adopted)?;
    let mut variables = model.variables.clone();
    variables.extend(model.variables.iter().map(|v| format!("p_{v}")));
    Ok(GeometryReport {
        model: model.name.clone(),
        variables,
        point: PointRecord {
            x: pt.x.clone(),
            p: pt.p.clone(),
        },
        christoffel: connection_values(&cf.gamma),
        riemann: (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| (0..n).map(|j| (0..n).map(|k| cf.riemann.get(l, i, j, k).value()).collect()).collect())
                    .collect()
            })
            .collect(),
        ricci: cf.ricci.iter().map(|r| r.iter().map(Jet::value).collect()).collect(),
        lifted_darboux: connection_values(&darboux.conn),
        lifted_adopted: connection_values(&adopted.conn),
    })
}

fn clean(v: f64) -> Option<f64> {
    (v.abs() > 1e-13).then_some(v)
}

impl GeometryReport {
    pub fn table(&self) -> String {
        let n = self.ricci.len();
        let base = &self.variables[..n];
        let phase = &self.variables;
        let mut out = format!(
            "model {}  x = {:?}  p = {:?}\n",
            self.model, self.point.x, self.point.p
        );
        let mut section = |title: &str, lines: Vec<String>| {
            let _ = writeln!(out, "{title}:");
            if lines.is_empty() {
                let _ = writeln!(out, "  all zero");
            }
            for l in lines {
                let _ = writeln!(out, "  {l}");
            }
        };
        let conn_lines = |c: &Vec<Vec<Vec<f64>>>, names: &[String], sym: &str| {
            let mut lines = Vec::new();
            for (a, m) in c.iter().enumerate() {
                for (b, row) in m.iter().enumerate() {
                    for (k, &v) in row.iter().enumerate() {
                        if let Some(v) = clean(v) {
                            lines.push(format!("{sym}^{}_{{{} {}}} = {v:.10}", names[a], names[b], names[k]));
                        }
                    }
                }
            }
            lines
        };
        section("Christoffel symbols", conn_lines(&self.christoffel, base, "Gamma"));
        let mut lines = Vec::new();
        for (l, r1) in self.riemann.iter().enumerate() {
            for (i, r2) in r1.iter().enumerate() {
                for (j, r3) in r2.iter().enumerate() {
                    for (k, &v) in r3.iter().enumerate() {
                        if let (Some(v), true) = (clean(v), j < k) {
                            lines.push(format!(
                                "R^{}_{{{} {} {}}} = {v:.10}",
                                base[l], base[i], base[j], base[k]
                            ));
                        }
                    }
                }
            }
        }
        section("Riemann tensor (j < k)", lines);
        let mut lines = Vec::new();
        for (i, row) in self.ricci.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if let Some(v) = clean(v) {
                    lines.push(format!("R_{{{} {}}} = {v:.10}", base[i], base[k]));
                }
            }
        }
        section("Ricci tensor", lines);
        section("Lifted connection, Darboux frame", conn_lines(&self.lifted_darboux, phase, "Gamma~"));
        section("Lifted connection, adopted frame", conn_lines(&self.lifted_adopted, phase, "Gamma~"));
        out
    }
}
