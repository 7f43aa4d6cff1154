//! C ABI over the `natstar` library.
//!
//! Every fallible function returns an [`NsStatus`]; on failure a message is
//! available from [`ns_last_error`] on the same thread. Handles are opaque and
//! must be released with their `_free` function. Strings returned as
//! `char *` are owned by the caller and released with [`ns_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use natstar::checks::{run_checks, CheckError, Report, RunConfig};
use natstar::cli::{geometry_report, star_report, CliError, Engine};
use natstar::geometry::{catalog, GeometryError, MetricModel, ModelSpec, PhasePoint};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    /// Null pointer, bad length, unknown engine, invalid configuration.
    InvalidArgument = 1,
    /// Malformed expression, JSON or TOML.
    ParseError = 2,
    /// Point outside the chart, singular metric, curved model for a flat-only engine.
    DomainError = 3,
    /// Unknown catalog model or invalid model description.
    ModelError = 4,
    /// A check report was produced but at least one check failed.
    CheckFailed = 5,
    /// Panic or other internal failure.
    Internal = 6,
}

pub const NS_ENGINE_MOYAL: u32 = 0;
pub const NS_ENGINE_CURVILINEAR: u32 = 1;
pub const NS_ENGINE_COVARIANT: u32 = 2;
pub const NS_ENGINE_FAMILY_A: u32 = 3;
pub const NS_ENGINE_FEDOSOV_LIKE: u32 = 4;

/// Jet order used for geometry and star evaluations.
pub const NS_JET_ORDER: usize = 8;

/// Opaque metric model.
pub struct NsModel(MetricModel);

/// Opaque check report.
pub struct NsReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(NsStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(NsStatus::InvalidArgument, msg.into())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        let status = match &e {
            GeometryError::UnknownModel(_) | GeometryError::InvalidModel(_) => NsStatus::ModelError,
            GeometryError::Expr { .. } => NsStatus::ParseError,
            GeometryError::PointDimension { .. } => NsStatus::InvalidArgument,
            _ => NsStatus::DomainError,
        };
        Failure(status, e.to_string())
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Model(g) => g.into(),
            CheckError::Config(m) => Failure(NsStatus::InvalidArgument, m),
            CheckError::NotFlat(m) => Failure(NsStatus::DomainError, m),
        }
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Geometry(g) => g.into(),
            CliError::Check(c) => c.into(),
            CliError::Parse(m) => Failure(NsStatus::ParseError, m),
            other => Failure(NsStatus::DomainError, other.to_string()),
        }
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<NsStatus, Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == NsStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            NsStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{what} is not UTF-8")))
}

unsafe fn model<'a>(p: *const NsModel) -> Result<&'a MetricModel, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| Failure::invalid("model handle is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `values` into `out`, which must hold at least `values.len()` doubles.
unsafe fn write_out(values: &[f64], out: *mut f64, out_len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::invalid("output buffer is null"));
    }
    if out_len < values.len() {
        return Err(Failure::invalid(format!(
            "output buffer holds {out_len} values, {} needed",
            values.len()
        )));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::invalid("output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::invalid("output string pointer is null"));
    }
    *out = CString::new(s).map_err(|_| Failure::invalid("string contains NUL"))?.into_raw();
    Ok(())
}

fn engine(code: u32) -> Result<Engine, Failure> {
    Ok(match code {
        NS_ENGINE_MOYAL => Engine::Moyal,
        NS_ENGINE_CURVILINEAR => Engine::Curvilinear,
        NS_ENGINE_COVARIANT => Engine::Covariant,
        NS_ENGINE_FAMILY_A => Engine::FamilyA,
        NS_ENGINE_FEDOSOV_LIKE => Engine::FedosovLike,
        other => return Err(Failure::invalid(format!("unknown engine code {other}"))),
    })
}

unsafe fn phase_point(m: &MetricModel, x: *const f64, p: *const f64, n: usize) -> Result<PhasePoint, Failure> {
    if n != m.dimension() {
        return Err(Failure::invalid(format!("point has {n} coordinates, model dimension is {}", m.dimension())));
    }
    let x = slice(x, n, "x")?.to_vec();
    let p = if p.is_null() { vec![0.0; n] } else { slice(p, n, "p")?.to_vec() };
    Ok(PhasePoint { x, p })
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Looks up a catalog model by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_model_catalog(name: *const c_char, out: *mut *mut NsModel) -> NsStatus {
    guard(|| {
        let m = catalog(text(name, "name")?)?;
        put(out, NsModel(m))?;
        Ok(NsStatus::Ok)
    })
}

/// Builds a model from a JSON or TOML description with the fields
/// `name`, `dimension`, `variables`, `metric`, `sample_box` and the optional
/// `to_cartesian`, `flat`, `momentum_box`.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_model_from_config(config: *const c_char, out: *mut *mut NsModel) -> NsStatus {
    guard(|| {
        let src = text(config, "config")?;
        let spec: ModelSpec = if src.trim_start().starts_with('{') {
            serde_json::from_str(src).map_err(|e| Failure(NsStatus::ParseError, e.to_string()))?
        } else {
            toml::from_str(src).map_err(|e| Failure(NsStatus::ParseError, e.to_string()))?
        };
        put(out, NsModel(MetricModel::from_spec(&spec)?))?;
        Ok(NsStatus::Ok)
    })
}

/// # Safety
/// `model` must come from `ns_model_*` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_model_free(model: *mut NsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Configuration-space dimension N, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_model_dimension(model: *const NsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dimension())
}

/// Christoffel symbols at `x` (length `n`), written as `out[(a*n + b)*n + c] = Γ^a_{bc}`.
/// `out_len` must be at least `n³`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ns_geometry_christoffel(
    model: *const NsModel,
    x: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> NsStatus {
    guard(|| {
        let m = self::model(model)?;
        let pt = phase_point(m, x, ptr::null(), n)?;
        let rep = geometry_report(m, &pt, NS_JET_ORDER)?;
        let flat: Vec<f64> = rep.christoffel.iter().flatten().flatten().copied().collect();
        write_out(&flat, out, out_len)?;
        Ok(NsStatus::Ok)
    })
}

/// Ricci tensor at `x`, row major, `out_len >= n²`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ns_geometry_ricci(
    model: *const NsModel,
    x: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> NsStatus {
    guard(|| {
        let m = self::model(model)?;
        let pt = phase_point(m, x, ptr::null(), n)?;
        let rep = geometry_report(m, &pt, NS_JET_ORDER)?;
        let flat: Vec<f64> = rep.ricci.iter().flatten().copied().collect();
        write_out(&flat, out, out_len)?;
        Ok(NsStatus::Ok)
    })
}

/// Star-product of two phase-space expressions at `(x, p)`.
///
/// Writes the value of each ħ^k coefficient at the point as `out[2k] + i·out[2k+1]`
/// for `k = 0..=K`, where K is `hbar_order` clamped to what the engine defines,
/// and stores K + 1 in `*out_terms`. `p` may be null for zero momenta.
/// `out_len` must be at least `2 * (hbar_order + 1)`.
///
/// # Safety
/// Pointers must be valid for the stated lengths; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ns_star(
    model: *const NsModel,
    engine_code: u32,
    f: *const c_char,
    g: *const c_char,
    x: *const f64,
    p: *const f64,
    n: usize,
    hbar_order: usize,
    a: f64,
    out: *mut f64,
    out_len: usize,
    out_terms: *mut usize,
) -> NsStatus {
    guard(|| {
        let m = self::model(model)?;
        let eng = engine(engine_code)?;
        let (f, g) = (text(f, "f")?, text(g, "g")?);
        let pt = phase_point(m, x, p, n)?;
        let rep = star_report(m, eng, f, g, &pt, NS_JET_ORDER, hbar_order, a)?;
        let origin = vec!["0"; 2 * n].join(",");
        let values: Vec<f64> = rep
            .terms
            .iter()
            .flat_map(|t| t.derivatives.get(&origin).copied().unwrap_or([0.0, 0.0]))
            .collect();
        write_out(&values, out, out_len)?;
        if !out_terms.is_null() {
            *out_terms = rep.terms.len();
        }
        Ok(NsStatus::Ok)
    })
}

/// Like [`ns_star`] but returns the full report (derivatives up to degree 2) as JSON.
///
/// # Safety
/// Pointers must be valid; `out_json` receives a string to release with `ns_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ns_star_json(
    model: *const NsModel,
    engine_code: u32,
    f: *const c_char,
    g: *const c_char,
    x: *const f64,
    p: *const f64,
    n: usize,
    hbar_order: usize,
    a: f64,
    out_json: *mut *mut c_char,
) -> NsStatus {
    guard(|| {
        let m = self::model(model)?;
        let eng = engine(engine_code)?;
        let pt = phase_point(m, x, p, n)?;
        let rep = star_report(m, eng, text(f, "f")?, text(g, "g")?, &pt, NS_JET_ORDER, hbar_order, a)?;
        let json = serde_json::to_string(&rep).map_err(|e| Failure(NsStatus::Internal, e.to_string()))?;
        put_string(out_json, json)?;
        Ok(NsStatus::Ok)
    })
}

/// Runs the checks described by a TOML or JSON run configuration (same format
/// as the CLI's `--config`). Returns `NS_STATUS_OK` when every check passed,
/// `NS_STATUS_CHECK_FAILED` when some failed; in both cases `*out` receives the report.
///
/// # Safety
/// `config` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_check_run(config: *const c_char, out: *mut *mut NsReport) -> NsStatus {
    guard(|| {
        let cfg = RunConfig::from_text(text(config, "config")?).map_err(|e| match e {
            CheckError::Config(m) => Failure(NsStatus::ParseError, m),
            other => other.into(),
        })?;
        let report = run_checks(&cfg)?;
        let passed = report.passed;
        put(out, NsReport(report))?;
        Ok(if passed { NsStatus::Ok } else { NsStatus::CheckFailed })
    })
}

/// 1 if every check passed, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_report_passed(report: *const NsReport) -> c_int {
    report.as_ref().map_or(-1, |r| r.0.passed as c_int)
}

/// The report as JSON; release with `ns_string_free`. Null for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_report_json(report: *const NsReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `report` must come from `ns_check_run` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_report_free(report: *mut NsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
