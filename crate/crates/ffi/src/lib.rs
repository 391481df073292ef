//! C ABI over the `mixcurv` engine.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`MixcurvStatus`]; on failure a message is kept per thread and can be read
//! with [`mixcurv_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mixcurv::catalog::evaluate_pointwise;
use mixcurv::error::GeomError;
use mixcurv::invariants::invariants;
use mixcurv::point::PointData;
use mixcurv::report::{run_check, RunConfig, RunReport};
use mixcurv::scenario::{load_scenario, Scenario};
use mixcurv::zoo::{build_preset, parse_param_pairs};

/// Status codes. `MIXCURV_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixcurvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Expression syntax or unknown identifier.
    Parse = 3,
    /// Malformed scenario document or chart.
    Schema = 4,
    UnknownPreset = 5,
    UnknownIdentity = 6,
    /// A hypothesis of the identity fails at the point.
    Precondition = 7,
    NotClosed = 8,
    /// Degenerate metric or distribution, non-finite value.
    Numeric = 9,
    /// Wrong vector length or other shape problem.
    InvalidArgument = 10,
    Io = 11,
    Panic = 12,
}

/// Opaque scenario handle.
pub struct MixcurvScenario(Scenario);

/// Opaque run report handle.
pub struct MixcurvReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &GeomError) -> MixcurvStatus {
    use GeomError::*;
    match e {
        Syntax { .. } | UnknownIdentifier(_) => MixcurvStatus::Parse,
        InvalidChart(_) | Schema { .. } | MisdeclaredClass { .. } => MixcurvStatus::Schema,
        UnknownPreset(_) => MixcurvStatus::UnknownPreset,
        UnknownIdentity(_) => MixcurvStatus::UnknownIdentity,
        Precondition { .. } | NotCodimensionOne(_) => MixcurvStatus::Precondition,
        NotClosed => MixcurvStatus::NotClosed,
        DegenerateMetric { .. } | DegenerateDistribution { .. } | NonFinite { .. } => MixcurvStatus::Numeric,
        WrongKind { .. } | UnsupportedLeaf(_) | Quadrature(_) | EmptySample | RankMismatch(_) => {
            MixcurvStatus::InvalidArgument
        }
        AtNode { source, .. } => status_of(source),
        Io(_) => MixcurvStatus::Io,
    }
}

struct Failure(MixcurvStatus, String);

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records failures and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MixcurvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MixcurvStatus::Ok,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MixcurvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MixcurvStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(MixcurvStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn point<'a>(x: *const f64, len: usize, scn: &Scenario) -> Result<&'a [f64], Failure> {
    if x.is_null() {
        return Err(null("x"));
    }
    if len != scn.dim() {
        return Err(Failure(
            MixcurvStatus::InvalidArgument,
            format!("point has {len} coordinates, scenario dimension is {}", scn.dim()),
        ));
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn scenario<'a>(h: *const MixcurvScenario) -> Result<&'a Scenario, Failure> {
    h.as_ref().map(|s| &s.0).ok_or_else(|| null("scenario"))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = v;
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mixcurv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mixcurv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a preset. `params` is NULL or a comma-separated `k=v` list.
///
/// # Safety
/// `name` and `params` must be NULL or NUL-terminated strings; `out` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_scenario_from_preset(
    name: *const c_char,
    params: *const c_char,
    out: *mut *mut MixcurvScenario,
) -> MixcurvStatus {
    guard(|| {
        let name = text(name, "name")?;
        let pairs: Vec<String> = if params.is_null() {
            Vec::new()
        } else {
            text(params, "params")?
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        };
        let scn = build_preset(name, &parse_param_pairs(&pairs)?)?;
        put(out, Box::into_raw(Box::new(MixcurvScenario(scn))), "out")
    })
}

/// Builds a scenario from a JSON document.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_scenario_from_json(json: *const c_char, out: *mut *mut MixcurvScenario) -> MixcurvStatus {
    guard(|| {
        let scn = load_scenario(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(MixcurvScenario(scn))), "out")
    })
}

/// # Safety
/// `h` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_scenario_free(h: *mut MixcurvScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Total dimension and rank of `D⊤`.
///
/// # Safety
/// `h` must be a live scenario handle; outputs must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_scenario_dims(
    h: *const MixcurvScenario,
    out_dim: *mut usize,
    out_n: *mut usize,
) -> MixcurvStatus {
    guard(|| {
        let s = scenario(h)?;
        put(out_dim, s.dim(), "out_dim")?;
        put(out_n, s.n(), "out_n")
    })
}

/// `S_mix` and `S̄_mix` at a point.
///
/// # Safety
/// `x` must point to `len` doubles; outputs must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_mixed_scalar_curvatures(
    h: *const MixcurvScenario,
    x: *const f64,
    len: usize,
    out_s_mix: *mut f64,
    out_bar_s_mix: *mut f64,
) -> MixcurvStatus {
    guard(|| {
        let s = scenario(h)?;
        let x = point(x, len, s)?;
        let inv = invariants(&PointData::new(s, x)?);
        put(out_s_mix, inv.s_mix, "out_s_mix")?;
        put(out_bar_s_mix, inv.bar_s_mix, "out_bar_s_mix")
    })
}

/// Both sides of an identity's pointwise form at `x`.
///
/// # Safety
/// `id` must be a NUL-terminated string, `x` must point to `len` doubles;
/// outputs must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_evaluate_pointwise(
    h: *const MixcurvScenario,
    id: *const c_char,
    x: *const f64,
    len: usize,
    out_lhs: *mut f64,
    out_rhs: *mut f64,
) -> MixcurvStatus {
    guard(|| {
        let s = scenario(h)?;
        let id = text(id, "id")?;
        let x = point(x, len, s)?;
        let r = evaluate_pointwise(s, id, x)?;
        put(out_lhs, r.lhs, "out_lhs")?;
        put(out_rhs, r.rhs, "out_rhs")
    })
}

/// Runs the identity suite. `identity` NULL means all identities.
///
/// # Safety
/// `h` must be a live scenario handle, `identity` NULL or a NUL-terminated
/// string, `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_check(
    h: *const MixcurvScenario,
    identity: *const c_char,
    grid: usize,
    tol: f64,
    out: *mut *mut MixcurvReport,
) -> MixcurvStatus {
    guard(|| {
        let s = scenario(h)?;
        let identity = if identity.is_null() {
            None
        } else {
            Some(text(identity, "identity")?.to_string())
        };
        let cfg = RunConfig {
            identity,
            grid,
            tol,
            ..Default::default()
        };
        let r = run_check(s, &cfg)?;
        put(out, Box::into_raw(Box::new(MixcurvReport(r))), "out")
    })
}

/// 1 when every evaluated identity passed, 0 otherwise, -1 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_report_passed(r: *const MixcurvReport) -> c_int {
    match r.as_ref() {
        Some(r) => c_int::from(r.0.passed()),
        None => -1,
    }
}

/// The report as JSON, newly allocated; release with [`mixcurv_string_free`].
/// NULL on a NULL handle.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_report_json(r: *const MixcurvReport) -> *mut c_char {
    match r.as_ref() {
        Some(r) => CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `r` must be NULL or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_report_free(r: *mut MixcurvReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixcurv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
