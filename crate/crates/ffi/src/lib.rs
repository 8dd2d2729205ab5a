//! C ABI over `finsler-core`.
//!
//! Metrics live behind an opaque `FinslerMetric` handle. Every fallible call
//! returns a `FinslerStatus`; on failure the message is available from
//! `finsler_last_error_message` on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and released with
//! `finsler_string_free`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finsler_core::classify::{self, Verdict};
use finsler_core::dsl::{load_metric, MetricSpec};
use finsler_core::geometry::{fundamental_tensor, ConnectionBundle};
use finsler_core::sample::{SamplePlan, TangentSample};
use finsler_core::{cli, zoo, Error};

/// Opaque metric handle.
pub struct FinslerMetric {
    spec: MetricSpec,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinslerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Schema = 4,
    Validation = 5,
    Domain = 6,
    Numeric = 7,
    UnknownId = 8,
    InvalidArgument = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinslerVerdict {
    Holds = 0,
    Fails = 1,
    Borderline = 2,
}

/// Sampling plan, mirroring the CLI's `--seed --samples --eta-samples --radius`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinslerPlan {
    pub seed: u64,
    pub z_count: u32,
    pub eta_count: u32,
    pub radius: f64,
}

impl From<FinslerPlan> for SamplePlan {
    fn from(p: FinslerPlan) -> SamplePlan {
        SamplePlan {
            seed: p.seed,
            z_count: p.z_count as usize,
            eta_count: p.eta_count as usize,
            radius: p.radius,
        }
    }
}

impl From<Verdict> for FinslerVerdict {
    fn from(v: Verdict) -> FinslerVerdict {
        match v {
            Verdict::Holds => FinslerVerdict::Holds,
            Verdict::Fails => FinslerVerdict::Fails,
            Verdict::Borderline => FinslerVerdict::Borderline,
        }
    }
}

fn status_of(e: &Error) -> FinslerStatus {
    match e.root() {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::Arity { .. } => FinslerStatus::Parse,
        Error::Schema(_) | Error::Io(_) => FinslerStatus::Schema,
        Error::Validation { .. } => FinslerStatus::Validation,
        Error::Domain { .. } => FinslerStatus::Domain,
        Error::SingularMatrix(_) | Error::DegenerateDelta(_) => FinslerStatus::Numeric,
        Error::UnknownZooId(_) | Error::UnknownSuite(_) => FinslerStatus::UnknownId,
        _ => FinslerStatus::InvalidArgument,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(FinslerStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), format!("{}: {}", e.kind_name(), e))
    }
}

fn null(what: &str) -> Fail {
    Fail(FinslerStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FinslerStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FinslerStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FinslerStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FinslerStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn metric_arg<'a>(m: *const FinslerMetric) -> Result<&'a FinslerMetric, Fail> {
    m.as_ref().ok_or_else(|| null("metric"))
}

unsafe fn sample_arg(m: &FinslerMetric, sample: *const f64, len: usize) -> Result<TangentSample, Fail> {
    if sample.is_null() {
        return Err(null("sample"));
    }
    let expected = 4 * m.spec.dim;
    if len != expected {
        return Err(Fail(
            FinslerStatus::InvalidArgument,
            format!("sample has {len} reals, expected {expected}"),
        ));
    }
    let s = TangentSample::from_reals(std::slice::from_raw_parts(sample, len))?;
    if s.eta_is_zero() {
        return Err(Error::Domain { expr: "eta = 0".into() }.into());
    }
    Ok(s)
}

fn plan_arg(plan: FinslerPlan, tol: Option<f64>) -> Result<SamplePlan, Fail> {
    let bad = |msg: &str| Fail(FinslerStatus::InvalidArgument, msg.to_string());
    if plan.z_count == 0 || plan.eta_count == 0 {
        return Err(bad("plan counts must be at least 1"));
    }
    if !(plan.radius > 0.0) {
        return Err(bad("plan radius must be positive"));
    }
    if tol.is_some_and(|t| !(t > 0.0)) {
        return Err(bad("tolerance must be positive"));
    }
    Ok(plan.into())
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> Result<(), Fail> {
    let c = CString::new(text).map_err(|_| Fail(FinslerStatus::Panic, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_metric(out: *mut *mut FinslerMetric, spec: MetricSpec) {
    *out = Box::into_raw(Box::new(FinslerMetric { spec }));
}

/// Default plan: seed 42, 8 base points, 8 directions each, radius 0.5.
#[no_mangle]
pub extern "C" fn finsler_plan_default() -> FinslerPlan {
    let p = SamplePlan::default();
    FinslerPlan {
        seed: p.seed,
        z_count: p.z_count as u32,
        eta_count: p.eta_count as u32,
        radius: p.radius,
    }
}

/// Parses and validates a metric JSON document.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_from_json(json: *const c_char, out: *mut *mut FinslerMetric) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec = load_metric(str_arg(json, "json")?)?;
        put_metric(out, spec);
        Ok(())
    })
}

/// Builds a zoo metric with default parameters.
///
/// # Safety
/// `id` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_from_zoo(id: *const c_char, out: *mut *mut FinslerMetric) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec = zoo::make_default(str_arg(id, "id")?)?;
        put_metric(out, spec);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_free(m: *mut FinslerMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Complex dimension of the metric, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_dimension(m: *const FinslerMetric) -> usize {
    m.as_ref().map_or(0, |m| m.spec.dim)
}

/// The metric re-serialized as JSON.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_to_json(m: *const FinslerMetric, out: *mut *mut c_char) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, metric_arg(m)?.spec.to_json())
    })
}

/// Full classification report as JSON.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_classify_json(
    m: *const FinslerMetric,
    plan: FinslerPlan,
    tol: f64,
    out: *mut *mut c_char,
) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = classify::classify(&metric_arg(m)?.spec, &plan_arg(plan, Some(tol))?, tol)?;
        put_string(out, report.to_json())
    })
}

/// Writes one verdict per class into `verdicts` (length `len`, at least 7),
/// in the order kahler, weakly_kahler, landsberg, g_landsberg,
/// strong_landsberg, generalized_berwald, complex_berwald. `inconsistent`
/// is set to 1 when some cross-check disagrees.
///
/// # Safety
/// `m` must be a live handle; `verdicts` must hold `len` elements;
/// `inconsistent` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn finsler_classify_lattice(
    m: *const FinslerMetric,
    plan: FinslerPlan,
    tol: f64,
    verdicts: *mut FinslerVerdict,
    len: usize,
    inconsistent: *mut i32,
) -> FinslerStatus {
    guard(|| {
        if verdicts.is_null() {
            return Err(null("verdicts"));
        }
        if len < zoo::CLASSES.len() {
            return Err(Fail(
                FinslerStatus::BufferTooSmall,
                format!("need {} verdict slots, got {len}", zoo::CLASSES.len()),
            ));
        }
        let report = classify::classify(&metric_arg(m)?.spec, &plan_arg(plan, Some(tol))?, tol)?;
        let out = std::slice::from_raw_parts_mut(verdicts, len);
        for (slot, class) in out.iter_mut().zip(zoo::CLASSES) {
            *slot = report.class(class).unwrap_or(Verdict::Borderline).into();
        }
        if let Some(flag) = inconsistent.as_mut() {
            *flag = report.inconsistent() as i32;
        }
        Ok(())
    })
}

/// Worst residual of an identity suite over the plan, ignoring
/// informational identities.
///
/// # Safety
/// `m` must be a live handle; `suite` nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_check_suite(
    m: *const FinslerMetric,
    suite: *const c_char,
    plan: FinslerPlan,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let rows = cli::check_suite(&metric_arg(m)?.spec, str_arg(suite, "suite")?, &plan_arg(plan, None)?)?;
        *out = rows
            .iter()
            .flat_map(|(_, r)| r.iter().filter(|x| !x.informational).map(|x| x.residual))
            .fold(0.0, f64::max);
        Ok(())
    })
}

/// `g_{i j̄}` at one sample. `sample` holds 4n reals
/// (Re z1, Im z1, ..., Re eta1, Im eta1, ...); `g` receives 2n² reals,
/// row-major with interleaved real and imaginary parts.
///
/// # Safety
/// `m` must be a live handle; `sample` must hold `sample_len` doubles and
/// `g` must hold `g_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn finsler_fundamental_tensor(
    m: *const FinslerMetric,
    sample: *const f64,
    sample_len: usize,
    g: *mut f64,
    g_len: usize,
) -> FinslerStatus {
    guard(|| {
        let m = metric_arg(m)?;
        let s = sample_arg(m, sample, sample_len)?;
        if g.is_null() {
            return Err(null("g"));
        }
        let n = m.spec.dim;
        if g_len < 2 * n * n {
            return Err(Fail(
                FinslerStatus::BufferTooSmall,
                format!("need {} doubles, got {g_len}", 2 * n * n),
            ));
        }
        let t = fundamental_tensor(&m.spec.assemble_l(), &s)?;
        let out = std::slice::from_raw_parts_mut(g, g_len);
        for (k, c) in t.tensor().data().iter().enumerate() {
            out[2 * k] = c.re;
            out[2 * k + 1] = c.im;
        }
        Ok(())
    })
}

/// Every connection coefficient at one sample, as JSON.
///
/// # Safety
/// `m` must be a live handle; `sample` must hold `sample_len` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_json(
    m: *const FinslerMetric,
    sample: *const f64,
    sample_len: usize,
    out: *mut *mut c_char,
) -> FinslerStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = metric_arg(m)?;
        let s = sample_arg(m, sample, sample_len)?;
        let bundle = ConnectionBundle::compute(&m.spec.assemble_l(), &s)?;
        put_string(out, bundle.to_json().to_string())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn finsler_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn finsler_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn finsler_status_name(status: FinslerStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FinslerStatus::Ok => c"ok",
        FinslerStatus::NullPointer => c"null pointer",
        FinslerStatus::InvalidUtf8 => c"invalid utf-8",
        FinslerStatus::Parse => c"parse error",
        FinslerStatus::Schema => c"schema error",
        FinslerStatus::Validation => c"validation error",
        FinslerStatus::Domain => c"domain error",
        FinslerStatus::Numeric => c"numeric error",
        FinslerStatus::UnknownId => c"unknown id",
        FinslerStatus::InvalidArgument => c"invalid argument",
        FinslerStatus::BufferTooSmall => c"buffer too small",
        FinslerStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
