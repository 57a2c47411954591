//! C interface to the `apollonian` library.
//!
//! Stores are opaque handles created by `ap_store_generate` or
//! `ap_store_load` and released with `ap_store_free`. Every fallible call
//! returns an [`ApStatus`]; on failure the message is available from
//! `ap_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use apollonian::cli_io::ExperimentConfig;
use apollonian::conformal_metrics::{ConformalMetric, Region};
use apollonian::counting_asymptotics::{count_curve, fit_curvature_growth};
use apollonian::group_orbits::{poincare_partial, GroupPresentation};
use apollonian::packing_generator::{generate, load, save, GenerationCutoff, PackingSpec, PackingStore};
use apollonian::residual_set::estimate_dimension;
use apollonian::{Error, ErrorCategory};

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Math = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque packing store.
pub struct ApStore(PackingStore);

/// Inversive coordinates of one circle: curvature, co-curvature and
/// curvature times the center.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ApCircle {
    pub curvature: f64,
    pub cocurvature: f64,
    pub bx: f64,
    pub by: f64,
}

/// Power-law fit `N ~ C x^exponent`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ApFit {
    pub exponent: f64,
    pub stderr: f64,
    pub log_constant: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_points: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(ApStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.category() {
            ErrorCategory::Config => ApStatus::Config,
            ErrorCategory::Math => ApStatus::Math,
            ErrorCategory::Io => ApStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ApStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (ApStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (ApStatus::Panic, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn null(what: &str) -> Failure {
    Failure(ApStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ApStatus::InvalidArgument, msg.into())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn store<'a>(p: *const ApStore) -> Result<&'a PackingStore, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("store"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn spec_for(packing: &str, exact: bool) -> Result<PackingSpec, Failure> {
    let arithmetic = if exact { "exact" } else { "float" };
    let cfg = ExperimentConfig::parse(
        "",
        &[
            ("packing".into(), packing.into()),
            ("arithmetic".into(), arithmetic.into()),
        ],
    )?;
    Ok(cfg.spec()?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns its full length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ap_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Generates the packing named `packing` (`bounded`, `strip`,
/// `curvatures:b1,b2,b3,b4`, `sphere`, ...) up to curvature `max_curvature`.
///
/// # Safety
/// `packing` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_generate(
    packing: *const c_char,
    exact: bool,
    max_curvature: f64,
    out_store: *mut *mut ApStore,
) -> ApStatus {
    guard(|| {
        let out_store = out(out_store, "out_store")?;
        let spec = spec_for(text(packing, "packing")?, exact)?;
        let s = generate(&spec, GenerationCutoff::MaxCurvature(max_curvature))?;
        *out_store = Box::into_raw(Box::new(ApStore(s)));
        Ok(())
    })
}

/// Reads a packing cache file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_load(path: *const c_char, out_store: *mut *mut ApStore) -> ApStatus {
    guard(|| {
        let out_store = out(out_store, "out_store")?;
        let s = load(Path::new(text(path, "path")?))?;
        *out_store = Box::into_raw(Box::new(ApStore(s)));
        Ok(())
    })
}

/// Writes a packing cache file.
///
/// # Safety
/// `s` must be a live store handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ap_store_save(s: *const ApStore, path: *const c_char) -> ApStatus {
    guard(|| {
        save(store(s)?, Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// Releases a store; null is ignored.
///
/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ap_store_free(s: *mut ApStore) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of records in the store.
///
/// # Safety
/// `s` must be a live store handle; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_len(s: *const ApStore, out_len: *mut usize) -> ApStatus {
    guard(|| {
        *out(out_len, "out_len")? = store(s)?.len();
        Ok(())
    })
}

/// Record `index` of a circle store in canonical order.
///
/// # Safety
/// `s` must be a live store handle; `out_circle` writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_circle(s: *const ApStore, index: usize, out_circle: *mut ApCircle) -> ApStatus {
    guard(|| {
        let st = store(s)?;
        let o = out(out_circle, "out_circle")?;
        if index >= st.len() {
            return Err(invalid(format!("index {index} out of range for {} records", st.len())));
        }
        let c = st.circle(index).ok_or_else(|| invalid("sphere stores have no circles"))?;
        *o = ApCircle {
            curvature: c.v[0],
            cocurvature: c.v[1],
            bx: c.v[2],
            by: c.v[3],
        };
        Ok(())
    })
}

/// `N_t`: circles of `f`-volume above `t` meeting `region`. Sets
/// `out_exact` to whether `t` lies in the store's validity window.
///
/// # Safety
/// `s` must be a live store handle; strings NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_count(
    s: *const ApStore,
    metric: *const c_char,
    region: *const c_char,
    t: f64,
    out_count: *mut u64,
    out_exact: *mut bool,
) -> ApStatus {
    guard(|| {
        let st = store(s)?;
        let m: ConformalMetric = text(metric, "metric")?.parse()?;
        let r: Region = text(region, "region")?.parse()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("threshold must be positive, got {t}")));
        }
        let curve = count_curve(st, &m, &r, &[t])?;
        *out(out_count, "out_count")? = curve.points[0].1;
        *out(out_exact, "out_exact")? = t >= curve.validity.0 && t <= curve.validity.1;
        Ok(())
    })
}

/// Growth exponent of `#{b <= x}` over `[x_lo, x_hi]`.
///
/// # Safety
/// `s` must be a live store handle; `out_fit` writable.
#[no_mangle]
pub unsafe extern "C" fn ap_store_fit_curvature_growth(
    s: *const ApStore,
    x_lo: f64,
    x_hi: f64,
    per_decade: u32,
    out_fit: *mut ApFit,
) -> ApStatus {
    guard(|| {
        let f = fit_curvature_growth(store(s)?, x_lo, x_hi, per_decade)?;
        *out(out_fit, "out_fit")? = ApFit {
            exponent: f.exponent,
            stderr: f.stderr,
            log_constant: f.log_constant,
            x_lo: f.window.0,
            x_hi: f.window.1,
            n_points: f.n_points,
        };
        Ok(())
    })
}

/// Covering-sum dimension of the residual set in `region` from refinement
/// levels `level_lo..=level_hi`.
///
/// # Safety
/// Strings must be NUL-terminated; `out_dimension` writable.
#[no_mangle]
pub unsafe extern "C" fn ap_dimension_estimate(
    packing: *const c_char,
    region: *const c_char,
    level_lo: u32,
    level_hi: u32,
    out_dimension: *mut f64,
) -> ApStatus {
    guard(|| {
        if level_lo > level_hi {
            return Err(invalid(format!("empty level range {level_lo}..={level_hi}")));
        }
        let spec = spec_for(text(packing, "packing")?, true).or_else(|_| spec_for(text(packing, "packing")?, false))?;
        let r: Region = text(region, "region")?.parse()?;
        let levels: Vec<u32> = (level_lo..=level_hi).collect();
        *out(out_dimension, "out_dimension")? = estimate_dimension(&spec, &r, &levels)?.dimension;
        Ok(())
    })
}

/// Partial Poincaré sum over reduced words of length at most `length`.
///
/// # Safety
/// `packing` must be NUL-terminated; `out_sum` writable.
#[no_mangle]
pub unsafe extern "C" fn ap_poincare_partial(
    packing: *const c_char,
    s: f64,
    length: u32,
    out_sum: *mut f64,
) -> ApStatus {
    guard(|| {
        let name = text(packing, "packing")?;
        let spec = spec_for(name, true).or_else(|_| spec_for(name, false))?;
        let sum = if spec.dim() == 3 {
            poincare_partial(&GroupPresentation::<5>::from_sphere_spec(&spec)?, s, length)?
        } else {
            poincare_partial(&GroupPresentation::<4>::from_spec(&spec)?, s, length)?
        };
        *out(out_sum, "out_sum")? = sum;
        Ok(())
    })
}
