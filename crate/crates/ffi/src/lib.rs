//! C ABI for `spade-core`.
//!
//! Every fallible function returns a [`SpadeStatus`] and writes results
//! through out-pointers. On failure, [`spade_last_error`] describes the most
//! recent error on the calling thread. Models are opaque handles created with
//! [`spade_model_new`] and released with [`spade_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spade_core::inference::{
    crlb, fi_total_1d, fi_total_2d, mle_estimate, model_fisher, sample_counts, CountMatrix, SearchBounds,
};
use spade_core::model::{CalibrationModel, ForwardModel, ModeSpace};
use spade_core::overlap::{displaced_overlap, Sign};
use spade_core::source::{schmidt_number, SchmidtModel};
use spade_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpadeStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    ShapeMismatch = 3,
    Numerical = 4,
    Panic = 5,
}

/// Maximum-likelihood estimate. Flags are 0 or 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpadeEstimate {
    pub d_hat: f64,
    pub delta_hat: f64,
    pub log_likelihood: f64,
    pub crlb_variance: f64,
    pub boundary_hit: u8,
    pub flat: u8,
    pub converged: u8,
}

/// Opaque mode-sorting model.
pub struct SpadeModel {
    inner: spade_core::model::SpadeModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> SpadeStatus {
    match e {
        Error::InvalidArgument(_) | Error::TruncationCap { .. } | Error::QuadratureOrder { .. } | Error::Parse(_) => {
            SpadeStatus::InvalidArgument
        }
        Error::ShapeMismatch { .. } => SpadeStatus::ShapeMismatch,
        _ => SpadeStatus::Numerical,
    }
}

struct Failure(SpadeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpadeStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpadeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpadeStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            SpadeStatus::Panic
        }
    }
}

unsafe fn target<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn model_ref<'a>(m: *const SpadeModel) -> Result<&'a SpadeModel, Failure> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn check_len(expected: usize, actual: usize) -> Result<(), Failure> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual }.into());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spade_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn spade_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_schmidt_number(gamma: f64, out: *mut f64) -> SpadeStatus {
    guard(|| {
        let out = target(out, "out")?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Failure(SpadeStatus::InvalidArgument, format!("gamma must be positive, got {gamma}")));
        }
        *out = schmidt_number(gamma);
        Ok(())
    })
}

/// Small-separation information summed over all modes, split into branches.
///
/// # Safety
/// `up` and `down` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_fi_total_2d(gamma: f64, up: *mut f64, down: *mut f64) -> SpadeStatus {
    guard(|| {
        let (up, down) = (target(up, "up")?, target(down, "down")?);
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Failure(SpadeStatus::InvalidArgument, format!("gamma must be positive, got {gamma}")));
        }
        let t = fi_total_2d(gamma);
        (*up, *down) = (t.up, t.down);
        Ok(())
    })
}

/// As [`spade_fi_total_2d`] restricted to the ground mode along y.
///
/// # Safety
/// `up` and `down` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_fi_total_1d(gamma: f64, up: *mut f64, down: *mut f64) -> SpadeStatus {
    guard(|| {
        let (up, down) = (target(up, "up")?, target(down, "down")?);
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Failure(SpadeStatus::InvalidArgument, format!("gamma must be positive, got {gamma}")));
        }
        let t = fi_total_1d(gamma);
        (*up, *down) = (t.up, t.down);
        Ok(())
    })
}

/// Variance bound `2/(n sqrt(K))` on the total separation.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_crlb(schmidt_number: f64, photons: f64, out: *mut f64) -> SpadeStatus {
    guard(|| {
        let out = target(out, "out")?;
        if !(schmidt_number >= 1.0 && photons > 0.0) {
            return Err(Failure(
                SpadeStatus::InvalidArgument,
                format!("need K >= 1 and photons > 0, got {schmidt_number} and {photons}"),
            ));
        }
        *out = crlb(schmidt_number, photons);
        Ok(())
    })
}

/// Overlap of mode `m` with mode `n` displaced by `sign * d` (`sign` is +1 or -1).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_displaced_overlap(m: usize, n: usize, d: f64, sign: i32, out: *mut f64) -> SpadeStatus {
    guard(|| {
        let out = target(out, "out")?;
        let sign = match sign {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            s => return Err(Failure(SpadeStatus::InvalidArgument, format!("sign must be +1 or -1, got {s}"))),
        };
        if !d.is_finite() {
            return Err(Failure(SpadeStatus::InvalidArgument, "d must be finite".into()));
        }
        *out = displaced_overlap(m, n, d, sign);
        Ok(())
    })
}

/// Creates a model over the mode grid `k <= max_k`, `l <= max_l` for both photons.
///
/// # Safety
/// `out` must be valid for writes. The handle must be released with
/// [`spade_model_free`].
#[no_mangle]
pub unsafe extern "C" fn spade_model_new(
    gamma: f64,
    max_k: usize,
    max_l: usize,
    out: *mut *mut SpadeModel,
) -> SpadeStatus {
    guard(|| {
        let out = target(out, "out")?;
        *out = ptr::null_mut();
        let schmidt = SchmidtModel::new(gamma)?;
        let inner = spade_core::model::SpadeModel::new(schmidt, ModeSpace::grid(max_k, max_l));
        *out = Box::into_raw(Box::new(SpadeModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`spade_model_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spade_model_free(model: *mut SpadeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of projections (idler modes times signal modes); 0 for null.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spade_model_outcome_count(model: *const SpadeModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.outcome_count())
}

/// Attaches per-projection gain `alpha` and background `beta`, each of
/// length `len` equal to the outcome count.
///
/// # Safety
/// `model` must be a live handle; `alpha` and `beta` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn spade_model_set_calibration(
    model: *mut SpadeModel,
    alpha: *const f64,
    beta: *const f64,
    len: usize,
) -> SpadeStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        check_len(m.inner.outcome_count(), len)?;
        let cal = CalibrationModel::new(slice(alpha, len, "alpha")?.to_vec(), slice(beta, len, "beta")?.to_vec())?;
        m.inner = m.inner.clone().with_calibration(cal)?;
        Ok(())
    })
}

/// Projection probabilities at per-arm shift `d`, row-major by idler mode.
///
/// # Safety
/// `model` must be a live handle; `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn spade_model_probabilities(
    model: *const SpadeModel,
    d: f64,
    out: *mut f64,
    len: usize,
) -> SpadeStatus {
    guard(|| {
        let m = model_ref(model)?;
        check_len(m.inner.outcome_count(), len)?;
        let dst = slice_mut(out, len, "out")?;
        dst.copy_from_slice(&m.inner.probabilities(d)?);
        Ok(())
    })
}

/// Per-photon Fisher information for the total separation at shift `d`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_model_fisher(model: *const SpadeModel, d: f64, out: *mut f64) -> SpadeStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = target(out, "out")?;
        *out = model_fisher(&m.inner, d)?.total;
        Ok(())
    })
}

/// Draws `photons` outcomes at shift `d`; deterministic in `seed`.
///
/// # Safety
/// `model` must be a live handle; `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn spade_model_sample(
    model: *const SpadeModel,
    d: f64,
    photons: u64,
    seed: u64,
    out: *mut u64,
    len: usize,
) -> SpadeStatus {
    guard(|| {
        let m = model_ref(model)?;
        check_len(m.inner.outcome_count(), len)?;
        let dst = slice_mut(out, len, "out")?;
        dst.copy_from_slice(&sample_counts(&m.inner.probabilities(d)?, photons, seed)?);
        Ok(())
    })
}

/// Maximum-likelihood per-arm shift on `[lo, hi]`.
///
/// # Safety
/// `model` must be a live handle; `counts` must point to `len` values and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spade_model_estimate(
    model: *const SpadeModel,
    counts: *const u64,
    len: usize,
    lo: f64,
    hi: f64,
    out: *mut SpadeEstimate,
) -> SpadeStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = target(out, "out")?;
        check_len(m.inner.outcome_count(), len)?;
        let counts = CountMatrix::from_vec(slice(counts, len, "counts")?.to_vec());
        let e = mle_estimate(&counts, &m.inner, &SearchBounds::new(lo, hi)?)?;
        *out = SpadeEstimate {
            d_hat: e.d_hat,
            delta_hat: e.delta_hat,
            log_likelihood: e.log_likelihood,
            crlb_variance: e.crlb_variance,
            boundary_hit: e.boundary_hit as u8,
            flat: e.flat as u8,
            converged: e.converged as u8,
        };
        Ok(())
    })
}
