//! C ABI for `qtomo`.
//!
//! Objects are opaque heap handles created by `qtomo_*_new`/`qtomo_*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`QtomoStatus`]; on failure a message is available from
//! [`qtomo_last_error`] on the same thread. Matrices cross the boundary as
//! row-major `double` arrays, complex ones as separate real and imaginary
//! arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtomo::covariance::{Budget, SamplingOptions, Scheme};
use qtomo::experiment::{ChannelSpec, StateSpec};
use qtomo::operator::c;
use qtomo::reconstruction::{reconstruct_channel, Mode, Reconstruction};
use qtomo::tolerance::CHANNEL_TOL;
use qtomo::{gell_mann_basis, CMatrix, DensityState, Error, KrausChannel, Operator};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtomoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SingularState = 4,
    NotCompletelyPositive = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtomoScheme {
    TwoPointer = 0,
    SinglePointer = 1,
}

/// Opaque CPTP channel.
pub struct QtomoChannel {
    inner: KrausChannel,
}

/// Opaque density matrix.
pub struct QtomoState {
    inner: DensityState,
}

/// Opaque reconstruction result.
pub struct QtomoReconstruction {
    inner: Reconstruction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> QtomoStatus {
    match e {
        Error::DimensionMismatch { .. } => QtomoStatus::DimensionMismatch,
        Error::SingularState { .. } => QtomoStatus::SingularState,
        Error::NotCompletelyPositive { .. } => QtomoStatus::NotCompletelyPositive,
        Error::RankDeficient { .. } => QtomoStatus::Numerical,
        _ => QtomoStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (QtomoStatus, String)>) -> QtomoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtomoStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QtomoStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QtomoStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QtomoStatus, String) {
    (QtomoStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (QtomoStatus, String) {
    (QtomoStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QtomoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(
    p: *const f64,
    len: usize,
    what: &str,
) -> Result<&'a [f64], (QtomoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(
    p: *mut f64,
    len: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [f64], (QtomoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err((
            QtomoStatus::DimensionMismatch,
            format!("{what} holds {len} values, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (QtomoStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn complex_matrix(dim: usize, re: &[f64], im: &[f64]) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, col| c(re[r * dim + col], im[r * dim + col]))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qtomo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qtomo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Channel from a spec string such as `"phase-damping:0.5"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_channel_from_spec(
    spec: *const c_char,
    dim: usize,
    out: *mut *mut QtomoChannel,
) -> QtomoStatus {
    guard(|| {
        let s = str_arg(spec, "spec")?;
        let inner = ChannelSpec(s.to_string()).build(dim).map_err(lib)?;
        emit(out, QtomoChannel { inner })
    })
}

/// Trace-preserving channel from `count` Kraus operators, each `dim × dim` row-major, stored
/// back to back in `re` and `im` (length `count·dim²` each).
///
/// # Safety
/// `re` and `im` must point to `count·dim²` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qtomo_channel_from_kraus(
    dim: usize,
    count: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QtomoChannel,
) -> QtomoStatus {
    guard(|| {
        if dim == 0 || count == 0 {
            return Err(invalid("dim and count must be positive"));
        }
        let n = dim * dim;
        let re = slice_arg(re, count * n, "re")?;
        let im = slice_arg(im, count * n, "im")?;
        let ops = (0..count)
            .map(|k| Operator::new(complex_matrix(dim, &re[k * n..], &im[k * n..])))
            .collect::<Result<Vec<_>, _>>()
            .map_err(lib)?;
        let inner = KrausChannel::validated(ops, CHANNEL_TOL).map_err(lib)?;
        emit(out, QtomoChannel { inner })
    })
}

/// # Safety
/// `channel` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtomo_channel_free(channel: *mut QtomoChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// `Λ(ρ)` for a `dim × dim` row-major matrix; the output arrays need `dim²` entries.
///
/// # Safety
/// All pointers must be valid for `dim²` doubles.
#[no_mangle]
pub unsafe extern "C" fn qtomo_channel_apply(
    channel: *const QtomoChannel,
    rho_re: *const f64,
    rho_im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> QtomoStatus {
    guard(|| {
        let ch = channel.as_ref().ok_or_else(|| null("channel"))?;
        let d = ch.inner.dim();
        let m = complex_matrix(
            d,
            slice_arg(rho_re, d * d, "rho_re")?,
            slice_arg(rho_im, d * d, "rho_im")?,
        );
        let r = ch.inner.apply_matrix(&m).map_err(lib)?;
        let (ore, oim) = (
            out_slice(out_re, d * d, d * d, "out_re")?,
            out_slice(out_im, d * d, d * d, "out_im")?,
        );
        for row in 0..d {
            for col in 0..d {
                ore[row * d + col] = r[(row, col)].re;
                oim[row * d + col] = r[(row, col)].im;
            }
        }
        Ok(())
    })
}

/// State from a spec string such as `"maximally-mixed"` or `"thermal:1.0"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_state_from_spec(
    spec: *const c_char,
    dim: usize,
    out: *mut *mut QtomoState,
) -> QtomoStatus {
    guard(|| {
        let s = str_arg(spec, "spec")?;
        let inner = StateSpec(s.to_string()).build(dim).map_err(lib)?;
        emit(out, QtomoState { inner })
    })
}

/// State from a row-major density matrix.
///
/// # Safety
/// `re` and `im` must point to `dim²` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qtomo_state_from_matrix(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QtomoState,
) -> QtomoStatus {
    guard(|| {
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let m = complex_matrix(
            dim,
            slice_arg(re, dim * dim, "re")?,
            slice_arg(im, dim * dim, "im")?,
        );
        let inner = DensityState::from_matrix(m).map_err(lib)?;
        emit(out, QtomoState { inner })
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtomo_state_free(state: *mut QtomoState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

unsafe fn reconstruct(
    state: *const QtomoState,
    channel: *const QtomoChannel,
    mode: Mode,
    out: *mut *mut QtomoReconstruction,
) -> Result<(), (QtomoStatus, String)> {
    let st = state.as_ref().ok_or_else(|| null("state"))?;
    let ch = channel.as_ref().ok_or_else(|| null("channel"))?;
    let basis = gell_mann_basis(st.inner.dim()).map_err(lib)?;
    let inner = reconstruct_channel(&st.inner, &ch.inner, &basis, mode).map_err(lib)?;
    emit(out, QtomoReconstruction { inner })
}

/// Reconstruction from exact covariances.
///
/// # Safety
/// Handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruct_exact(
    state: *const QtomoState,
    channel: *const QtomoChannel,
    out: *mut *mut QtomoReconstruction,
) -> QtomoStatus {
    guard(|| reconstruct(state, channel, Mode::Exact, out))
}

/// Reconstruction from simulated weak measurements with `trials` runs per
/// correlation at coupling `eps2`.
///
/// # Safety
/// Handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruct_sampled(
    state: *const QtomoState,
    channel: *const QtomoChannel,
    eps2: f64,
    trials: u64,
    seed: u64,
    scheme: QtomoScheme,
    correct: bool,
    out: *mut *mut QtomoReconstruction,
) -> QtomoStatus {
    guard(|| {
        if !(eps2 > 0.0 && eps2 < 1.0) {
            return Err(invalid(format!("eps2 must lie in (0, 1), got {eps2}")));
        }
        let budget = Budget::from_eps2(eps2, trials).map_err(lib)?;
        let options = SamplingOptions {
            scheme: match scheme {
                QtomoScheme::TwoPointer => Scheme::TwoPointer,
                QtomoScheme::SinglePointer => Scheme::SinglePointer,
            },
            correct,
        };
        reconstruct(
            state,
            channel,
            Mode::Sampled {
                budget,
                seed,
                options,
            },
            out,
        )
    })
}

/// # Safety
/// `rec` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_free(rec: *mut QtomoReconstruction) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Number of non-identity basis operators `K = D² − 1`; `M` is `K × K`. Zero for NULL.
///
/// # Safety
/// `rec` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_size(rec: *const QtomoReconstruction) -> usize {
    rec.as_ref().map_or(0, |r| r.inner.dynamics.len())
}

/// Writes `M` row-major into `out` (capacity `len`, at least `K²`).
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_m(
    rec: *const QtomoReconstruction,
    out: *mut f64,
    len: usize,
) -> QtomoStatus {
    guard(|| {
        let r = rec.as_ref().ok_or_else(|| null("reconstruction"))?;
        let m = &r.inner.dynamics.m;
        let k = m.nrows();
        let dst = out_slice(out, len, k * k, "out")?;
        for i in 0..k {
            for j in 0..k {
                dst[i * k + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Writes `χ` into `out` (capacity `len`, at least `K`).
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_chi(
    rec: *const QtomoReconstruction,
    out: *mut f64,
    len: usize,
) -> QtomoStatus {
    guard(|| {
        let r = rec.as_ref().ok_or_else(|| null("reconstruction"))?;
        let chi = &r.inner.dynamics.chi;
        out_slice(out, len, chi.len(), "out")?.copy_from_slice(chi.as_slice());
        Ok(())
    })
}

/// Number of reconstructed Kraus operators. Zero for NULL.
///
/// # Safety
/// `rec` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_kraus_count(
    rec: *const QtomoReconstruction,
) -> usize {
    rec.as_ref().map_or(0, |r| r.inner.kraus.operators().len())
}

/// Writes Kraus operator `index` row-major into `re`/`im` (capacity `len`, at least `D²`).
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_kraus_op(
    rec: *const QtomoReconstruction,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QtomoStatus {
    guard(|| {
        let r = rec.as_ref().ok_or_else(|| null("reconstruction"))?;
        let ops = r.inner.kraus.operators();
        let op = ops.get(index).ok_or_else(|| {
            invalid(format!(
                "Kraus index {index} out of range ({} operators)",
                ops.len()
            ))
        })?;
        let d = op.dim();
        let (ore, oim) = (
            out_slice(re, len, d * d, "re")?,
            out_slice(im, len, d * d, "im")?,
        );
        let m = op.matrix();
        for row in 0..d {
            for col in 0..d {
                ore[row * d + col] = m[(row, col)].re;
                oim[row * d + col] = m[(row, col)].im;
            }
        }
        Ok(())
    })
}

/// New channel handle holding the reconstructed Kraus operators.
///
/// # Safety
/// `rec` must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_channel(
    rec: *const QtomoReconstruction,
    out: *mut *mut QtomoChannel,
) -> QtomoStatus {
    guard(|| {
        let r = rec.as_ref().ok_or_else(|| null("reconstruction"))?;
        emit(
            out,
            QtomoChannel {
                inner: r.inner.kraus.clone(),
            },
        )
    })
}

/// `‖Σ K†K − 𝟙‖` of the reconstruction; NaN for NULL.
///
/// # Safety
/// `rec` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_completeness_defect(
    rec: *const QtomoReconstruction,
) -> f64 {
    rec.as_ref()
        .map_or(f64::NAN, |r| r.inner.diagnostics.completeness_defect)
}

/// Spectral-norm error of `M` against the simulated truth; NaN for NULL.
///
/// # Safety
/// `rec` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_delta_m(rec: *const QtomoReconstruction) -> f64 {
    rec.as_ref()
        .and_then(|r| r.inner.diagnostics.delta_m)
        .unwrap_or(f64::NAN)
}

/// Largest distance between the reconstructed and true channel outputs over probe states; NaN for NULL.
///
/// # Safety
/// `rec` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtomo_reconstruction_action_error(rec: *const QtomoReconstruction) -> f64 {
    rec.as_ref()
        .and_then(|r| r.inner.diagnostics.action_error)
        .unwrap_or(f64::NAN)
}

/// `N = ⌈4 f² / δ⁴⌉`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_required_trials(
    delta: f64,
    f_abs: f64,
    out: *mut u64,
) -> QtomoStatus {
    guard(|| {
        let n = qtomo::covariance::required_trials(delta, f_abs).map_err(lib)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = n;
        Ok(())
    })
}

/// `ε = √(δ/|f|)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtomo_optimal_epsilon(
    delta: f64,
    f_abs: f64,
    out: *mut f64,
) -> QtomoStatus {
    guard(|| {
        let e = qtomo::covariance::optimal_epsilon(delta, f_abs).map_err(lib)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = e;
        Ok(())
    })
}
