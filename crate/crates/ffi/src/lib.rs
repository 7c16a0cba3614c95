//! C interface to `ghx-core`.
//!
//! Hermitian matrices and metrics cross the boundary as opaque handles that
//! the caller frees with the matching `*_free` function. Every fallible call
//! returns a [`GhxStatus`]; on failure the message is kept per thread and can
//! be copied out with [`ghx_last_error_message`]. Panics never unwind into C:
//! they are caught and reported as [`GhxStatus::Panic`].
//!
//! Matrices are passed as row-major `n×n` arrays of real parts and (optional)
//! imaginary parts. Output buffers come with their capacity; a buffer that is
//! too small yields [`GhxStatus::BufferTooSmall`] and is left untouched.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ghx_core::garding::{garding_gap, GardingOptions};
use ghx_core::hodge::{log_concavity, verify_theorem_a};
use ghx_core::sympoly::{in_gamma_m, mixed_sigma, sigma, MixedContext};
use ghx_core::{pencil_eigenvalues, GhxError, HermitianForm, MetricPencil};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NotPositiveDefinite = 5,
    OutsideCone = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A Hermitian matrix.
pub struct GhxHermitian(HermitianForm);

/// A positive-definite metric with its factorization.
pub struct GhxMetric(MetricPencil);

/// Outcome of the Gårding inequality check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GhxGardingResult {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub holds: bool,
    pub equality: bool,
}

/// Outcome of the mixed Hodge-index check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GhxTheoremResult {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
    /// Largest eigenvalue of the form on the primitive hyperplane.
    pub max_restricted_eigenvalue: f64,
    pub spectral_scale: f64,
    pub holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &GhxError) -> GhxStatus {
    match e {
        GhxError::DimensionMismatch { .. } | GhxError::ArgumentCount { .. } => GhxStatus::DimensionMismatch,
        GhxError::NotHermitian { .. } => GhxStatus::NotHermitian,
        GhxError::NotPositiveDefinite { .. } | GhxError::IllConditioned { .. } => GhxStatus::NotPositiveDefinite,
        GhxError::OutsideCone { .. } => GhxStatus::OutsideCone,
        GhxError::Numerical(_) | GhxError::Degenerate(_) => GhxStatus::Numerical,
        _ => GhxStatus::InvalidArgument,
    }
}

struct Failure(GhxStatus, String);

impl From<GhxError> for Failure {
    fn from(e: GhxError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GhxStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GhxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GhxStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            GhxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn handles<'a>(items: *const *const GhxHermitian, count: usize) -> Result<Vec<&'a HermitianForm>, Failure> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if items.is_null() {
        return Err(null("argument array"));
    }
    slice::from_raw_parts(items, count)
        .iter()
        .enumerate()
        .map(|(i, &p)| deref(p, &format!("argument {i}")).map(|h| &h.0))
        .collect()
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize) -> Result<(), Failure> {
    if values.len() > capacity {
        return Err(Failure(
            GhxStatus::BufferTooSmall,
            format!("need room for {} values, buffer holds {capacity}", values.len()),
        ));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ghx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, without the
/// terminating NUL; 0 when there is none.
#[no_mangle]
pub extern "C" fn ghx_last_error_length() -> usize {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message (NUL-terminated, truncated to fit) into
/// `buf`; returns the number of bytes written without the NUL.
///
/// # Safety
/// `buf` must be valid for `capacity` bytes, or null with `capacity == 0`.
#[no_mangle]
pub unsafe extern "C" fn ghx_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    if buf.is_null() || capacity == 0 {
        return 0;
    }
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let bytes = slot.as_ref().map_or(&[][..], |c| c.as_bytes());
        let k = bytes.len().min(capacity - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
        *buf.add(k) = 0;
        k
    })
}

/// Builds a Hermitian matrix from row-major real and imaginary parts
/// (`im` may be null for a real symmetric matrix).
///
/// # Safety
/// `re` (and `im` when non-null) must point to `n·n` doubles; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_hermitian_new(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut GhxHermitian,
) -> GhxStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if n == 0 || n > ghx_core::herm::MAX_DIM {
            return Err(GhxError::UnsupportedDimension(n).into());
        }
        let re = slice::from_raw_parts(re, n * n);
        let im = (!im.is_null()).then(|| slice::from_raw_parts(im, n * n));
        let m = DMatrix::from_fn(n, n, |j, k| {
            Complex64::new(re[j * n + k], im.map_or(0.0, |v| v[j * n + k]))
        });
        let form = HermitianForm::from_matrix(&m, ghx_core::herm::DEFAULT_TOL)?;
        write_out(out, Box::into_raw(Box::new(GhxHermitian(form))), "out")
    })
}

/// # Safety
/// `h` must come from `ghx_hermitian_new` and not be freed twice; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn ghx_hermitian_free(h: *mut GhxHermitian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of `h`, or 0 for null.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ghx_hermitian_dim(h: *const GhxHermitian) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim())
}

/// Builds a metric from a positive-definite Hermitian matrix.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_metric_new(g: *const GhxHermitian, out: *mut *mut GhxMetric) -> GhxStatus {
    guard(|| {
        let g = deref(g, "g")?;
        let pencil = MetricPencil::new(g.0.clone())?;
        write_out(out, Box::into_raw(Box::new(GhxMetric(pencil))), "out")
    })
}

/// The identity metric of dimension `n`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_metric_identity(n: usize, out: *mut *mut GhxMetric) -> GhxStatus {
    guard(|| {
        if n == 0 || n > ghx_core::herm::MAX_DIM {
            return Err(GhxError::UnsupportedDimension(n).into());
        }
        write_out(out, Box::into_raw(Box::new(GhxMetric(MetricPencil::identity(n)))), "out")
    })
}

/// # Safety
/// `g` must come from a metric constructor and not be freed twice; null is
/// a no-op.
#[no_mangle]
pub unsafe extern "C" fn ghx_metric_free(g: *mut GhxMetric) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Roots of `det(A − λG)` in ascending order, written to `out[0..n]`.
///
/// # Safety
/// Handles must be live; `out` must be valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ghx_pencil_eigenvalues(
    a: *const GhxHermitian,
    g: *const GhxMetric,
    out: *mut f64,
    capacity: usize,
) -> GhxStatus {
    guard(|| {
        let ev = pencil_eigenvalues(&deref(a, "a")?.0, &deref(g, "g")?.0)?;
        copy_out(&ev, out, capacity)
    })
}

/// `σ_k(A)` relative to `G`.
///
/// # Safety
/// Handles must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_sigma(a: *const GhxHermitian, g: *const GhxMetric, k: usize, out: *mut f64) -> GhxStatus {
    guard(|| {
        let v = sigma(&deref(a, "a")?.0, &deref(g, "g")?.0, k)?;
        write_out(out, v, "out")
    })
}

/// The mixed form `D(X_1, …, X_m)` of `σ_m` with `m = count`.
///
/// # Safety
/// `args` must hold `count` live handles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_mixed_sigma(
    args: *const *const GhxHermitian,
    count: usize,
    g: *const GhxMetric,
    out: *mut f64,
) -> GhxStatus {
    guard(|| {
        let args: Vec<HermitianForm> = handles(args, count)?.into_iter().cloned().collect();
        let ctx = MixedContext::sigma_m(&deref(g, "g")?.0, count)?;
        write_out(out, mixed_sigma(&ctx, &args)?, "out")
    })
}

/// Membership of `A` in `Γ_m`; `min_margin` receives the smallest
/// normalized `σ_l`, `l ≤ m` (either output may be null).
///
/// # Safety
/// Handles must be live; non-null outputs must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_in_gamma_m(
    a: *const GhxHermitian,
    g: *const GhxMetric,
    m: usize,
    tol: f64,
    member: *mut bool,
    min_margin: *mut f64,
) -> GhxStatus {
    guard(|| {
        let r = in_gamma_m(&deref(a, "a")?.0, &deref(g, "g")?.0, m, tol)?;
        if !member.is_null() {
            member.write(r.member);
        }
        if !min_margin.is_null() {
            min_margin.write(r.min_margin());
        }
        Ok(())
    })
}

/// `D(B_1, …, B_m) ≥ ∏ σ_m(B_i)^{1/m}` for `B_i ∈ Γ_m`, `m = count`.
///
/// # Safety
/// `args` must hold `count` live handles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_garding_gap(
    args: *const *const GhxHermitian,
    count: usize,
    g: *const GhxMetric,
    out: *mut GhxGardingResult,
) -> GhxStatus {
    guard(|| {
        let args: Vec<HermitianForm> = handles(args, count)?.into_iter().cloned().collect();
        let r = garding_gap(&args, &deref(g, "g")?.0, &GardingOptions::default())?;
        let result = GhxGardingResult {
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            holds: r.holds,
            equality: r.equality_witness.is_some(),
        };
        write_out(out, result, "out")
    })
}

/// The mixed Hodge-index check for `α_1, …, α_{m−1}`, `m = count + 1`.
///
/// # Safety
/// `alphas` must hold `count` live handles; `out` must be valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn ghx_verify_theorem_a(
    alphas: *const *const GhxHermitian,
    count: usize,
    g: *const GhxMetric,
    out: *mut GhxTheoremResult,
) -> GhxStatus {
    guard(|| {
        let alphas: Vec<HermitianForm> = handles(alphas, count)?.into_iter().cloned().collect();
        let r = verify_theorem_a(&alphas, &deref(g, "g")?.0, None)?;
        let result = GhxTheoremResult {
            n_plus: r.signature.plus,
            n_zero: r.signature.zero,
            n_minus: r.signature.minus,
            max_restricted_eigenvalue: r.restricted_spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            spectral_scale: r.spectral_scale,
            holds: r.holds(),
        };
        write_out(out, result, "out")
    })
}

/// `a_k = D(α^{(k)}, β^{(m−k)})` for `k = 0..=m` into `sequence[0..=m]`;
/// `holds` receives whether the sequence is log-concave.
///
/// # Safety
/// Handles must be live; `sequence` must be valid for `capacity` doubles and
/// `holds` (when non-null) for one write.
#[no_mangle]
pub unsafe extern "C" fn ghx_log_concavity(
    alpha: *const GhxHermitian,
    beta: *const GhxHermitian,
    g: *const GhxMetric,
    m: usize,
    sequence: *mut f64,
    capacity: usize,
    holds: *mut bool,
) -> GhxStatus {
    guard(|| {
        let r = log_concavity(&deref(alpha, "alpha")?.0, &deref(beta, "beta")?.0, &deref(g, "g")?.0, m)?;
        copy_out(&r.sequence, sequence, capacity)?;
        if !holds.is_null() {
            holds.write(r.holds());
        }
        Ok(())
    })
}
