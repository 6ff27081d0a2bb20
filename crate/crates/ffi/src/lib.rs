//! C ABI for grasslin.
//!
//! Matrices and solutions are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`GrasslinStatus`]; the message of the last failure on the calling thread
//! is available from [`grasslin_last_error_message`]. Dense data crosses the
//! boundary as separate real and imaginary arrays in column-major order; a
//! null imaginary pointer means all-real input.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use grasslin::dense::{Matrix, Scalar, Vector};
use grasslin::error::Error;
use grasslin::rank::numerical_rank_with_guard;
use grasslin::solver::{solve_general, GeneralSolution, SolverConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrasslinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    ThetaOnSingularValue = 5,
    BackwardErrorOnTheta = 6,
    NoConvergence = 7,
    /// Any other numerical failure; see the last error message.
    Numerical = 8,
    /// The output buffer is too small.
    BufferTooSmall = 9,
    /// The solution set is empty, so there is no anchor or kernel.
    EmptySolution = 10,
    Panic = 11,
}

/// Opaque dense complex matrix.
pub struct GrasslinMatrix(Matrix);

/// Opaque general numerical solution with its report.
pub struct GrasslinSolution(GeneralSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GrasslinStatus {
    match e {
        Error::ThetaOnSingularValue { .. } => GrasslinStatus::ThetaOnSingularValue,
        Error::BackwardErrorOnTheta { .. } => GrasslinStatus::BackwardErrorOnTheta,
        Error::NoConvergence { .. } => GrasslinStatus::NoConvergence,
        Error::NonFinite { .. } => GrasslinStatus::NonFinite,
        Error::DimensionMismatch(_) | Error::LengthMismatch { .. } | Error::ShapeMismatch(_) => {
            GrasslinStatus::DimensionMismatch
        }
        Error::InvalidArgument(_) => GrasslinStatus::InvalidArgument,
        _ => GrasslinStatus::Numerical,
    }
}

fn fail(status: GrasslinStatus, msg: &str) -> GrasslinStatus {
    set_last_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> GrasslinStatus) -> GrasslinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GrasslinStatus::Panic, "internal panic"),
    }
}

fn lib_error(e: Error) -> GrasslinStatus {
    fail(status_of(&e), &format!("{}: {e}", e.name()))
}

/// Reads `len` complex values from split arrays.
///
/// # Safety
/// `re` must point to `len` doubles; `im` must be null or point to `len` doubles.
unsafe fn read_scalars(re: *const f64, im: *const f64, len: usize) -> Vec<Scalar> {
    let re = std::slice::from_raw_parts(re, len);
    if im.is_null() {
        re.iter().map(|&x| Scalar::new(x, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, len);
        re.iter().zip(im).map(|(&a, &b)| Scalar::new(a, b)).collect()
    }
}

/// # Safety
/// `re` must hold `len` doubles; `im` must be null or hold `len` doubles.
unsafe fn write_scalars(values: &[Scalar], re: *mut f64, im: *mut f64) {
    let out_re = std::slice::from_raw_parts_mut(re, values.len());
    for (o, v) in out_re.iter_mut().zip(values) {
        *o = v.re;
    }
    if !im.is_null() {
        let out_im = std::slice::from_raw_parts_mut(im, values.len());
        for (o, v) in out_im.iter_mut().zip(values) {
            *o = v.im;
        }
    }
}

/// Name of a status code as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn grasslin_status_name(status: GrasslinStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        GrasslinStatus::Ok => b"Ok\0",
        GrasslinStatus::NullPointer => b"NullPointer\0",
        GrasslinStatus::InvalidArgument => b"InvalidArgument\0",
        GrasslinStatus::DimensionMismatch => b"DimensionMismatch\0",
        GrasslinStatus::NonFinite => b"NonFinite\0",
        GrasslinStatus::ThetaOnSingularValue => b"ThetaOnSingularValue\0",
        GrasslinStatus::BackwardErrorOnTheta => b"BackwardErrorOnTheta\0",
        GrasslinStatus::NoConvergence => b"NoConvergence\0",
        GrasslinStatus::Numerical => b"Numerical\0",
        GrasslinStatus::BufferTooSmall => b"BufferTooSmall\0",
        GrasslinStatus::EmptySolution => b"EmptySolution\0",
        GrasslinStatus::Panic => b"Panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn grasslin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a `rows × cols` matrix from column-major split arrays.
///
/// # Safety
/// `re` must hold `rows * cols` doubles, `im` must be null or hold as many,
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn grasslin_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut GrasslinMatrix,
) -> GrasslinStatus {
    guarded(|| {
        if re.is_null() || out.is_null() {
            return fail(GrasslinStatus::NullPointer, "null data or output pointer");
        }
        if rows == 0 || cols == 0 {
            return fail(GrasslinStatus::InvalidArgument, "matrix dimensions must be positive");
        }
        let Some(len) = rows.checked_mul(cols) else {
            return fail(GrasslinStatus::InvalidArgument, "matrix dimensions overflow");
        };
        let m = Matrix::from_col_major(rows, cols, read_scalars(re, im, len));
        if let Err(e) = m.check_finite() {
            return lib_error(e);
        }
        *out = Box::into_raw(Box::new(GrasslinMatrix(m)));
        GrasslinStatus::Ok
    })
}

/// # Safety
/// `m` must be null or a handle from [`grasslin_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn grasslin_matrix_free(m: *mut GrasslinMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle; `rows` and `cols` may be null.
#[no_mangle]
pub unsafe extern "C" fn grasslin_matrix_shape(
    m: *const GrasslinMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> GrasslinStatus {
    let Some(m) = m.as_ref() else {
        return fail(GrasslinStatus::NullPointer, "null matrix");
    };
    if let Some(r) = rows.as_mut() {
        *r = m.0.rows();
    }
    if let Some(c) = cols.as_mut() {
        *c = m.0.cols();
    }
    GrasslinStatus::Ok
}

/// Numerical rank at tolerance `theta`. A `guard` of 0 or less uses the
/// default guard band.
///
/// # Safety
/// `m` must be a live matrix handle and `rank` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn grasslin_numerical_rank(
    m: *const GrasslinMatrix,
    theta: f64,
    guard: f64,
    rank: *mut usize,
) -> GrasslinStatus {
    guarded(|| {
        let (Some(m), false) = (m.as_ref(), rank.is_null()) else {
            return fail(GrasslinStatus::NullPointer, "null matrix or output pointer");
        };
        let g = if guard > 0.0 { guard } else { grasslin::rank::GUARD_MIN };
        match numerical_rank_with_guard(&m.0, theta, g) {
            Ok(d) => {
                *rank = d.rank;
                GrasslinStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// General numerical solution of `A x = b` within `theta`.
///
/// # Safety
/// `a` must be a live matrix handle, `b_re` must hold `b_len` doubles, `b_im`
/// must be null or hold as many, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solve(
    a: *const GrasslinMatrix,
    b_re: *const f64,
    b_im: *const f64,
    b_len: usize,
    theta: f64,
    out: *mut *mut GrasslinSolution,
) -> GrasslinStatus {
    guarded(|| {
        let Some(a) = a.as_ref() else {
            return fail(GrasslinStatus::NullPointer, "null matrix");
        };
        if b_re.is_null() || out.is_null() {
            return fail(GrasslinStatus::NullPointer, "null right-hand side or output pointer");
        }
        let b = Vector::from_vec(read_scalars(b_re, b_im, b_len));
        match solve_general(&a.0, &b, &SolverConfig::new(theta)) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(GrasslinSolution(sol)));
                GrasslinStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from [`grasslin_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solution_free(s: *mut GrasslinSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension of the solution set: −1 when empty, otherwise the kernel dimension.
///
/// # Safety
/// `s` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solution_dimension(s: *const GrasslinSolution) -> isize {
    s.as_ref().map_or(-1, |s| s.0.dimension())
}

/// Numerical rank, ambient dimension `n`, backward error, `σ₁/σ_r` (NaN when
/// the rank is 0) and residual (NaN for the empty set). Any output may be null.
///
/// # Safety
/// `s` must be a live solution handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solution_report(
    s: *const GrasslinSolution,
    rank: *mut usize,
    cols: *mut usize,
    backward_error: *mut f64,
    sensitivity: *mut f64,
    residual: *mut f64,
) -> GrasslinStatus {
    let Some(s) = s.as_ref() else {
        return fail(GrasslinStatus::NullPointer, "null solution");
    };
    let r = &s.0.report;
    if let Some(p) = rank.as_mut() {
        *p = r.rank;
    }
    if let Some(p) = cols.as_mut() {
        *p = r.cols;
    }
    if let Some(p) = backward_error.as_mut() {
        *p = r.backward_error;
    }
    if let Some(p) = sensitivity.as_mut() {
        *p = r.sensitivity.unwrap_or(f64::NAN);
    }
    if let Some(p) = residual.as_mut() {
        *p = r.residual.unwrap_or(f64::NAN);
    }
    GrasslinStatus::Ok
}

/// Copies the minimum-norm anchor (length `n`) into split arrays.
///
/// # Safety
/// `s` must be a live solution handle; `re` must hold `len` doubles and `im`
/// must be null or hold as many.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solution_anchor(
    s: *const GrasslinSolution,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> GrasslinStatus {
    guarded(|| {
        let Some(s) = s.as_ref() else {
            return fail(GrasslinStatus::NullPointer, "null solution");
        };
        let Some(aff) = s.0.affine() else {
            return fail(GrasslinStatus::EmptySolution, "solution set is empty");
        };
        if re.is_null() {
            return fail(GrasslinStatus::NullPointer, "null output buffer");
        }
        if len < aff.ambient_dim() {
            return fail(GrasslinStatus::BufferTooSmall, "anchor buffer shorter than n");
        }
        write_scalars(aff.anchor().as_slice(), re, im);
        GrasslinStatus::Ok
    })
}

/// Copies the orthonormal kernel basis (`n × k`, column-major) into split
/// arrays of at least `n · k` entries, `k` = [`grasslin_solution_dimension`].
///
/// # Safety
/// `s` must be a live solution handle; `re` must hold `len` doubles and `im`
/// must be null or hold as many.
#[no_mangle]
pub unsafe extern "C" fn grasslin_solution_kernel(
    s: *const GrasslinSolution,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> GrasslinStatus {
    guarded(|| {
        let Some(s) = s.as_ref() else {
            return fail(GrasslinStatus::NullPointer, "null solution");
        };
        let Some(aff) = s.0.affine() else {
            return fail(GrasslinStatus::EmptySolution, "solution set is empty");
        };
        let basis = aff.kernel().basis().as_slice();
        if basis.is_empty() {
            return GrasslinStatus::Ok;
        }
        if re.is_null() {
            return fail(GrasslinStatus::NullPointer, "null output buffer");
        }
        if len < basis.len() {
            return fail(GrasslinStatus::BufferTooSmall, "kernel buffer shorter than n * k");
        }
        write_scalars(basis, re, im);
        GrasslinStatus::Ok
    })
}
