//! C interface to the `cgdare` library.
//!
//! Matrices cross the boundary as row-major `double` buffers. Every fallible
//! call returns a [`CgdareStatus`]; on failure the message is available from
//! [`cgdare_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cgdare::{pencil, reduction, Error, PopovTriple, RealMatrix, SolutionSet, Tolerance};

/// Seed used by the C caller when it has no preference.
pub const CGDARE_DEFAULT_SEED: u64 = 0x5eed_0f9e_7c11;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgdareStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NotSymmetric = 3,
    NotPsd = 4,
    NonFinite = 5,
    InvalidArgument = 6,
    NoSolution = 7,
    IndexOutOfRange = 8,
    Internal = 9,
}

impl From<&Error> for CgdareStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch(_) | Error::NotSquare(_) => CgdareStatus::DimensionMismatch,
            Error::AsymmetryBeyondTolerance { .. } => CgdareStatus::NotSymmetric,
            Error::PopovNotPsd { .. } => CgdareStatus::NotPsd,
            Error::NonFinite(_) => CgdareStatus::NonFinite,
            Error::PreconditionViolated(_) => CgdareStatus::InvalidArgument,
            Error::NoRealSolutionFound(_) | Error::LiftVerificationFailed { .. } => {
                CgdareStatus::NoSolution
            }
            _ => CgdareStatus::Internal,
        }
    }
}

/// A validated Popov triple together with the tolerance used by every call
/// on it.
pub struct CgdareTriple {
    triple: PopovTriple,
    tol: Tolerance,
}

/// Solution families of one triple.
pub struct CgdareSolutionSet {
    order: usize,
    set: SolutionSet,
    stabilizing: Option<usize>,
    exhaustive: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CgdareDiagnosis {
    pub pencil_regular: bool,
    pub n_singular: bool,
    pub r_singular: bool,
    pub a0_singular: bool,
    pub rank_r: usize,
    /// -1 when no solution was available.
    pub rank_rx: i64,
    /// -1 unknown, 0 no, 1 yes.
    pub closed_loop_singular_predicted: i32,
    /// -1 unknown, 0 no, 1 yes.
    pub closed_loop_singular_observed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: CgdareStatus, msg: impl Into<String>) -> CgdareStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> CgdareStatus {
    fail(CgdareStatus::from(&e), e.to_string())
}

/// Runs `f`, turning panics into [`CgdareStatus::Internal`].
fn guard(f: impl FnOnce() -> CgdareStatus) -> CgdareStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        fail(CgdareStatus::Internal, format!("internal error: {msg}"))
    })
}

/// # Safety
/// `data` must be null or point to `rows * cols` readable doubles.
unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize) -> Option<RealMatrix> {
    if data.is_null() {
        return None;
    }
    let len = rows.checked_mul(cols)?;
    let slice = if len == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(data, len)
    };
    Some(RealMatrix::from_row_slice(rows, cols, slice))
}

/// # Safety
/// `out` must be null or point to `len` writable doubles.
unsafe fn write_matrix(m: &RealMatrix, out: *mut f64, len: usize) -> CgdareStatus {
    if out.is_null() {
        return fail(CgdareStatus::NullPointer, "output buffer is null");
    }
    let need = m.nrows() * m.ncols();
    if len != need {
        return fail(
            CgdareStatus::DimensionMismatch,
            format!("output buffer holds {len} entries, expected {need}"),
        );
    }
    let out = std::slice::from_raw_parts_mut(out, len);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[i * m.ncols() + j] = m[(i, j)];
        }
    }
    CgdareStatus::Ok
}

/// Builds a triple from row-major `A` (n×n), `B` (n×m), `Q` (n×n), `R` (m×m)
/// and optional `S` (n×m; null means zero) with the default tolerance.
///
/// # Safety
/// Non-null pointers must reference buffers of the stated sizes; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn cgdare_triple_new(
    n: usize,
    m: usize,
    a: *const f64,
    b: *const f64,
    q: *const f64,
    r: *const f64,
    s: *const f64,
    out: *mut *mut CgdareTriple,
) -> CgdareStatus {
    guard(|| {
        if out.is_null() {
            return fail(CgdareStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let (Some(a), Some(b), Some(q), Some(r)) = (
            read_matrix(a, n, n),
            read_matrix(b, n, m),
            read_matrix(q, n, n),
            read_matrix(r, m, m),
        ) else {
            return fail(CgdareStatus::NullPointer, "A, B, Q and R are required");
        };
        let s = if s.is_null() {
            RealMatrix::zeros(n, m)
        } else {
            read_matrix(s, n, m).unwrap()
        };
        let tol = Tolerance::default();
        match PopovTriple::new(a, b, q, r, s, &tol) {
            Ok(triple) => {
                *out = Box::into_raw(Box::new(CgdareTriple { triple, tol }));
                CgdareStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `t` must be null or a handle from [`cgdare_triple_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cgdare_triple_free(t: *mut CgdareTriple) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Replaces the tolerance of `t`. Both values must be finite and positive.
///
/// # Safety
/// `t` must be a live triple handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_triple_set_tolerance(
    t: *mut CgdareTriple,
    rel: f64,
    abs_residual: f64,
) -> CgdareStatus {
    guard(|| {
        let Some(t) = t.as_mut() else {
            return fail(CgdareStatus::NullPointer, "triple is null");
        };
        match Tolerance::new(rel, abs_residual) {
            Ok(tol) => {
                t.tol = tol;
                CgdareStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// State dimension of `t`, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live triple handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_triple_state_dim(t: *const CgdareTriple) -> usize {
    t.as_ref().map_or(0, |t| t.triple.n())
}

/// Input dimension of `t`, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live triple handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_triple_input_dim(t: *const CgdareTriple) -> usize {
    t.as_ref().map_or(0, |t| t.triple.m())
}

/// Reduces, solves and lifts. The result must be released with
/// [`cgdare_solution_set_free`].
///
/// # Safety
/// `t` must be a live triple handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solve(
    t: *const CgdareTriple,
    out: *mut *mut CgdareSolutionSet,
) -> CgdareStatus {
    guard(|| {
        if out.is_null() {
            return fail(CgdareStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(t) = t.as_ref() else {
            return fail(CgdareStatus::NullPointer, "triple is null");
        };
        match reduction::solve(&t.triple, &t.tol) {
            Ok(solved) => {
                if let Some(msg) = &solved.terminal.failure {
                    return fail(CgdareStatus::NoSolution, msg.clone());
                }
                *out = Box::into_raw(Box::new(CgdareSolutionSet {
                    order: t.triple.n(),
                    stabilizing: solved.terminal.stabilizing,
                    exhaustive: solved.terminal.exhaustive,
                    set: solved.solutions,
                }));
                CgdareStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from [`cgdare_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solution_set_free(s: *mut CgdareSolutionSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of families, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live solution-set handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solution_set_len(s: *const CgdareSolutionSet) -> usize {
    s.as_ref().map_or(0, |s| s.set.len())
}

/// Order `n` of every matrix in the set, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live solution-set handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solution_set_state_dim(s: *const CgdareSolutionSet) -> usize {
    s.as_ref().map_or(0, |s| s.order)
}

/// Whether every solution was enumerated.
///
/// # Safety
/// `s` must be null or a live solution-set handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solution_set_exhaustive(s: *const CgdareSolutionSet) -> bool {
    s.as_ref().is_some_and(|s| s.exhaustive)
}

/// Index of the stabilizing family, or -1 when there is none.
///
/// # Safety
/// `s` must be null or a live solution-set handle.
#[no_mangle]
pub unsafe extern "C" fn cgdare_solution_set_stabilizing(s: *const CgdareSolutionSet) -> i64 {
    s.as_ref()
        .and_then(|s| s.stabilizing)
        .map_or(-1, |i| i as i64)
}

/// Number of free parameters of family `index`.
///
/// # Safety
/// `s` must be a live solution-set handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgdare_family_dim(
    s: *const CgdareSolutionSet,
    index: usize,
    out: *mut usize,
) -> CgdareStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(CgdareStatus::NullPointer, "null argument");
        };
        match s.set.families().get(index) {
            Some(f) => {
                *out = f.dim();
                CgdareStatus::Ok
            }
            None => out_of_range(index, s.set.len()),
        }
    })
}

fn out_of_range(index: usize, len: usize) -> CgdareStatus {
    fail(
        CgdareStatus::IndexOutOfRange,
        format!("index {index} out of range for {len} entries"),
    )
}

/// Copies the base matrix of family `index` into `out` (`len` = n·n).
///
/// # Safety
/// `s` must be a live solution-set handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cgdare_family_base(
    s: *const CgdareSolutionSet,
    index: usize,
    out: *mut f64,
    len: usize,
) -> CgdareStatus {
    guard(|| {
        let Some(s) = s.as_ref() else {
            return fail(CgdareStatus::NullPointer, "solution set is null");
        };
        match s.set.families().get(index) {
            Some(f) => write_matrix(f.base(), out, len),
            None => out_of_range(index, s.set.len()),
        }
    })
}

/// Copies basis direction `direction` of family `index` into `out`.
///
/// # Safety
/// `s` must be a live solution-set handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cgdare_family_basis(
    s: *const CgdareSolutionSet,
    index: usize,
    direction: usize,
    out: *mut f64,
    len: usize,
) -> CgdareStatus {
    guard(|| {
        let Some(s) = s.as_ref() else {
            return fail(CgdareStatus::NullPointer, "solution set is null");
        };
        let Some(f) = s.set.families().get(index) else {
            return out_of_range(index, s.set.len());
        };
        match f.basis().get(direction) {
            Some(h) => write_matrix(h, out, len),
            None => out_of_range(direction, f.dim()),
        }
    })
}

/// Writes `X₀ + Σ ξᵢHᵢ` for family `index`; `xi` holds one value per
/// parameter and may be null when the family is isolated.
///
/// # Safety
/// `xi` must hold `xi_len` doubles and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cgdare_family_member(
    s: *const CgdareSolutionSet,
    index: usize,
    xi: *const f64,
    xi_len: usize,
    out: *mut f64,
    len: usize,
) -> CgdareStatus {
    guard(|| {
        let Some(s) = s.as_ref() else {
            return fail(CgdareStatus::NullPointer, "solution set is null");
        };
        let Some(f) = s.set.families().get(index) else {
            return out_of_range(index, s.set.len());
        };
        if xi_len != f.dim() {
            return fail(
                CgdareStatus::DimensionMismatch,
                format!("{xi_len} parameters given, family has {}", f.dim()),
            );
        }
        let params = match read_matrix(xi, xi_len, 1) {
            Some(v) => v.as_slice().to_vec(),
            None if xi_len == 0 => Vec::new(),
            None => return fail(CgdareStatus::NullPointer, "xi is null"),
        };
        write_matrix(&f.member(&params), out, len)
    })
}

/// Residual check of a row-major candidate `x` (n×n). `accepted` is set when
/// the residual is within tolerance and the kernel condition holds.
///
/// # Safety
/// `x` must hold `len` doubles; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgdare_verify(
    t: *const CgdareTriple,
    x: *const f64,
    len: usize,
    residual: *mut f64,
    kernel_ok: *mut bool,
    accepted: *mut bool,
) -> CgdareStatus {
    guard(|| {
        let Some(t) = t.as_ref() else {
            return fail(CgdareStatus::NullPointer, "triple is null");
        };
        if residual.is_null() || kernel_ok.is_null() || accepted.is_null() {
            return fail(CgdareStatus::NullPointer, "output pointer is null");
        }
        let n = t.triple.n();
        if len != n * n {
            return fail(
                CgdareStatus::DimensionMismatch,
                format!("X holds {len} entries, expected {}", n * n),
            );
        }
        let Some(x) = read_matrix(x, n, n) else {
            return fail(CgdareStatus::NullPointer, "X is null");
        };
        if x.iter().any(|v| !v.is_finite()) {
            return fail(CgdareStatus::NonFinite, "X contains a non-finite entry");
        }
        match t.triple.gdare_residual(&x, &t.tol) {
            Ok(res) => {
                *residual = res.norm;
                *kernel_ok = res.kernel_ok;
                *accepted = res.accepted(&t.tol);
                CgdareStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

fn tri_state(v: Option<bool>) -> i32 {
    v.map_or(-1, i32::from)
}

/// Singularity diagnostics. Closed-loop entries use the solutions found by
/// [`cgdare_solve`] and stay unknown when the solve fails.
///
/// # Safety
/// `t` must be a live triple handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgdare_diagnose(
    t: *const CgdareTriple,
    seed: u64,
    out: *mut CgdareDiagnosis,
) -> CgdareStatus {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(CgdareStatus::NullPointer, "null argument");
        };
        let solutions = reduction::solve(&t.triple, &t.tol)
            .ok()
            .map(|s| s.solutions)
            .filter(|s| !s.is_empty());
        match pencil::diagnose(&t.triple, &t.tol, seed, solutions.as_ref()) {
            Ok(d) => {
                *out = CgdareDiagnosis {
                    pencil_regular: d.pencil_regular,
                    n_singular: d.n_singular,
                    r_singular: d.r_singular,
                    a0_singular: d.a0_singular,
                    rank_r: d.rank_r,
                    rank_rx: d.rank_rx.map_or(-1, |r| r as i64),
                    closed_loop_singular_predicted: tri_state(d.closed_loop_singular_predicted),
                    closed_loop_singular_observed: tri_state(d.closed_loop_singular_observed),
                };
                CgdareStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Message of the last failed call on this thread, empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cgdare_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
