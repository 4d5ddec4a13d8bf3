//! C ABI over `compoundkit`.
//!
//! Matrices and selectors cross the boundary as opaque handles that the
//! caller frees with the matching `*_free` function. Every fallible call
//! returns a [`CkStatus`]; on failure [`ck_last_error_message`] describes
//! the error for the calling thread. A `cap` argument of 0 means the
//! default `n^k` limit.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use compoundkit::compounds::{
    add_compound_entrywise, add_compound_eps_limit, add_compound_kron, default_eps,
    mult_compound_kron, mult_compound_oracle, product_add_compound,
};
use compoundkit::dynamics::{k_contraction_test, Verdict};
use compoundkit::indexing::{rank_q, rank_r, unrank_q, unrank_r, IndexSeq};
use compoundkit::lifting::{build_l, build_m, SignedSelector};
use compoundkit::{Error, Limits, Matrix};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkStatus {
    Ok = 0,
    Invariant = 1,
    Parse = 2,
    Domain = 3,
    Resource = 4,
    Numerical = 5,
    NullPointer = 6,
    Panic = 7,
}

pub const CK_MULT_ORACLE: u32 = 0;
pub const CK_MULT_KRON: u32 = 1;

pub const CK_ADD_ENTRYWISE: u32 = 0;
pub const CK_ADD_KRON: u32 = 1;
pub const CK_ADD_EPS: u32 = 2;

pub const CK_LIFT_M: u32 = 0;
pub const CK_LIFT_L: u32 = 1;

/// Opaque dense row-major matrix.
pub struct CkMatrix(Matrix);

/// Opaque signed selector (`M_{n,k}` or `L_{n,k}`).
pub struct CkSelector(SignedSelector);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CkStatus {
    match e {
        Error::Domain(_) => CkStatus::Domain,
        Error::Resource { .. } => CkStatus::Resource,
        Error::Numerical(_) | Error::Conditioning { .. } => CkStatus::Numerical,
    }
}

struct Fail(CkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CkStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CkStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CkStatus::Panic
        }
    }
}

fn limits(cap: usize) -> Limits {
    if cap == 0 {
        Limits::default()
    } else {
        Limits::with_max_dim(cap)
    }
}

unsafe fn matrix_ref<'a>(m: *const CkMatrix, what: &str) -> Result<&'a Matrix, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn read_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ck_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut CkMatrix,
) -> CkStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(CkStatus::Resource, "rows * cols overflows".into()))?;
        let values = read_slice(data, len, "data")?;
        let m = Matrix::new(rows, cols, values.to_vec())?;
        write_out(out, CkMatrix(m))
    })
}

/// # Safety
/// `m` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ck_matrix_free(m: *mut CkMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ck_matrix_rows(m: *const CkMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ck_matrix_cols(m: *const CkMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the row-major entries into `buf`, which must hold at least
/// `rows * cols` doubles.
///
/// # Safety
/// `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ck_matrix_copy_data(
    m: *const CkMatrix,
    buf: *mut f64,
    len: usize,
) -> CkStatus {
    guard(|| {
        let m = matrix_ref(m, "matrix")?;
        let data = m.data();
        if len < data.len() {
            return Err(Fail(
                CkStatus::Domain,
                format!("buffer holds {len} values, need {}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// `A^(k)` by the minor oracle or the Kronecker route.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_mult_compound(
    a: *const CkMatrix,
    k: usize,
    method: u32,
    cap: usize,
    out: *mut *mut CkMatrix,
) -> CkStatus {
    guard(|| {
        let a = matrix_ref(a, "matrix")?;
        let lim = limits(cap);
        let r = match method {
            CK_MULT_ORACLE => mult_compound_oracle(a, k, &lim)?,
            CK_MULT_KRON => mult_compound_kron(a, k, &lim)?,
            other => return Err(Fail(CkStatus::Domain, format!("unknown method {other}"))),
        };
        write_out(out, CkMatrix(r))
    })
}

/// `A^[k]` by the entrywise, Kronecker or ε-polynomial route.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_add_compound(
    a: *const CkMatrix,
    k: usize,
    method: u32,
    cap: usize,
    out: *mut *mut CkMatrix,
) -> CkStatus {
    guard(|| {
        let a = matrix_ref(a, "matrix")?;
        let lim = limits(cap);
        let r = match method {
            CK_ADD_ENTRYWISE => add_compound_entrywise(a, k, &lim)?,
            CK_ADD_KRON => add_compound_kron(a, k, &lim)?,
            CK_ADD_EPS => add_compound_eps_limit(a, k, &default_eps(k), &lim)?,
            other => return Err(Fail(CkStatus::Domain, format!("unknown method {other}"))),
        };
        write_out(out, CkMatrix(r))
    })
}

/// `(AB)^[k]` from the columns of `A` (n x m) and rows of `B` (m x n).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_product_add_compound(
    a: *const CkMatrix,
    b: *const CkMatrix,
    k: usize,
    cap: usize,
    out: *mut *mut CkMatrix,
) -> CkStatus {
    guard(|| {
        let a = matrix_ref(a, "A")?;
        let b = matrix_ref(b, "B")?;
        let r = product_add_compound(a, b, k, &limits(cap))?;
        write_out(out, CkMatrix(r))
    })
}

/// 1-based position of the increasing sequence `seq[0..k]` in `Q(n, k)`.
///
/// # Safety
/// `seq` must point to `k` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_rank_q(n: usize, seq: *const usize, k: usize, out: *mut usize) -> CkStatus {
    guard(|| {
        let s = IndexSeq::new(n, read_slice(seq, k, "sequence")?.to_vec())?;
        let p = rank_q(&s)?;
        out.as_mut().map(|o| *o = p).ok_or_else(|| null("output pointer"))
    })
}

/// 1-based position of `seq[0..k]` in `R(n, k)`.
///
/// # Safety
/// `seq` must point to `k` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_rank_r(n: usize, seq: *const usize, k: usize, out: *mut usize) -> CkStatus {
    guard(|| {
        let s = IndexSeq::new(n, read_slice(seq, k, "sequence")?.to_vec())?;
        let p = rank_r(&s)?;
        out.as_mut().map(|o| *o = p).ok_or_else(|| null("output pointer"))
    })
}

unsafe fn write_seq(s: &IndexSeq, out: *mut usize, k: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(s.entries().as_ptr(), out, k);
    Ok(())
}

/// Writes the `p`-th (1-based) element of `Q(n, k)` into `out[0..k]`.
///
/// # Safety
/// `out` must be writable for `k` values.
#[no_mangle]
pub unsafe extern "C" fn ck_unrank_q(n: usize, k: usize, p: usize, out: *mut usize) -> CkStatus {
    guard(|| write_seq(&unrank_q(n, k, p)?, out, k))
}

/// Writes the `p`-th (1-based) element of `R(n, k)` into `out[0..k]`.
///
/// # Safety
/// `out` must be writable for `k` values.
#[no_mangle]
pub unsafe extern "C" fn ck_unrank_r(n: usize, k: usize, p: usize, out: *mut usize) -> CkStatus {
    guard(|| write_seq(&unrank_r(n, k, p)?, out, k))
}

/// Builds `M_{n,k}` (`which = CK_LIFT_M`) or `L_{n,k}` (`CK_LIFT_L`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_lift(
    n: usize,
    k: usize,
    which: u32,
    cap: usize,
    out: *mut *mut CkSelector,
) -> CkStatus {
    guard(|| {
        let lim = limits(cap);
        let s = match which {
            CK_LIFT_M => build_m(n, k, &lim)?,
            CK_LIFT_L => build_l(n, k, &lim)?,
            other => return Err(Fail(CkStatus::Domain, format!("unknown selector {other}"))),
        };
        write_out(out, CkSelector(s))
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ck_selector_free(s: *mut CkSelector) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ck_selector_rows(s: *const CkSelector) -> usize {
    s.as_ref().map_or(0, |s| s.0.rows())
}

/// # Safety
/// `s` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ck_selector_cols(s: *const CkSelector) -> usize {
    s.as_ref().map_or(0, |s| s.0.cols())
}

/// # Safety
/// `s` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ck_selector_nnz(s: *const CkSelector) -> usize {
    s.as_ref().map_or(0, |s| s.0.nnz())
}

/// Exports the sorted 1-based triplets. Each buffer must hold `nnz` values.
///
/// # Safety
/// The three buffers must be writable for `len` values each.
#[no_mangle]
pub unsafe extern "C" fn ck_selector_triplets(
    s: *const CkSelector,
    rows: *mut usize,
    cols: *mut usize,
    signs: *mut i8,
    len: usize,
) -> CkStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(|| null("selector"))?.0;
        let trip = s.triplets();
        if len < trip.len() {
            return Err(Fail(
                CkStatus::Domain,
                format!("buffers hold {len} triplets, need {}", trip.len()),
            ));
        }
        if rows.is_null() || cols.is_null() || signs.is_null() {
            return Err(null("triplet buffer"));
        }
        for (i, t) in trip.iter().enumerate() {
            *rows.add(i) = t.row;
            *cols.add(i) = t.col;
            *signs.add(i) = t.sign;
        }
        Ok(())
    })
}

/// Sets `*contractive` to 1 when `A^[k]` is Hurwitz, else 0, and
/// `*abscissa` to its spectral abscissa.
///
/// # Safety
/// `a` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ck_k_contraction(
    a: *const CkMatrix,
    k: usize,
    cap: usize,
    contractive: *mut i32,
    abscissa: *mut f64,
) -> CkStatus {
    guard(|| {
        let a = matrix_ref(a, "matrix")?;
        if contractive.is_null() || abscissa.is_null() {
            return Err(null("output pointer"));
        }
        let r = k_contraction_test(a, k, &limits(cap))?;
        *contractive = i32::from(r.verdict == Verdict::Contractive);
        *abscissa = r.abscissa;
        Ok(())
    })
}
