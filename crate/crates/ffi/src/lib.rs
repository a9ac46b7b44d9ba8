//! C ABI for the `spectra` library.
//!
//! Matrices cross the boundary as opaque `SpectraMatrix` handles created by the
//! `spectra_matrix_*` and `spectra_construct_*` functions and released with
//! [`spectra_matrix_free`]. Every fallible function returns a [`SpectraStatus`];
//! on failure [`spectra_last_error`] holds a message for the calling thread.
//! Output buffers are caller-allocated and must hold `n` (or `n²`) elements as
//! documented per function. Strings returned by the library are freed with
//! [`spectra_string_free`].
//!
//! Panics never unwind into C: they are caught and reported as
//! [`SpectraStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_rational::BigRational;

use spectra::capacity::{capacity, BoundaryCondition};
use spectra::constructions::{beyond_half, chet, debruijn, klawe_vazirani, rootn};
use spectra::core::{balanced, perron};
use spectra::expansion::{phi_best, EXACT_LIMIT};
use spectra::io::{matrix_to_string, read_matrix, to_json_string, write_matrix, MatrixFormat};
use spectra::mixing::mixing_time;
use spectra::spectra::{eigenvalues, singular_values, spectral_gap};
use spectra::verify::{run_suite, Suite};
use spectra::{Error, Matrix, PrecisionConfig};

/// Result codes. Positive values mirror the library's error kinds.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectraStatus {
    Ok = 0,
    NotIrreducible = 1,
    NoConvergence = 2,
    EmptyCut = 3,
    FullCut = 4,
    TooLarge = 5,
    DegenerateGap = 6,
    DegenerateSigma = 7,
    NotReversible = 8,
    NotPerfectSquare = 9,
    NotPrime = 10,
    PrecisionExhausted = 11,
    SingularBlock = 12,
    DegenerateBoundary = 13,
    SingularClump = 14,
    NotPdSymPart = 15,
    InvalidPath = 16,
    MissingPair = 17,
    ShapeMismatch = 18,
    OutOfRange = 19,
    CapExceeded = 20,
    Parse = 21,
    Io = 22,
    /// A required pointer argument was null.
    NullPointer = -1,
    /// The library panicked; the message describes where.
    Panic = -2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = -3,
}

impl SpectraStatus {
    fn from_error(e: &Error) -> SpectraStatus {
        use SpectraStatus::*;
        match e.code() {
            1 => NotIrreducible,
            2 => NoConvergence,
            3 => EmptyCut,
            4 => FullCut,
            5 => TooLarge,
            6 => DegenerateGap,
            7 => DegenerateSigma,
            8 => NotReversible,
            9 => NotPerfectSquare,
            10 => NotPrime,
            11 => PrecisionExhausted,
            12 => SingularBlock,
            13 => DegenerateBoundary,
            14 => SingularClump,
            15 => NotPdSymPart,
            16 => InvalidPath,
            17 => MissingPair,
            18 => ShapeMismatch,
            19 => OutOfRange,
            20 => CapExceeded,
            21 => Parse,
            _ => Io,
        }
    }
}

/// Opaque matrix handle.
pub struct SpectraMatrix {
    inner: Matrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Internal failure: a status plus its message.
struct Fail(SpectraStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(SpectraStatus::from_error(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpectraStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpectraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpectraStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            SpectraStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const SpectraMatrix) -> Result<&'a Matrix, Fail> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null("matrix"))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn in_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(SpectraStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn put_matrix(out: *mut *mut SpectraMatrix, m: Matrix) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(SpectraMatrix { inner: m }));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).map_err(|_| Fail(SpectraStatus::Parse, "string contains NUL".into()))?.into_raw();
    Ok(())
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn spectra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spectra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn spectra_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a machine-precision matrix from `n*n` row-major doubles.
///
/// # Safety
/// `values` must point to `n*n` readable doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_new(n: usize, values: *const f64, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| {
        let v = in_slice(values, n * n, "values")?;
        let rows: Vec<Vec<f64>> = v.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        put_matrix(out, Matrix::from_rows(&rows)?)
    })
}

/// Creates an exact rational matrix from row-major numerators and denominators.
///
/// # Safety
/// `num` and `den` must each point to `n*n` readable integers.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_new_rational(
    n: usize,
    num: *const i64,
    den: *const i64,
    out: *mut *mut SpectraMatrix,
) -> SpectraStatus {
    guard(|| {
        let p = in_slice(num, n * n, "num")?;
        let q = in_slice(den, n * n, "den")?;
        if q.contains(&0) {
            return Err(Fail(SpectraStatus::OutOfRange, "zero denominator".into()));
        }
        let entries = p.iter().zip(q).map(|(&a, &b)| BigRational::new(a.into(), b.into())).collect();
        put_matrix(out, Matrix::from_rational(n, entries)?)
    })
}

/// Reads a matrix file (JSON or CSV).
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_read(path: *const c_char, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| {
        let p = in_str(path, "path")?;
        put_matrix(out, read_matrix(Path::new(p))?)
    })
}

/// Writes a matrix file; `format` is `json`, `rational-json`, `decimal-json` or `csv`.
///
/// # Safety
/// `m` must be a live handle; `path` and `format` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_write(m: *const SpectraMatrix, path: *const c_char, format: *const c_char) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let f: MatrixFormat = in_str(format, "format")?.parse()?;
        write_matrix(Path::new(in_str(path, "path")?), m, f)?;
        Ok(())
    })
}

/// Serializes a matrix into a newly allocated string (free with [`spectra_string_free`]).
///
/// # Safety
/// `m` must be a live handle, `format` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_to_string(
    m: *const SpectraMatrix,
    format: *const c_char,
    out: *mut *mut c_char,
) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let f: MatrixFormat = in_str(format, "format")?.parse()?;
        put_string(out, matrix_to_string(m, f)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_free(m: *mut SpectraMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the matrix, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_dim(m: *const SpectraMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.n())
}

/// Copies the entries as row-major doubles into `buf` (length `n*n`).
///
/// # Safety
/// `m` must be a live handle and `buf` hold `n*n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_values(m: *const SpectraMatrix, buf: *mut f64) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let n = m.n();
        let out = out_slice(buf, n * n, "buf")?;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = m.get(i, j);
            }
        }
        Ok(())
    })
}

/// Whether the entries are exact rationals (1) or not (0); 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spectra_matrix_is_exact(m: *const SpectraMatrix) -> i32 {
    m.as_ref().map_or(0, |h| i32::from(h.inner.rational().is_some()))
}

/// The rootn family; `n` must be a perfect square.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_construct_rootn(n: usize, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| put_matrix(out, rootn(n)?))
}

/// The de Bruijn matrix on `2^k` vertices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_construct_debruijn(k: u32, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| put_matrix(out, debruijn(k)?))
}

/// The Chet matrix `C_n` at `digits` decimal digits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_construct_chet(n: usize, digits: u32, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| put_matrix(out, chet(n, &PrecisionConfig::decimal(digits)?)?.0))
}

/// The Klawe–Vazirani matrix for an odd prime `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_construct_klawe_vazirani(p: usize, out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| put_matrix(out, klawe_vazirani(p)?))
}

/// The 4×4 matrix with non-expansion ⅓.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_construct_beyond_half(out: *mut *mut SpectraMatrix) -> SpectraStatus {
    guard(|| put_matrix(out, beyond_half()))
}

/// Perron value and vectors: `u` (left) and `v` (right) each of length `n`,
/// normalized so that `Σv = 1` and `⟨u, v⟩ = 1`. Any output may be null.
///
/// # Safety
/// Non-null outputs must be writable for their lengths.
#[no_mangle]
pub unsafe extern "C" fn spectra_perron(m: *const SpectraMatrix, r: *mut f64, u: *mut f64, v: *mut f64) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let pd = perron(m, &PrecisionConfig::machine())?;
        if !r.is_null() {
            *r = pd.r;
        }
        if !u.is_null() {
            out_slice(u, m.n(), "u")?.copy_from_slice(pd.u.as_slice());
        }
        if !v.is_null() {
            out_slice(v, m.n(), "v")?.copy_from_slice(pd.v.as_slice());
        }
        Ok(())
    })
}

/// Edge expansion: exact for `n ≤ limit` (0 selects the default), otherwise the
/// best-interval upper bound. `witness` (length `n`, may be null) receives the
/// minimizing set, `witness_len` its size, `exact` whether the value is exact.
///
/// # Safety
/// Non-null outputs must be writable for their lengths.
#[no_mangle]
pub unsafe extern "C" fn spectra_phi(
    m: *const SpectraMatrix,
    limit: usize,
    phi: *mut f64,
    witness: *mut usize,
    witness_len: *mut usize,
    exact: *mut i32,
) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        if phi.is_null() {
            return Err(null("phi"));
        }
        let pd = perron(m, &PrecisionConfig::machine())?;
        let limit = if limit == 0 { EXACT_LIMIT } else { limit };
        let rep = phi_best(m, &pd, limit)?;
        *phi = rep.phi;
        if !witness.is_null() {
            let w = out_slice(witness, m.n(), "witness")?;
            w[..rep.argmin.members.len()].copy_from_slice(&rep.argmin.members);
        }
        if !witness_len.is_null() {
            *witness_len = rep.argmin.members.len();
        }
        if !exact.is_null() {
            *exact = i32::from(rep.method == spectra::expansion::Method::Exact);
        }
        Ok(())
    })
}

/// `Δ = 1 − Re λ₂/λ₁`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_spectral_gap(m: *const SpectraMatrix, out: *mut f64) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = spectral_gap(m)?;
        Ok(())
    })
}

/// Eigenvalues by descending real part into `re` and `im` (length `n` each).
///
/// # Safety
/// `re` and `im` must hold `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_eigenvalues(m: *const SpectraMatrix, re: *mut f64, im: *mut f64) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let eigs = eigenvalues(m);
        let re = out_slice(re, m.n(), "re")?;
        let im = out_slice(im, m.n(), "im")?;
        for (k, z) in eigs.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Singular values, descending, into `out` (length `n`).
///
/// # Safety
/// `out` must hold `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_singular_values(m: *const SpectraMatrix, out: *mut f64) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        out_slice(out, m.n(), "out")?.copy_from_slice(&singular_values(m.values()));
        Ok(())
    })
}

/// Mixing time `τ_ε` of the Perron-normalized matrix.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_mixing_time(m: *const SpectraMatrix, eps: f64, out: *mut usize) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pd = perron(m, &PrecisionConfig::machine())?;
        *out = mixing_time(m, &pd, eps)?;
        Ok(())
    })
}

/// Capacity of the balanced form of `m` for boundary vertices `u[0..k]` with values `a[0..k]`.
///
/// # Safety
/// `u` and `a` must hold `k` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_capacity(
    m: *const SpectraMatrix,
    u: *const usize,
    a: *const f64,
    k: usize,
    out: *mut f64,
) -> SpectraStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let bc = BoundaryCondition::new(in_slice(u, k, "u")?.to_vec(), in_slice(a, k, "a")?.to_vec());
        let (b, pd) = balanced(m, &PrecisionConfig::machine())?;
        *out = capacity(&b, &pd.w(), &bc)?;
        Ok(())
    })
}

/// Runs a verification suite (`trials` = 0 selects its default). `passed` receives
/// 1 or 0; `report_json` (may be null) receives the full report.
///
/// # Safety
/// `suite` must be a NUL-terminated string and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_verify(
    suite: *const c_char,
    trials: usize,
    seed: u64,
    passed: *mut i32,
    report_json: *mut *mut c_char,
) -> SpectraStatus {
    guard(|| {
        let s: Suite = in_str(suite, "suite")?.parse()?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let trials = if trials == 0 { s.default_trials() } else { trials };
        let rep = run_suite(s, trials, seed)?;
        *passed = i32::from(rep.passed);
        if !report_json.is_null() {
            put_string(report_json, to_json_string(&rep)?)?;
        }
        Ok(())
    })
}
