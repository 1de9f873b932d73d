//! C ABI over `torus_qmc`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`TqStatus`]; the message of the most recent failure on the calling
//! thread is available from [`tq_last_error`]. Strings returned by the
//! library are released with [`tq_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use torus_qmc::certify::{Certificate, Outcome};
use torus_qmc::driver::{certify_points, cmd_optimize, RunConfig, SearchRecord};
use torus_qmc::kernel::{periodic_l2_discrepancy, wce};
use torus_qmc::lattice::{fibonacci_lattice, rank1_lattice, LatticeSpec};
use torus_qmc::perm::count_semi_canonical;
use torus_qmc::pointfile::parse_points;
use torus_qmc::{Error, Gamma, PointSet, Rational};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TqStatus {
    TqOk = 0,
    TqNullPointer = 1,
    TqInvalidArgument = 2,
    TqParseError = 3,
    TqOutOfRange = 4,
    TqNumerical = 5,
    TqBufferTooSmall = 6,
    TqInternal = 7,
    TqPanic = 8,
}

/// Result of a certification run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TqOutcome {
    TqCertified = 0,
    TqRefuted = 1,
    TqIncomplete = 2,
}

pub struct TqPointSet(PointSet<Rational>);

pub struct TqSearchResult(SearchRecord);

pub struct TqCertificate(Certificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TqStatus {
    match e {
        Error::Parse { .. } => TqStatus::TqParseError,
        Error::OutOfRange(_)
        | Error::Domain { .. }
        | Error::GammaOutOfRange(_)
        | Error::TooLarge { .. }
        | Error::InvalidFibonacciIndex(_)
        | Error::NotFibonacci(_) => TqStatus::TqOutOfRange,
        Error::NotPositiveDefinite | Error::Inconsistent(_) | Error::CellExit { .. } | Error::DualInfeasible(_) => {
            TqStatus::TqNumerical
        }
        Error::Io(_) => TqStatus::TqInternal,
        _ => TqStatus::TqInvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into `TqPanic`.
fn guard(f: impl FnOnce() -> Result<(), (TqStatus, String)>) -> TqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TqStatus::TqOk
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TqStatus::TqPanic
        }
    }
}

fn lib<T>(r: torus_qmc::Result<T>) -> Result<T, (TqStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TqStatus, String) {
    (TqStatus::TqNullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TqStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TqStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (TqStatus::TqInvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn gamma_arg(p: *const c_char) -> Result<Gamma, (TqStatus, String)> {
    if p.is_null() {
        return lib(Gamma::integer(1));
    }
    lib(Gamma::parse(c_str(p, "gamma")?))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (TqStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message describing the most recent failure on this thread; empty after
/// a successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub unsafe extern "C" fn tq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Point set from `n` coordinate pairs in `[0, 1)`. Doubles are taken at
/// their exact binary value.
#[no_mangle]
pub unsafe extern "C" fn tq_pointset_new(xs: *const f64, ys: *const f64, n: usize, out: *mut *mut TqPointSet) -> TqStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(null("coordinates"));
        }
        let xs = std::slice::from_raw_parts(xs, n).to_vec();
        let ys = std::slice::from_raw_parts(ys, n).to_vec();
        let p = lib(PointSet::from_coords(xs, ys).and_then(|p| p.to_exact()))?;
        put(out, TqPointSet(p))
    })
}

/// Point set from point-file text.
#[no_mangle]
pub unsafe extern "C" fn tq_pointset_parse(text: *const c_char, out: *mut *mut TqPointSet) -> TqStatus {
    guard(|| put(out, TqPointSet(lib(parse_points(c_str(text, "text")?))?)))
}

#[no_mangle]
pub unsafe extern "C" fn tq_pointset_free(p: *mut TqPointSet) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tq_pointset_len(p: *const TqPointSet) -> usize {
    p.as_ref().map_or(0, |p| p.0.n())
}

/// Copies the coordinates (rounded to double) into buffers of length `cap`.
#[no_mangle]
pub unsafe extern "C" fn tq_pointset_coords(p: *const TqPointSet, xs: *mut f64, ys: *mut f64, cap: usize) -> TqStatus {
    guard(|| {
        let p = &borrow(p, "point set")?.0;
        if xs.is_null() || ys.is_null() {
            return Err(null("output buffers"));
        }
        if cap < p.n() {
            return Err((TqStatus::TqBufferTooSmall, format!("need {} entries, got {cap}", p.n())));
        }
        let f = p.to_f64();
        for (i, q) in f.points().iter().enumerate() {
            *xs.add(i) = q.x;
            *ys.add(i) = q.y;
        }
        Ok(())
    })
}

/// Rank-1 lattice `{(i/n, i·g/n mod 1)}`.
#[no_mangle]
pub unsafe extern "C" fn tq_lattice(n: usize, g: usize, out: *mut *mut TqPointSet) -> TqStatus {
    guard(|| put(out, TqPointSet(rank1_lattice(lib(LatticeSpec::new(n, g))?))))
}

/// Fibonacci lattice with `F_index` points.
#[no_mangle]
pub unsafe extern "C" fn tq_fibonacci_lattice(index: usize, out: *mut *mut TqPointSet) -> TqStatus {
    guard(|| put(out, TqPointSet(lib(fibonacci_lattice(index))?)))
}

/// Worst-case error for kernel weight `gamma` (a rational string such as
/// `"1"` or `"3/2"`; null means 1).
#[no_mangle]
pub unsafe extern "C" fn tq_wce(p: *const TqPointSet, gamma: *const c_char, out: *mut f64) -> TqStatus {
    guard(|| {
        let p = &borrow(p, "point set")?.0;
        let v = lib(wce(p, &gamma_arg(gamma)?))?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Periodic L2-discrepancy.
#[no_mangle]
pub unsafe extern "C" fn tq_discrepancy(p: *const TqPointSet, out: *mut f64) -> TqStatus {
    guard(|| {
        let v = lib(periodic_l2_discrepancy(&borrow(p, "point set")?.0))?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Number of semi-canonical cells for `n` points.
#[no_mangle]
pub unsafe extern "C" fn tq_semi_canonical_count(n: usize, out: *mut u64) -> TqStatus {
    guard(|| {
        *out.as_mut().ok_or_else(|| null("out"))? = count_semi_canonical(n);
        Ok(())
    })
}

/// Global search over all cells. `threads = 0` uses the default pool.
#[no_mangle]
pub unsafe extern "C" fn tq_optimize(n: usize, gamma: *const c_char, threads: usize, out: *mut *mut TqSearchResult) -> TqStatus {
    guard(|| {
        let mut cfg = RunConfig::new(n, gamma_arg(gamma)?);
        cfg.threads = (threads > 0).then_some(threads);
        let rec = lib(cmd_optimize(&cfg))?.record;
        put(out, TqSearchResult(rec))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tq_search_result_free(r: *mut TqSearchResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn tq_search_result_wce(r: *const TqSearchResult, out: *mut f64) -> TqStatus {
    guard(|| {
        let v = borrow(r, "search result")?.0.wce;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// The optimal point set of a search.
#[no_mangle]
pub unsafe extern "C" fn tq_search_result_points(r: *const TqSearchResult, out: *mut *mut TqPointSet) -> TqStatus {
    guard(|| {
        let p = lib(borrow(r, "search result")?.0.point_set().and_then(|p| p.to_exact()))?;
        put(out, TqPointSet(p))
    })
}

/// The search record as JSON; free with `tq_string_free`. Null on a null
/// handle.
#[no_mangle]
pub unsafe extern "C" fn tq_search_result_json(r: *const TqSearchResult) -> *mut c_char {
    match r.as_ref() {
        Some(r) => into_c_string(r.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// Certifies `candidate` as an optimal point set. `delta <= 0` selects the
/// offset automatically; `threads = 0` uses the default pool.
#[no_mangle]
pub unsafe extern "C" fn tq_certify(
    candidate: *const TqPointSet,
    gamma: *const c_char,
    delta: f64,
    threads: usize,
    out: *mut *mut TqCertificate,
) -> TqStatus {
    guard(|| {
        let p = &borrow(candidate, "candidate")?.0;
        let mut cfg = RunConfig::new(p.n(), gamma_arg(gamma)?);
        cfg.delta = (delta > 0.0).then_some(delta);
        cfg.threads = (threads > 0).then_some(threads);
        put(out, TqCertificate(lib(certify_points(&cfg, p))?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tq_certificate_free(c: *mut TqCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

#[no_mangle]
pub unsafe extern "C" fn tq_certificate_outcome(c: *const TqCertificate, out: *mut TqOutcome) -> TqStatus {
    guard(|| {
        let o = match borrow(c, "certificate")?.0.outcome() {
            Outcome::Certified => TqOutcome::TqCertified,
            Outcome::Refuted => TqOutcome::TqRefuted,
            Outcome::Incomplete => TqOutcome::TqIncomplete,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = o;
        Ok(())
    })
}

/// The full certificate as JSON; free with `tq_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tq_certificate_json(c: *const TqCertificate) -> *mut c_char {
    match c.as_ref() {
        Some(c) => into_c_string(serde_json::to_string_pretty(&c.0.to_json()).unwrap_or_default()),
        None => ptr::null_mut(),
    }
}
