use std::ffi::{CStr, CString};
use std::ptr;

use torus_qmc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tq_last_error()) }.to_string_lossy().into_owned()
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { tq_string_free(s) };
    out
}

#[test]
fn lattice_round_trip() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(tq_lattice(5, 2, &mut p), TqStatus::TqOk);
        assert_eq!(tq_pointset_len(p), 5);
        let (mut xs, mut ys) = ([0.0; 5], [0.0; 5]);
        assert_eq!(tq_pointset_coords(p, xs.as_mut_ptr(), ys.as_mut_ptr(), 5), TqStatus::TqOk);
        assert_eq!(xs[3], 0.6);
        assert_eq!(ys[3], 0.2);
        assert_eq!(tq_pointset_coords(p, xs.as_mut_ptr(), ys.as_mut_ptr(), 4), TqStatus::TqBufferTooSmall);

        let mut q = ptr::null_mut();
        assert_eq!(tq_pointset_new(xs.as_ptr(), ys.as_ptr(), 5, &mut q), TqStatus::TqOk);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(tq_wce(p, ptr::null(), &mut a), TqStatus::TqOk);
        assert_eq!(tq_wce(q, c"1".as_ptr(), &mut b), TqStatus::TqOk);
        assert!((a - b).abs() < 1e-12);
        assert_eq!(tq_discrepancy(p, &mut a), TqStatus::TqOk);
        assert!(a > 0.0);
        tq_pointset_free(p);
        tq_pointset_free(q);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(tq_lattice(6, 2, &mut p), TqStatus::TqInvalidArgument);
        assert!(p.is_null());
        assert!(last_error().contains("coprime"));

        let text = CString::new("0 0\n0.5 1.5\n").unwrap();
        assert_eq!(tq_pointset_parse(text.as_ptr(), &mut p), TqStatus::TqParseError);
        assert!(last_error().contains("line 2"));

        assert_eq!(tq_pointset_parse(ptr::null(), &mut p), TqStatus::TqNullPointer);
        assert_eq!(tq_fibonacci_lattice(1, &mut p), TqStatus::TqOutOfRange);

        let text = CString::new("0 0\n1/2 1/2\n").unwrap();
        assert_eq!(tq_pointset_parse(text.as_ptr(), &mut p), TqStatus::TqOk);
        assert!(last_error().is_empty());
        let mut v = 0.0;
        assert_eq!(tq_wce(p, c"x".as_ptr(), &mut v), TqStatus::TqInvalidArgument);
        let mut r = ptr::null_mut();
        assert_eq!(tq_optimize(3, c"7".as_ptr(), 1, &mut r), TqStatus::TqOutOfRange);
        assert!(r.is_null());
        tq_pointset_free(p);

        assert_eq!(tq_pointset_len(ptr::null()), 0);
        assert!(tq_search_result_json(ptr::null()).is_null());
        tq_pointset_free(ptr::null_mut());
        tq_string_free(ptr::null_mut());
    }
}

#[test]
fn counts_cells() {
    let mut c = 0;
    assert_eq!(unsafe { tq_semi_canonical_count(8, &mut c) }, TqStatus::TqOk);
    let mut n = 0;
    for _ in torus_qmc::perm::enumerate_semi_canonical(8) {
        n += 1;
    }
    assert_eq!(c, n);
}

#[test]
fn optimize_then_certify() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(tq_optimize(5, c"1".as_ptr(), 1, &mut r), TqStatus::TqOk);
        let mut w = 0.0;
        assert_eq!(tq_search_result_wce(r, &mut w), TqStatus::TqOk);

        let mut lat = ptr::null_mut();
        assert_eq!(tq_fibonacci_lattice(5, &mut lat), TqStatus::TqOk);
        let mut wl = 0.0;
        assert_eq!(tq_wce(lat, ptr::null(), &mut wl), TqStatus::TqOk);
        assert!((w - wl).abs() < 1e-9, "{w} vs {wl}");

        let json: serde_json::Value = serde_json::from_str(&take_string(tq_search_result_json(r))).unwrap();
        assert_eq!(json["n"], 5);

        let mut p = ptr::null_mut();
        assert_eq!(tq_search_result_points(r, &mut p), TqStatus::TqOk);
        assert_eq!(tq_pointset_len(p), 5);
        tq_search_result_free(r);

        let mut c = ptr::null_mut();
        assert_eq!(tq_certify(lat, ptr::null(), 0.0, 2, &mut c), TqStatus::TqOk);
        let mut o = TqOutcome::TqIncomplete;
        assert_eq!(tq_certificate_outcome(c, &mut o), TqStatus::TqOk);
        assert_eq!(o, TqOutcome::TqCertified);
        let json: serde_json::Value = serde_json::from_str(&take_string(tq_certificate_json(c))).unwrap();
        assert_eq!(json["outcome"], "certified");
        tq_certificate_free(c);

        let mut wrong = ptr::null_mut();
        assert_eq!(tq_lattice(5, 1, &mut wrong), TqStatus::TqOk);
        assert_eq!(tq_certify(wrong, ptr::null(), 0.0, 0, &mut c), TqStatus::TqOk);
        assert_eq!(tq_certificate_outcome(c, &mut o), TqStatus::TqOk);
        assert_eq!(o, TqOutcome::TqRefuted);
        tq_certificate_free(c);

        tq_pointset_free(p);
        tq_pointset_free(lat);
        tq_pointset_free(wrong);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
