use std::ffi::{c_char, CStr, CString};
use std::ptr;

use apollonian_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        ap_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn bounded(max: f64) -> *mut ApStore {
    let mut s = ptr::null_mut();
    let st = unsafe { ap_store_generate(c("bounded").as_ptr(), true, max, &mut s) };
    assert_eq!(st, ApStatus::Ok, "{}", last_error());
    s
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(ap_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generate_inspect_and_free() {
    let s = bounded(100.0);
    let mut n = 0usize;
    unsafe {
        assert_eq!(ap_store_len(s, &mut n), ApStatus::Ok);
        assert!(n > 4);
        let mut first = ApCircle::default();
        assert_eq!(ap_store_circle(s, 0, &mut first), ApStatus::Ok);
        assert_eq!(first.curvature, -1.0);
        let mut curvatures = Vec::new();
        for i in 0..4 {
            let mut ci = ApCircle::default();
            assert_eq!(ap_store_circle(s, i, &mut ci), ApStatus::Ok);
            curvatures.push(ci.curvature);
        }
        assert_eq!(curvatures, [-1.0, 2.0, 2.0, 3.0]);
        let mut ci = ApCircle::default();
        assert_eq!(ap_store_circle(s, n, &mut ci), ApStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        ap_store_free(s);
        ap_store_free(ptr::null_mut());
    }
}

#[test]
fn counts_and_fits() {
    let s = bounded(2000.0);
    unsafe {
        let (mut count, mut exact) = (0u64, false);
        let st = ap_store_count(s, c("euclidean").as_ptr(), c("disk:0,0,1").as_ptr(), 1e-3, &mut count, &mut exact);
        assert_eq!(st, ApStatus::Ok, "{}", last_error());
        assert!(count > 0 && exact);
        let mut fit = ApFit::default();
        assert_eq!(ap_store_fit_curvature_growth(s, 10.0, 2000.0, 8, &mut fit), ApStatus::Ok);
        assert!((fit.exponent - 1.3).abs() < 0.1, "{fit:?}");
        let st = ap_store_count(s, c("taxicab").as_ptr(), c("disk:0,0,1").as_ptr(), 1e-3, &mut count, &mut exact);
        assert_eq!(st, ApStatus::Config);
        assert!(!last_error().is_empty());
        ap_store_free(s);
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().join("b.apkg").to_str().unwrap());
    let s = bounded(200.0);
    unsafe {
        assert_eq!(ap_store_save(s, path.as_ptr()), ApStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(ap_store_load(path.as_ptr(), &mut t), ApStatus::Ok);
        let (mut a, mut b) = (0, 0);
        ap_store_len(s, &mut a);
        ap_store_len(t, &mut b);
        assert_eq!(a, b);
        let missing = c(dir.path().join("none.apkg").to_str().unwrap());
        let mut u = ptr::null_mut();
        assert_eq!(ap_store_load(missing.as_ptr(), &mut u), ApStatus::Io);
        assert!(u.is_null());
        ap_store_free(s);
        ap_store_free(t);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ap_store_generate(ptr::null(), true, 10.0, &mut s), ApStatus::NullPointer);
        assert_eq!(last_error(), "packing is null");
        assert_eq!(ap_store_len(ptr::null(), ptr::null_mut()), ApStatus::NullPointer);
        let mut x = 0.0;
        assert_eq!(ap_poincare_partial(ptr::null(), 1.5, 3, &mut x), ApStatus::NullPointer);
    }
}

#[test]
fn group_and_dimension_entry_points() {
    unsafe {
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(ap_poincare_partial(c("strip").as_ptr(), 1.35, 4, &mut lo), ApStatus::Ok, "{}", last_error());
        assert_eq!(ap_poincare_partial(c("strip").as_ptr(), 1.35, 6, &mut hi), ApStatus::Ok);
        assert!(hi > lo && lo >= 1.0);
        let mut d = 0.0;
        let st = ap_dimension_estimate(c("bounded").as_ptr(), c("disk:0,0,1").as_ptr(), 4, 10, &mut d);
        assert_eq!(st, ApStatus::Ok, "{}", last_error());
        assert!((d - 1.3057).abs() < 0.05, "{d}");
        let st = ap_dimension_estimate(c("bounded").as_ptr(), c("disk:0,0,1").as_ptr(), 9, 4, &mut d);
        assert_eq!(st, ApStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/apollonian.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    for ty in ["typedef struct ApStore ApStore;", "AP_STATUS_PANIC", "typedef struct ApCircle"] {
        assert!(header.contains(ty), "{ty}");
    }
}
