//! Exercises the C ABI from Rust, covering handles, buffers, status codes and errors.

use std::ffi::{CStr, CString};
use std::ptr;

use spectra_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(spectra_last_error()) }.to_string_lossy().into_owned()
}

fn new_matrix(n: usize, v: &[f64]) -> *mut SpectraMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { spectra_matrix_new(n, v.as_ptr(), &mut m) }, SpectraStatus::Ok);
    m
}

#[test]
fn uniform_matrix_quantities() {
    let m = new_matrix(4, &[0.25; 16]);
    unsafe {
        assert_eq!(spectra_matrix_dim(m), 4);
        assert_eq!(spectra_matrix_is_exact(m), 0);
        let (mut phi, mut len, mut exact) = (0.0, 0usize, 0i32);
        let mut wit = [usize::MAX; 4];
        assert_eq!(spectra_phi(m, 0, &mut phi, wit.as_mut_ptr(), &mut len, &mut exact), SpectraStatus::Ok);
        assert!((phi - 0.5).abs() < 1e-14);
        assert_eq!((len, exact), (2, 1));

        let mut r = 0.0;
        let mut u = [0.0; 4];
        let mut v = [0.0; 4];
        assert_eq!(spectra_perron(m, &mut r, u.as_mut_ptr(), v.as_mut_ptr()), SpectraStatus::Ok);
        assert!((r - 1.0).abs() < 1e-14);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((uv - 1.0).abs() < 1e-14);

        let mut tau = 0usize;
        assert_eq!(spectra_mixing_time(m, 0.1, &mut tau), SpectraStatus::Ok);
        assert_eq!(tau, 1);

        let mut sv = [0.0; 4];
        assert_eq!(spectra_singular_values(m, sv.as_mut_ptr()), SpectraStatus::Ok);
        assert!((sv[0] - 1.0).abs() < 1e-14 && sv[1].abs() < 1e-14);
        spectra_matrix_free(m);
    }
}

#[test]
fn exact_rational_eigenvalues() {
    // Directed 3-cycle: eigenvalues are the cube roots of unity.
    let num = [0, 0, 1, 1, 0, 0, 0, 1, 0];
    let den = [1; 9];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(spectra_matrix_new_rational(3, num.as_ptr(), den.as_ptr(), &mut m), SpectraStatus::Ok);
        assert_eq!(spectra_matrix_is_exact(m), 1);
        let mut re = [0.0; 3];
        let mut im = [0.0; 3];
        assert_eq!(spectra_eigenvalues(m, re.as_mut_ptr(), im.as_mut_ptr()), SpectraStatus::Ok);
        assert!((re[0] - 1.0).abs() < 1e-12 && im[0].abs() < 1e-12);
        for k in 1..3 {
            assert!((re[k] + 0.5).abs() < 1e-12);
            assert!((im[k].abs() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        }
        spectra_matrix_free(m);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(spectra_construct_rootn(10, &mut m), SpectraStatus::NotPerfectSquare);
        assert!(m.is_null());
        assert!(last_error().contains("perfect square"));

        assert_eq!(spectra_construct_klawe_vazirani(9, &mut m), SpectraStatus::NotPrime);
        assert_eq!(spectra_construct_beyond_half(ptr::null_mut()), SpectraStatus::NullPointer);

        // Reducible: two disconnected loops.
        let r = new_matrix(2, &[1.0, 0.0, 0.0, 1.0]);
        let mut gap = 0.0;
        assert_eq!(spectra_spectral_gap(r, &mut gap), SpectraStatus::NotIrreducible);
        spectra_matrix_free(r);

        assert_eq!(spectra_spectral_gap(ptr::null(), &mut gap), SpectraStatus::NullPointer);
        assert_eq!(spectra_matrix_dim(ptr::null()), 0);
        spectra_matrix_free(ptr::null_mut());

        let bad = [0xffu8, 0];
        let mut passed = 0;
        assert_eq!(
            spectra_verify(bad.as_ptr().cast(), 1, 0, &mut passed, ptr::null_mut()),
            SpectraStatus::InvalidUtf8
        );
        let name = CString::new("no-such-suite").unwrap();
        assert_eq!(spectra_verify(name.as_ptr(), 1, 0, &mut passed, ptr::null_mut()), SpectraStatus::Parse);

        // Success clears the message.
        let ok = new_matrix(1, &[1.0]);
        assert_eq!(spectra_spectral_gap(ok, &mut gap), SpectraStatus::Ok);
        assert_eq!(last_error(), "");
        spectra_matrix_free(ok);
    }
}

#[test]
fn status_codes_match_library_errors() {
    use spectra::Error;
    let samples = [
        (Error::NotIrreducible, SpectraStatus::NotIrreducible),
        (Error::CapExceeded(3), SpectraStatus::CapExceeded),
        (Error::Io("x".into()), SpectraStatus::Io),
        (Error::DegenerateBoundary, SpectraStatus::DegenerateBoundary),
    ];
    for (e, s) in samples {
        assert_eq!(e.code(), s as i32);
    }
}

#[test]
fn capacity_and_files() {
    unsafe {
        // Symmetric 4-path; s–t capacity between the ends.
        let p = new_matrix(
            4,
            &[0.5, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.5],
        );
        let u = [0usize, 3];
        let a = [1.0, 0.0];
        let mut cap = 0.0;
        assert_eq!(spectra_capacity(p, u.as_ptr(), a.as_ptr(), 2, &mut cap), SpectraStatus::Ok);
        // w = (½, ½, ½, ½): boundary values ½ and 0 across three unit-½ resistors in series.
        assert!((cap - 0.25 * 0.5 / 3.0).abs() < 1e-12, "{cap}");

        let path = std::env::temp_dir().join(format!("spectra_ffi_{}.json", std::process::id()));
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        let fmt = CString::new("json").unwrap();
        assert_eq!(spectra_matrix_write(p, cpath.as_ptr(), fmt.as_ptr()), SpectraStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(spectra_matrix_read(cpath.as_ptr(), &mut q), SpectraStatus::Ok);
        let mut a1 = [0.0; 16];
        let mut a2 = [0.0; 16];
        spectra_matrix_values(p, a1.as_mut_ptr());
        spectra_matrix_values(q, a2.as_mut_ptr());
        assert_eq!(a1, a2);
        let _ = std::fs::remove_file(&path);

        let missing = CString::new("/nonexistent/matrix.json").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(spectra_matrix_read(missing.as_ptr(), &mut r), SpectraStatus::Io);
        spectra_matrix_free(p);
        spectra_matrix_free(q);
    }
}

#[test]
fn verify_suite_through_the_abi() {
    let name = CString::new("main-theorem").unwrap();
    let mut passed = 0;
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(spectra_verify(name.as_ptr(), 5, 7, &mut passed, &mut json), SpectraStatus::Ok);
        assert_eq!(passed, 1);
        let text = CStr::from_ptr(json).to_string_lossy().into_owned();
        spectra_string_free(json);
        assert!(text.contains("\"suite\": \"main-theorem\""));
    }
}

#[test]
fn constructions_have_expected_sizes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(spectra_construct_debruijn(3, &mut m), SpectraStatus::Ok);
        assert_eq!(spectra_matrix_dim(m), 8);
        spectra_matrix_free(m);
        assert_eq!(spectra_construct_chet(5, 40, &mut m), SpectraStatus::Ok);
        assert_eq!(spectra_matrix_dim(m), 5);
        spectra_matrix_free(m);
        assert_eq!(spectra_construct_klawe_vazirani(5, &mut m), SpectraStatus::Ok);
        spectra_matrix_free(m);
    }
}
