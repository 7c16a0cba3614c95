use std::ffi::CStr;
use std::ptr;

use ghx_ffi::*;

fn herm(n: usize, re: &[f64], im: Option<&[f64]>) -> *mut GhxHermitian {
    let mut out = ptr::null_mut();
    let status = unsafe { ghx_hermitian_new(n, re.as_ptr(), im.map_or(ptr::null(), |v| v.as_ptr()), &mut out) };
    assert_eq!(status, GhxStatus::Ok);
    out
}

fn diag(values: &[f64]) -> *mut GhxHermitian {
    let n = values.len();
    let mut re = vec![0.0; n * n];
    for (i, v) in values.iter().enumerate() {
        re[i * n + i] = *v;
    }
    herm(n, &re, None)
}

fn identity(n: usize) -> *mut GhxMetric {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ghx_metric_identity(n, &mut g) }, GhxStatus::Ok);
    g
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let written = unsafe { ghx_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(written, ghx_last_error_length().min(511));
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ghx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn sigma_and_eigenvalues_of_a_diagonal_matrix() {
    let a = diag(&[3.0, 1.0, 2.0]);
    let g = identity(3);
    unsafe {
        assert_eq!(ghx_hermitian_dim(a), 3);
        let mut s = 0.0;
        assert_eq!(ghx_sigma(a, g, 2, &mut s), GhxStatus::Ok);
        assert!((s - 11.0).abs() < 1e-12);
        let mut ev = [0.0; 3];
        assert_eq!(ghx_pencil_eigenvalues(a, g, ev.as_mut_ptr(), 3), GhxStatus::Ok);
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut small = [7.0; 2];
        assert_eq!(ghx_pencil_eigenvalues(a, g, small.as_mut_ptr(), 2), GhxStatus::BufferTooSmall);
        assert_eq!(small, [7.0; 2]);
        ghx_hermitian_free(a);
        ghx_metric_free(g);
    }
}

#[test]
fn complex_entries_and_a_nontrivial_metric() {
    // A = [[2, i], [-i, 2]] has eigenvalues 1 and 3; against G = 2I they halve.
    let a = herm(2, &[2.0, 0.0, 0.0, 2.0], Some(&[0.0, 1.0, -1.0, 0.0]));
    let g_form = diag(&[2.0, 2.0]);
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ghx_metric_new(g_form, &mut g), GhxStatus::Ok);
        let mut ev = [0.0; 2];
        assert_eq!(ghx_pencil_eigenvalues(a, g, ev.as_mut_ptr(), 2), GhxStatus::Ok);
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 1.5).abs() < 1e-12);
        let mut member = false;
        let mut margin = 0.0;
        assert_eq!(ghx_in_gamma_m(a, g, 2, 1e-9, &mut member, &mut margin), GhxStatus::Ok);
        assert!(member && margin > 0.0);
        ghx_metric_free(g);
        ghx_hermitian_free(g_form);
        ghx_hermitian_free(a);
    }
}

#[test]
fn mixed_sigma_polarizes() {
    // D(I, B) for B = diag(1, 2): (σ₂(diag(2,3)) − σ₂(I) − σ₂(B)) / 2 = 1.5
    let i2 = diag(&[1.0, 1.0]);
    let b = diag(&[1.0, 2.0]);
    let g = identity(2);
    unsafe {
        let mut d = 0.0;
        let args = [i2 as *const _, b as *const _];
        assert_eq!(ghx_mixed_sigma(args.as_ptr(), 2, g, &mut d), GhxStatus::Ok);
        assert!((d - 1.5).abs() < 1e-12);

        let mut seq = [0.0; 3];
        let mut holds = false;
        assert_eq!(ghx_log_concavity(i2, b, g, 2, seq.as_mut_ptr(), 3, &mut holds), GhxStatus::Ok);
        assert!(holds);
        let mut sorted = seq;
        sorted.sort_by(f64::total_cmp);
        for (got, want) in sorted.iter().zip([1.0, 1.5, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{seq:?}");
        }
        ghx_hermitian_free(i2);
        ghx_hermitian_free(b);
        ghx_metric_free(g);
    }
}

#[test]
fn garding_equality_for_repeated_argument() {
    let a = diag(&[1.0, 2.0, 4.0]);
    let g = identity(3);
    unsafe {
        let args = [a as *const _; 2];
        let mut r = GhxGardingResult::default();
        assert_eq!(ghx_garding_gap(args.as_ptr(), 2, g, &mut r), GhxStatus::Ok);
        assert!(r.holds && r.equality);
        assert!((r.lhs - 14.0).abs() < 1e-12 && r.gap.abs() < 1e-9);
        ghx_hermitian_free(a);
        ghx_metric_free(g);
    }
}

#[test]
fn theorem_a_for_the_determinant_form() {
    // n = m = 2 with α = I: the form is det on 2×2 Hermitian matrices,
    // of signature (1, 0, 3).
    let a = diag(&[1.0, 1.0]);
    let g = identity(2);
    unsafe {
        let args = [a as *const _];
        let mut r = GhxTheoremResult::default();
        assert_eq!(ghx_verify_theorem_a(args.as_ptr(), 1, g, &mut r), GhxStatus::Ok);
        assert_eq!((r.n_plus, r.n_zero, r.n_minus), (1, 0, 3));
        assert!(r.holds && r.max_restricted_eigenvalue < 0.0);
        ghx_hermitian_free(a);
        ghx_metric_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut out = ptr::null_mut();
        let re = [1.0, 1.0, 0.0, 1.0];
        assert_eq!(ghx_hermitian_new(2, re.as_ptr(), ptr::null(), &mut out), GhxStatus::NotHermitian);
        assert!(out.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(ghx_hermitian_new(2, ptr::null(), ptr::null(), &mut out), GhxStatus::NullPointer);
        assert!(last_error().contains("null"));

        let indefinite = diag(&[1.0, -1.0]);
        let mut g = ptr::null_mut();
        assert_eq!(ghx_metric_new(indefinite, &mut g), GhxStatus::NotPositiveDefinite);
        assert!(g.is_null());

        let g3 = identity(3);
        let mut s = 0.0;
        assert_eq!(ghx_sigma(indefinite, g3, 1, &mut s), GhxStatus::DimensionMismatch);
        assert_eq!(ghx_sigma(ptr::null(), g3, 1, &mut s), GhxStatus::NullPointer);

        let args = [indefinite as *const _; 2];
        let mut r = GhxGardingResult::default();
        let g2 = identity(2);
        assert_eq!(ghx_garding_gap(args.as_ptr(), 2, g2, &mut r), GhxStatus::OutsideCone);

        assert_eq!(ghx_metric_identity(0, &mut g), GhxStatus::InvalidArgument);

        ghx_hermitian_free(indefinite);
        ghx_metric_free(g3);
        ghx_metric_free(g2);
        ghx_hermitian_free(ptr::null_mut());
        ghx_metric_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_to_buffer() {
    unsafe {
        let mut s = 0.0;
        assert_eq!(ghx_sigma(ptr::null(), ptr::null(), 1, &mut s), GhxStatus::NullPointer);
        let full = ghx_last_error_length();
        assert!(full > 4);
        let mut buf = [1 as std::ffi::c_char; 4];
        assert_eq!(ghx_last_error_message(buf.as_mut_ptr(), 4), 3);
        assert_eq!(buf[3], 0);
        assert_eq!(ghx_last_error_message(ptr::null_mut(), 0), 0);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/ghx.h");
    for name in [
        "ghx_version",
        "ghx_last_error_length",
        "ghx_last_error_message",
        "ghx_hermitian_new",
        "ghx_hermitian_free",
        "ghx_hermitian_dim",
        "ghx_metric_new",
        "ghx_metric_identity",
        "ghx_metric_free",
        "ghx_pencil_eigenvalues",
        "ghx_sigma",
        "ghx_mixed_sigma",
        "ghx_in_gamma_m",
        "ghx_garding_gap",
        "ghx_verify_theorem_a",
        "ghx_log_concavity",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct GhxHermitian GhxHermitian;"));
}
