use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use coherent_nse::expansion::io::{save_expansion, CoefficientStorage};
use coherent_nse::expansion::{Expansion, ExponentVector, Term};
use coherent_nse::spectral::{ComplexField, Lattice, SpectralField};
use coherent_nse_ffi::*;
use num_complex::Complex64;
use num_rational::Rational64;

fn last_error() -> String {
    let p = cnse_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn field_lifecycle() {
    unsafe {
        let mut lat = ptr::null_mut();
        assert_eq!(cnse_lattice_cube(8, &mut lat), CnseStatus::Ok);
        assert_eq!(cnse_lattice_resolution(lat), 8);
        assert!(cnse_lattice_mode_count(lat) > 0);

        let (k, re, im) = ([1, 0, 0], [0.0, 1.0, 0.0], [0.0; 3]);
        let mut u = ptr::null_mut();
        assert_eq!(cnse_field_single_mode(lat, k.as_ptr(), re.as_ptr(), im.as_ptr(), &mut u), CnseStatus::Ok);
        let mut h = 0.0;
        assert_eq!(cnse_field_gevrey_norm(u, 0.0, 0.0, &mut h), CnseStatus::Ok);
        let expected = (2.0 * (2.0 * std::f64::consts::PI).powi(3)).sqrt();
        assert!((h - expected).abs() < 1e-12 * expected);

        // a single shear mode is a steady Euler flow: B(u, u) = 0
        let mut b = ptr::null_mut();
        assert_eq!(cnse_field_bilinear(u, u, &mut b), CnseStatus::Ok);
        let mut nb = 1.0;
        cnse_field_gevrey_norm(b, 0.0, 0.0, &mut nb);
        assert!(nb < 1e-12);

        let mut z = ptr::null_mut();
        assert_eq!(cnse_field_zeros(lat, &mut z), CnseStatus::Ok);
        assert_eq!(cnse_field_axpy(z, 2.0, u), CnseStatus::Ok);
        let (mut cre, mut cim) = ([0.0; 3], [0.0; 3]);
        assert_eq!(cnse_field_coefficient(z, k.as_ptr(), cre.as_mut_ptr(), cim.as_mut_ptr()), CnseStatus::Ok);
        assert_eq!(cre, [0.0, 2.0, 0.0]);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("u.field").to_str().unwrap()).unwrap();
        assert_eq!(cnse_field_save(z, path.as_ptr()), CnseStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(cnse_field_load(path.as_ptr(), &mut back), CnseStatus::Ok);
        let mut nz = 0.0;
        cnse_field_gevrey_norm(back, 0.5, 0.1, &mut nz);
        let mut nz0 = 0.0;
        cnse_field_gevrey_norm(z, 0.5, 0.1, &mut nz0);
        assert_eq!(nz, nz0);

        for f in [u, b, z, back] {
            cnse_field_free(f);
        }
        cnse_lattice_free(lat);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut lat = ptr::null_mut();
        assert_eq!(cnse_lattice_cube(1, &mut lat), CnseStatus::InvalidArgument);
        assert!(lat.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(cnse_field_zeros(ptr::null(), &mut ptr::null_mut()), CnseStatus::NullPointer);
        assert!(last_error().contains("lattice"));

        let mut out = ptr::null_mut();
        let missing = CString::new("/nonexistent/q.exp").unwrap();
        assert_eq!(cnse_expansion_load(missing.as_ptr(), &mut out), CnseStatus::Io);

        let mut norm = 0.0;
        assert_eq!(cnse_lattice_cube(8, &mut lat), CnseStatus::Ok);
        let mut u = ptr::null_mut();
        cnse_field_zeros(lat, &mut u);
        assert_eq!(cnse_field_gevrey_norm(u, -1.0, 0.0, &mut norm), CnseStatus::InvalidArgument);
        assert_eq!(cnse_field_gevrey_norm(u, 0.0, 0.0, &mut norm), CnseStatus::Ok);
        assert!(cnse_last_error().is_null());
        cnse_field_free(u);
        cnse_lattice_free(lat);
    }
}

#[test]
fn expansion_round_trip() {
    let lat = Lattice::cube(8).unwrap();
    let xi = ComplexField::from_real(SpectralField::single_mode(&lat, [1, 0, 0], [0.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0))));
    let e = ExponentVector::real(vec![Rational64::from_integer(0), Rational64::from_integer(-1)]);
    let p = Expansion::new(&lat, 0, 0, Rational64::from_integer(-1), vec![Term::new(e, xi)]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.exp");
    save_expansion(&src, &p, CoefficientStorage::Inline).unwrap();
    unsafe {
        let path = CString::new(src.to_str().unwrap()).unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(cnse_expansion_load(path.as_ptr(), &mut p), CnseStatus::Ok, "{}", last_error());
        assert_eq!(cnse_expansion_term_count(p), 1);
        let mut zp = ptr::null_mut();
        assert_eq!(cnse_expansion_resolvent(p, &mut zp), CnseStatus::Ok);
        let (mut f, mut g) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(cnse_expansion_evaluate(p, 4.0, &mut f), CnseStatus::Ok);
        assert_eq!(cnse_expansion_evaluate(zp, 4.0, &mut g), CnseStatus::Ok);
        let (mut nf, mut ng) = (0.0, 0.0);
        cnse_field_gevrey_norm(f, 0.0, 0.0, &mut nf);
        cnse_field_gevrey_norm(g, 0.0, 0.0, &mut ng);
        // mode |k| = 1: Z divides by the eigenvalue 1
        assert!((nf - ng).abs() < 1e-14 * nf);
        assert_eq!(cnse_expansion_evaluate(p, -1.0, &mut f), CnseStatus::Domain);

        let out = CString::new(dir.path().join("zp.exp").to_str().unwrap()).unwrap();
        assert_eq!(cnse_expansion_save(zp, out.as_ptr(), 1), CnseStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(cnse_expansion_load(out.as_ptr(), &mut again), CnseStatus::Ok);
        assert_eq!(cnse_expansion_term_count(again), 1);
        for e in [p, zp, again] {
            cnse_expansion_free(e);
        }
        cnse_field_free(f);
        cnse_field_free(g);
    }
}

#[test]
fn lemma_experiment_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lemma.toml");
    std::fs::write(
        &cfg,
        "kind = \"lemma-integral\"\n[lemma]\nt_max = 100.0\npoints = 201\ncases = [{ m = 0, lambda = 1.0, gamma = 1.0, t_star = 1.0 }]\n",
    )
    .unwrap();
    let c = CString::new(cfg.to_str().unwrap()).unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    let mut passed = -1;
    unsafe {
        assert_eq!(cnse_run_experiment(c.as_ptr(), out.as_ptr(), &mut passed), CnseStatus::Ok, "{}", last_error());
    }
    assert_eq!(passed, 1);
    assert!(dir.path().join("out/lemma-integral.csv").exists());
}

#[test]
fn header_compiles_and_links_from_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/coherent_nse.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["cnse_lattice_cube", "cnse_field_bilinear", "cnse_expansion_evaluate", "cnse_run_experiment", "cnse_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libcoherent_nse_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check (no cc or no static library)");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "coherent_nse.h"
int main(void) {
    CnseLattice *lat = NULL;
    if (cnse_lattice_cube(8, &lat) != CNSE_STATUS_OK) return 1;
    CnseField *u = NULL;
    int k[3] = {0, 1, 0};
    double re[3] = {1.0, 0.0, 0.0}, im[3] = {0.0, 0.0, 0.0};
    if (cnse_field_single_mode(lat, k, re, im, &u) != CNSE_STATUS_OK) return 2;
    double n = 0.0;
    if (cnse_field_gevrey_norm(u, 0.5, 0.0, &n) != CNSE_STATUS_OK || n <= 0.0) return 3;
    if (cnse_lattice_cube(0, &lat) == CNSE_STATUS_OK || cnse_last_error() == NULL) return 4;
    cnse_field_free(u);
    cnse_lattice_free(lat);
    printf("ok %s\n", cnse_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C smoke test exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
