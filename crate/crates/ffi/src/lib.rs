//! C interface to `coherent-nse`.
//!
//! Objects are opaque handles created by `*_new`/`*_load` style functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`CnseStatus`]; on failure the message is available from
//! [`cnse_last_error`] on the same thread. Out-parameters are written only on
//! success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use coherent_nse::expansion::io::{load_expansion, save_expansion, CoefficientStorage};
use coherent_nse::expansion::{op_z, Expansion};
use coherent_nse::harness::{self, ExperimentConfig, ExperimentKind, Fault};
use coherent_nse::spectral::io::{load_field, save_field};
use coherent_nse::spectral::{bilinear_b, GevreyIndex, Lattice, SpectralField};
use coherent_nse::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    LatticeMismatch = 4,
    Class = 5,
    Io = 6,
    Parse = 7,
    Solver = 8,
    BlowUp = 9,
    Panic = 10,
}

/// A periodic lattice.
pub struct CnseLattice(Arc<Lattice>);

/// A real divergence-free spectral field.
pub struct CnseField(SpectralField);

/// A term expansion `Σ z^α ξ_α`.
pub struct CnseExpansion(Expansion);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CnseStatus {
    match e {
        Error::Domain { .. } | Error::ImaginaryResidue { .. } | Error::Quadrature { .. } => CnseStatus::Domain,
        Error::LatticeMismatch => CnseStatus::LatticeMismatch,
        Error::Class(_) | Error::NotConjugateClosed(_) | Error::DepthMismatch { .. } | Error::MissingExponent(_) | Error::Sequence(_) => {
            CnseStatus::Class
        }
        Error::Io { .. } => CnseStatus::Io,
        Error::Parse { .. } | Error::Csv(_) => CnseStatus::Parse,
        Error::Solver(_) | Error::NonFinite { .. } => CnseStatus::Solver,
        Error::BlowUp { .. } => CnseStatus::BlowUp,
        Error::InvalidLattice(..) | Error::InvalidGevreyIndex { .. } | Error::IndexOutOfRange { .. } | Error::Config(_) | Error::Fit(_) => {
            CnseStatus::InvalidArgument
        }
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CnseStatus, String)>) -> CnseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CnseStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            CnseStatus::Panic
        }
    }
}

fn lift(e: Error) -> (CnseStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CnseStatus, String) {
    (CnseStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CnseStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, (CnseStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| (CnseStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (CnseStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cnse_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cnse_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A cube `[0, 2π)³` with `n` grid points per side.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cnse_lattice_cube(n: usize, out: *mut *mut CnseLattice) -> CnseStatus {
    guard(|| put(out, CnseLattice(Lattice::cube(n).map_err(lift)?)))
}

/// # Safety
/// `lattice` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cnse_lattice_free(lattice: *mut CnseLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Grid points per side; 0 for a null handle.
///
/// # Safety
/// `lattice` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_lattice_resolution(lattice: *const CnseLattice) -> usize {
    lattice.as_ref().map_or(0, |l| l.0.resolution())
}

/// Number of stored (half-space) modes; 0 for a null handle.
///
/// # Safety
/// `lattice` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_lattice_mode_count(lattice: *const CnseLattice) -> usize {
    lattice.as_ref().map_or(0, |l| l.0.len())
}

/// The zero field.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_zeros(lattice: *const CnseLattice, out: *mut *mut CnseField) -> CnseStatus {
    guard(|| {
        let l = deref(lattice, "lattice")?;
        put(out, CnseField(SpectralField::zeros(&l.0)))
    })
}

/// The Leray projection of a single mode `k` with complex amplitude
/// `re + i im` (its conjugate sits at `-k`).
///
/// # Safety
/// `k`, `re`, `im` must point to three values each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_single_mode(
    lattice: *const CnseLattice,
    k: *const i32,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CnseField,
) -> CnseStatus {
    guard(|| {
        let l = deref(lattice, "lattice")?;
        if k.is_null() || re.is_null() || im.is_null() {
            return Err(null("mode data"));
        }
        let k = [*k, *k.add(1), *k.add(2)];
        if k == [0, 0, 0] || l.0.locate(k).is_none() {
            return Err((CnseStatus::InvalidArgument, format!("mode {k:?} is not retained")));
        }
        let amp = [0, 1, 2].map(|d| Complex64::new(*re.add(d), *im.add(d)));
        put(out, CnseField(SpectralField::single_mode(&l.0, k, amp)))
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_free(field: *mut CnseField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `|A^α e^{σA^{1/2}} u|`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_gevrey_norm(field: *const CnseField, alpha: f64, sigma: f64, out: *mut f64) -> CnseStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let idx = GevreyIndex::new(alpha, sigma).map_err(lift)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.0.gevrey_norm(idx);
        Ok(())
    })
}

/// Coefficient at mode `k` (zero when not retained), written to `re[3]`
/// and `im[3]`.
///
/// # Safety
/// `k` must point to three values, `re` and `im` to room for three.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_coefficient(field: *const CnseField, k: *const i32, re: *mut f64, im: *mut f64) -> CnseStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if k.is_null() || re.is_null() || im.is_null() {
            return Err(null("mode data"));
        }
        let c = f.0.coefficient([*k, *k.add(1), *k.add(2)]);
        for (d, v) in c.iter().enumerate() {
            *re.add(d) = v.re;
            *im.add(d) = v.im;
        }
        Ok(())
    })
}

/// `y += a x`.
///
/// # Safety
/// Pointers must be valid and distinct.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_axpy(y: *mut CnseField, a: f64, x: *const CnseField) -> CnseStatus {
    guard(|| {
        let x = deref(x, "x")?;
        let y = y.as_mut().ok_or_else(|| null("y"))?;
        if !y.0.lattice().same_as(x.0.lattice()) {
            return Err(lift(Error::LatticeMismatch));
        }
        y.0.axpy(a, &x.0);
        Ok(())
    })
}

/// `B(u, v)`, the projected advection term.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_bilinear(u: *const CnseField, v: *const CnseField, out: *mut *mut CnseField) -> CnseStatus {
    guard(|| {
        let (u, v) = (deref(u, "u")?, deref(v, "v")?);
        put(out, CnseField(bilinear_b(&u.0, &v.0).map_err(lift)?))
    })
}

/// # Safety
/// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_load(path: *const c_char, out: *mut *mut CnseField) -> CnseStatus {
    guard(|| {
        let p = path_arg(path, "path")?;
        put(out, CnseField(load_field(&p).map_err(lift)?))
    })
}

/// # Safety
/// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn cnse_field_save(field: *const CnseField, path: *const c_char) -> CnseStatus {
    guard(|| {
        let f = deref(field, "field")?;
        save_field(&path_arg(path, "path")?, &f.0).map_err(lift)
    })
}

/// # Safety
/// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_load(path: *const c_char, out: *mut *mut CnseExpansion) -> CnseStatus {
    guard(|| {
        let p = path_arg(path, "path")?;
        put(out, CnseExpansion(load_expansion(&p).map_err(lift)?))
    })
}

/// Writes the expansion; coefficients go to separate files when `separate`
/// is nonzero.
///
/// # Safety
/// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_save(expansion: *const CnseExpansion, path: *const c_char, separate: i32) -> CnseStatus {
    guard(|| {
        let e = deref(expansion, "expansion")?;
        let storage = if separate != 0 { CoefficientStorage::Separate } else { CoefficientStorage::Inline };
        save_expansion(&path_arg(path, "path")?, &e.0, storage).map_err(lift)
    })
}

/// # Safety
/// `expansion` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_free(expansion: *mut CnseExpansion) {
    if !expansion.is_null() {
        drop(Box::from_raw(expansion));
    }
}

/// Number of terms; 0 for a null handle.
///
/// # Safety
/// `expansion` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_term_count(expansion: *const CnseExpansion) -> usize {
    expansion.as_ref().map_or(0, |e| e.0.len())
}

/// The real field `Σ z^α ξ_α` at time `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_evaluate(expansion: *const CnseExpansion, t: f64, out: *mut *mut CnseField) -> CnseStatus {
    guard(|| {
        let e = deref(expansion, "expansion")?;
        put(out, CnseField(e.0.evaluate(t).map_err(lift)?))
    })
}

/// The term-wise resolvent `Z p`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_expansion_resolvent(expansion: *const CnseExpansion, out: *mut *mut CnseExpansion) -> CnseStatus {
    guard(|| {
        let e = deref(expansion, "expansion")?;
        put(out, CnseExpansion(op_z(&e.0).map_err(lift)?))
    })
}

/// Runs the experiment described by a configuration file, writing its
/// artifacts to `out_dir` (or the configured directory when null).
/// `*passed` is set to 1 when every verdict passes, else 0.
///
/// # Safety
/// `config_path` is a NUL-terminated UTF-8 string; `out_dir` is null or one;
/// `passed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_run_experiment(config_path: *const c_char, out_dir: *const c_char, passed: *mut i32) -> CnseStatus {
    guard(|| {
        let cfg = ExperimentConfig::load(&path_arg(config_path, "config path")?, &[]).map_err(lift)?;
        let dir = if out_dir.is_null() { None } else { Some(path_arg(out_dir, "output directory")?) };
        let dir = cfg.output_dir(dir.as_deref());
        if passed.is_null() {
            return Err(null("passed"));
        }
        let ok = match cfg.kind {
            ExperimentKind::Selftest => harness::run_selftest(cfg.seed, Fault::None).map_err(lift)?.passed(),
            ExperimentKind::LemmaIntegral => {
                let table = harness::run_lemma_table(cfg.lemma().map_err(lift)?).map_err(lift)?;
                std::fs::create_dir_all(&dir).map_err(|e| lift(Error::Io { path: dir.clone(), source: e }))?;
                let path = dir.join(format!("{}.csv", cfg.prefix()));
                let file = std::fs::File::create(&path).map_err(|e| lift(Error::Io { path: path.clone(), source: e }))?;
                table.write_csv(file).map_err(lift)?;
                table.passed()
            }
            _ => {
                let report = harness::run_experiment(&cfg).map_err(lift)?;
                report.save(&dir, &cfg.prefix()).map_err(lift)?;
                report.passed()
            }
        };
        *passed = i32::from(ok);
        Ok(())
    })
}

/// Runs the invariant suite with `seed`; `*passed` is 1 when all hold.
///
/// # Safety
/// `passed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cnse_selftest(seed: u64, passed: *mut i32) -> CnseStatus {
    guard(|| {
        if passed.is_null() {
            return Err(null("passed"));
        }
        *passed = i32::from(harness::run_selftest(seed, Fault::None).map_err(lift)?.passed());
        Ok(())
    })
}
