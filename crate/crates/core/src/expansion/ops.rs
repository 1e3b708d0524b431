//! The term-wise operators `M_j`, `R`, `Z`, `A_C + M_{-1}`, the
//! expansion-level bilinear form, and time differentiation.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expansion::series::{Expansion, Term};
use crate::spectral::{bilinear_b_complex, ComplexField, SpectralField};

/// `(M_j p)(z) = Σ α_j z^α ξ_α`.
pub fn op_m(j: i32, p: &Expansion) -> Result<Expansion> {
    if j < -1 || j > p.depth() {
        return Err(Error::IndexOutOfRange { index: j, lo: -1, hi: p.depth() });
    }
    let terms = p.map_terms(|t| {
        let a = t.exponent.entry(j);
        (a != Complex64::zero()).then(|| Term::new(t.exponent.clone(), t.coefficient.scale(a)))
    });
    Expansion::from_parts(p.lattice(), p.depth(), p.class_m(), p.class_mu(), terms, p.is_conjugate_closed())
}

/// `R p = Σ_{j=0}^{k} z_0^{-1} ⋯ z_j^{-1} M_j p`.
///
/// Class `(m, μ)` maps to `(−1, μ)` when `m = −1`, to `(0, μ − 1)` when
/// `m = 0`, and to `(0, −1)` when `m >= 1`.
pub fn op_r(p: &Expansion) -> Result<Expansion> {
    let k = p.depth();
    if k < 0 {
        return Err(Error::IndexOutOfRange { index: k, lo: 0, hi: i32::MAX });
    }
    let (m, mu) = match p.class_m() {
        -1 => (-1, p.class_mu()),
        0 => (0, p.class_mu() - Rational64::one()),
        _ => (0, -Rational64::one()),
    };
    let mut terms = Vec::new();
    for t in p.terms() {
        for j in 0..=k {
            let a = t.exponent.entry(j);
            if a != Complex64::zero() {
                terms.push(Term::new(t.exponent.lowered_through(j), t.coefficient.scale(a)));
            }
        }
    }
    Expansion::from_parts(p.lattice(), k, m, mu, terms, p.is_conjugate_closed())
}

fn require_bounded_leading(p: &Expansion) -> Result<()> {
    if let Some(t) = p.terms().iter().find(|t| !t.exponent.re(-1).is_zero()) {
        return Err(Error::Class(format!("exponent {} has Re α₋₁ ≠ 0", t.exponent)));
    }
    Ok(())
}

/// `Z p = Σ z^α (A_C + α_{-1})^{-1} ξ_α`; requires `Re α_{-1} = 0` throughout.
pub fn op_z(p: &Expansion) -> Result<Expansion> {
    op_z_with(p, |xi, omega| xi.resolvent_shift_inverse(omega))
}

/// [`op_z`] with a caller-supplied resolvent `(ξ, ω) ↦ (A_C + iω)^{-1} ξ`.
pub fn op_z_with(p: &Expansion, resolvent: impl Fn(&ComplexField, f64) -> ComplexField) -> Result<Expansion> {
    require_bounded_leading(p)?;
    let terms = p.map_terms(|t| Some(Term::new(t.exponent.clone(), resolvent(&t.coefficient, t.exponent.im(-1)))));
    Expansion::from_parts(p.lattice(), p.depth(), p.class_m(), p.class_mu(), terms, p.is_conjugate_closed())
}

/// `(A_C + M_{-1}) p = Σ z^α (A_C + α_{-1}) ξ_α`.
pub fn op_stokes_shifted(p: &Expansion) -> Result<Expansion> {
    let terms = p.map_terms(|t| Some(Term::new(t.exponent.clone(), t.coefficient.apply_stokes_shifted(t.exponent.entry(-1)))));
    Expansion::from_parts(p.lattice(), p.depth(), p.class_m(), p.class_mu(), terms, p.is_conjugate_closed())
}

/// `Σ_{α,β} z^{α+β} B_C(ξ_α, η_β)`.
pub fn bilinear_expansion(p: &Expansion, q: &Expansion) -> Result<Expansion> {
    if p.depth() != q.depth() {
        return Err(Error::DepthMismatch { left: p.depth(), right: q.depth() });
    }
    if !p.lattice().same_as(q.lattice()) {
        return Err(Error::LatticeMismatch);
    }
    let (m, mu) = match p.class_m().cmp(&q.class_m()) {
        std::cmp::Ordering::Equal => (p.class_m(), p.class_mu() + q.class_mu()),
        std::cmp::Ordering::Less => (p.class_m(), p.class_mu()),
        std::cmp::Ordering::Greater => (q.class_m(), q.class_mu()),
    };
    let mut terms = Vec::with_capacity(p.len() * q.len());
    for a in p.terms() {
        for b in q.terms() {
            terms.push(Term::new(a.exponent.add(&b.exponent)?, bilinear_b_complex(&a.coefficient, &b.coefficient)?));
        }
    }
    // size of |u|_∞ |∇v| in the H norm, for deciding what is round-off
    let lat = p.lattice();
    let top = lat.eigenvalues().iter().cloned().fold(0.0, f64::max).sqrt();
    let reference = p.scale() * q.scale() * top / lat.volume().sqrt();
    let closed = p.is_conjugate_closed() && q.is_conjugate_closed();
    Expansion::from_parts_scaled(lat, p.depth(), m, mu, terms, closed, reference)
}

/// `d/dt p(L̂_k(t)) = (M_{-1} p + R p)(L̂_k(t))`.
pub fn time_derivative(p: &Expansion, t: f64) -> Result<SpectralField> {
    let mut v = op_m(-1, p)?.evaluate(t)?;
    v += &op_r(p)?.evaluate(t)?;
    Ok(v)
}

/// Pads every exponent with zeros up to depth `k`.
pub fn embed(p: &Expansion, k: i32) -> Result<Expansion> {
    let mut terms = Vec::with_capacity(p.len());
    for t in p.terms() {
        terms.push(Term::new(t.exponent.embed(k)?, t.coefficient.clone()));
    }
    Expansion::from_parts(p.lattice(), k, p.class_m(), p.class_mu(), terms, p.is_conjugate_closed())
}
