use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::expansion::exponent::ExponentVector;
use crate::spectral::{ComplexField, Lattice, SpectralField};
use crate::timescales::ScaleVector;

/// Coefficients below this fraction of the expansion scale are dropped on merge.
pub const DROP_TOLERANCE: f64 = 1e-14;
/// Relative tolerance of the conjugate-closure check.
pub const CLOSURE_TOLERANCE: f64 = 1e-12;
/// Largest imaginary residue, relative to `Σ |z^α| |ξ_α|`, accepted by
/// [`Expansion::evaluate`].
pub const REALNESS_TOLERANCE: f64 = 1e-10;

/// One term `z^α ξ_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exponent: ExponentVector,
    pub coefficient: ComplexField,
}

impl Term {
    pub fn new(exponent: ExponentVector, coefficient: ComplexField) -> Self {
        Term { exponent, coefficient }
    }
}

/// Finite sum `Σ_α z^α ξ_α` in the class `𝒫_m(k, μ)`.
///
/// Terms are merged by exponent and kept in a canonical order, so two
/// expansions with the same content compare equal.
#[derive(Clone, Debug)]
pub struct Expansion {
    lattice: Arc<Lattice>,
    k: i32,
    class_m: i32,
    class_mu: Rational64,
    terms: Vec<Term>,
    conjugate_closed: bool,
}

impl Expansion {
    /// Empty expansion of depth `k` in class `(m, μ)`.
    pub fn zero(lattice: &Arc<Lattice>, k: i32, class_m: i32, class_mu: Rational64) -> Self {
        Expansion { lattice: lattice.clone(), k, class_m, class_mu, terms: Vec::new(), conjugate_closed: true }
    }

    /// Builds an expansion from terms, merging equal exponents. Every exponent
    /// must have depth `k` and lie in `𝓔(m, k, μ)`; conjugate closure is
    /// detected, not required.
    pub fn new(lattice: &Arc<Lattice>, k: i32, class_m: i32, class_mu: Rational64, terms: Vec<Term>) -> Result<Self> {
        if k < -1 || class_m < -1 || class_m > k {
            return Err(Error::Class(format!("class index m = {class_m} is not within -1..={k}")));
        }
        let mut out = Self::zero(lattice, k, class_m, class_mu);
        out.terms = out.merge(terms)?;
        out.conjugate_closed = out.verify_conjugate_closure().is_ok();
        Ok(out)
    }

    /// Internal constructor for operator results whose class and closure are
    /// known from the inputs.
    pub(crate) fn from_parts(
        lattice: &Arc<Lattice>,
        k: i32,
        class_m: i32,
        class_mu: Rational64,
        terms: Vec<Term>,
        conjugate_closed: bool,
    ) -> Result<Self> {
        Self::from_parts_scaled(lattice, k, class_m, class_mu, terms, conjugate_closed, 0.0)
    }

    /// As [`Expansion::from_parts`], dropping terms relative to at least
    /// `reference` rather than only to the largest merged coefficient.
    pub(crate) fn from_parts_scaled(
        lattice: &Arc<Lattice>,
        k: i32,
        class_m: i32,
        class_mu: Rational64,
        terms: Vec<Term>,
        conjugate_closed: bool,
        reference: f64,
    ) -> Result<Self> {
        let mut out = Self::zero(lattice, k, class_m, class_mu);
        out.terms = out.merge_with(terms, reference)?;
        out.conjugate_closed = conjugate_closed;
        Ok(out)
    }

    fn merge(&self, terms: Vec<Term>) -> Result<Vec<Term>> {
        self.merge_with(terms, 0.0)
    }

    fn merge_with(&self, terms: Vec<Term>, reference: f64) -> Result<Vec<Term>> {
        let scale = terms.iter().map(|t| t.coefficient.norm()).fold(reference, f64::max);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for term in terms {
            if !term.coefficient.lattice().same_as(&self.lattice) {
                return Err(Error::LatticeMismatch);
            }
            if term.exponent.depth() != self.k {
                return Err(Error::DepthMismatch { left: self.k, right: term.exponent.depth() });
            }
            if !term.exponent.in_class(self.class_m, self.class_mu) {
                return Err(Error::Class(format!(
                    "exponent {} is not in class (m = {}, μ = {})",
                    term.exponent, self.class_m, self.class_mu
                )));
            }
            match merged.iter_mut().find(|t| t.exponent.matches(&term.exponent)) {
                Some(t) => t.coefficient += &term.coefficient,
                None => merged.push(term),
            }
        }
        merged.retain(|t| {
            let n = t.coefficient.norm();
            n > 0.0 && n > DROP_TOLERANCE * scale
        });
        merged.sort_by(|a, b| a.exponent.canonical_cmp(&b.exponent));
        Ok(merged)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn depth(&self) -> i32 {
        self.k
    }

    pub fn class_m(&self) -> i32 {
        self.class_m
    }

    pub fn class_mu(&self) -> Rational64 {
        self.class_mu
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_conjugate_closed(&self) -> bool {
        self.conjugate_closed
    }

    /// Largest coefficient `H` norm.
    pub fn scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max)
    }

    /// Checks that every exponent lies in `𝓔(m, k, μ)`.
    pub fn classify(&self, m: i32, mu: Rational64) -> Result<()> {
        if let Some(t) = self.terms.iter().find(|t| !t.exponent.in_class(m, mu)) {
            return Err(Error::Class(format!("exponent {} is not in class (m = {m}, μ = {mu})", t.exponent)));
        }
        Ok(())
    }

    /// Checks `ξ_{ᾱ} = conj ξ_α` for every term.
    pub fn verify_conjugate_closure(&self) -> Result<()> {
        for t in &self.terms {
            let partner = self
                .terms
                .iter()
                .find(|u| u.exponent.matches_conj(&t.exponent))
                .ok_or_else(|| Error::NotConjugateClosed(format!("no partner for exponent {}", t.exponent)))?;
            let mismatch = (&partner.coefficient - &t.coefficient.conj()).norm();
            let size = t.coefficient.norm().max(partner.coefficient.norm());
            if mismatch > CLOSURE_TOLERANCE * size {
                return Err(Error::NotConjugateClosed(format!(
                    "coefficient of {} is not the conjugate of its partner (mismatch {mismatch:e})",
                    t.exponent
                )));
            }
        }
        Ok(())
    }

    /// Re-derives the closure flag from the coefficients.
    pub fn recheck_closure(mut self) -> Self {
        self.conjugate_closed = self.verify_conjugate_closure().is_ok();
        self
    }

    /// `Σ z^α ξ_α` at `L̂_k(t)` as a complex field.
    pub fn evaluate_complex(&self, t: f64) -> Result<ComplexField> {
        let s = ScaleVector::new(self.k, t)?;
        let mut acc = ComplexField::zeros(&self.lattice);
        for term in &self.terms {
            acc.axpy(power(&s, &term.exponent), &term.coefficient);
        }
        Ok(acc)
    }

    /// Real value `Σ z^α ξ_α` at `L̂_k(t)`. Refuses expansions that are not
    /// conjugate-closed, and checks the imaginary residue.
    pub fn evaluate(&self, t: f64) -> Result<SpectralField> {
        if !self.conjugate_closed {
            return Err(Error::NotConjugateClosed("cannot evaluate to a real field".into()));
        }
        let (re, residue, scale) = self.evaluate_parts(t)?;
        if residue > REALNESS_TOLERANCE * scale {
            return Err(Error::ImaginaryResidue { residue, scale });
        }
        Ok(re)
    }

    /// `|Im Σ z^α ξ_α| / Σ |z^α| |ξ_α|` at `L̂_k(t)`, zero for an empty sum.
    pub fn imaginary_residue(&self, t: f64) -> Result<f64> {
        let (_, residue, scale) = self.evaluate_parts(t)?;
        Ok(if scale > 0.0 { residue / scale } else { 0.0 })
    }

    fn evaluate_parts(&self, t: f64) -> Result<(SpectralField, f64, f64)> {
        let s = ScaleVector::new(self.k, t)?;
        let mut re = SpectralField::zeros(&self.lattice);
        let mut im = SpectralField::zeros(&self.lattice);
        let mut scale = 0.0;
        for term in &self.terms {
            let c = power(&s, &term.exponent);
            let (u, v) = (term.coefficient.re(), term.coefficient.im());
            re.axpy(c.re, u);
            re.axpy(-c.im, v);
            im.axpy(c.re, v);
            im.axpy(c.im, u);
            scale += c.norm() * term.coefficient.norm();
        }
        Ok((re, im.norm(), scale))
    }

    /// `self + c · other`; the terms of `other` must fit this class.
    pub fn add_scaled(&self, c: Complex64, other: &Expansion) -> Result<Expansion> {
        if other.k != self.k {
            return Err(Error::DepthMismatch { left: self.k, right: other.k });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term::new(t.exponent.clone(), t.coefficient.scale(c))));
        let closed = self.conjugate_closed && other.conjugate_closed && c.im == 0.0;
        Expansion::from_parts(&self.lattice, self.k, self.class_m, self.class_mu, terms, closed)
    }

    pub fn add(&self, other: &Expansion) -> Result<Expansion> {
        self.add_scaled(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Expansion) -> Result<Expansion> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// Same terms, relabelled to a class they also belong to.
    pub fn with_class(&self, m: i32, mu: Rational64) -> Result<Expansion> {
        if m < -1 || m > self.k {
            return Err(Error::Class(format!("class index m = {m} is not within -1..={}", self.k)));
        }
        self.classify(m, mu)?;
        let mut out = self.clone();
        out.class_m = m;
        out.class_mu = mu;
        Ok(out)
    }

    pub(crate) fn map_terms(&self, f: impl Fn(&Term) -> Option<Term>) -> Vec<Term> {
        self.terms.iter().filter_map(f).collect()
    }
}

impl PartialEq for Expansion {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.same_as(&other.lattice)
            && self.k == other.k
            && self.class_m == other.class_m
            && self.class_mu == other.class_mu
            && self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|(a, b)| a.exponent.matches(&b.exponent) && a.coefficient == b.coefficient)
    }
}

/// `z^α` at a scale vector, in log space.
pub fn power(s: &ScaleVector, alpha: &ExponentVector) -> Complex64 {
    use num_traits::ToPrimitive;
    s.power(
        alpha.re_parts().iter().map(|r| r.to_f64().unwrap_or(f64::NAN)),
        alpha.im_parts().iter().copied(),
    )
}
