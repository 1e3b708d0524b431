use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Absolute tolerance under which two imaginary parts are the same frequency.
pub const FREQUENCY_TOLERANCE: f64 = 1e-12;

/// Exponent `α = (α_{-1}, α_0, …, α_k)` of a scale-vector power `z^α`.
///
/// Real parts are exact rationals so that decay rates can be compared
/// exactly; imaginary parts (frequencies) are floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentVector {
    re: Vec<Rational64>,
    im: Vec<f64>,
}

impl ExponentVector {
    pub fn new(re: Vec<Rational64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() || re.is_empty() {
            return Err(Error::Class(format!(
                "exponent needs matching nonempty real and imaginary parts ({} vs {})",
                re.len(),
                im.len()
            )));
        }
        if im.iter().any(|b| !b.is_finite()) {
            return Err(Error::Class("non-finite frequency in exponent".into()));
        }
        Ok(ExponentVector { re, im })
    }

    /// The zero exponent of depth `k`.
    pub fn zero(k: i32) -> Self {
        let len = (k + 2) as usize;
        ExponentVector { re: vec![Rational64::zero(); len], im: vec![0.0; len] }
    }

    /// Exponent with real parts only.
    pub fn real(re: Vec<Rational64>) -> Self {
        let im = vec![0.0; re.len()];
        ExponentVector { re, im }
    }

    /// Sets entry `j` (from `-1`) to `re + i·im`.
    pub fn with(mut self, j: i32, re: Rational64, im: f64) -> Self {
        let i = (j + 1) as usize;
        self.re[i] = re;
        self.im[i] = im;
        self
    }

    /// Depth `k`: entries run over `j = -1..=k`.
    pub fn depth(&self) -> i32 {
        self.re.len() as i32 - 2
    }

    pub fn re(&self, j: i32) -> Rational64 {
        self.re[(j + 1) as usize]
    }

    pub fn im(&self, j: i32) -> f64 {
        self.im[(j + 1) as usize]
    }

    pub fn entry(&self, j: i32) -> Complex64 {
        Complex64::new(self.re(j).to_f64().unwrap_or(f64::NAN), self.im(j))
    }

    pub fn re_parts(&self) -> &[Rational64] {
        &self.re
    }

    pub fn im_parts(&self) -> &[f64] {
        &self.im
    }

    pub fn conj(&self) -> Self {
        ExponentVector { re: self.re.clone(), im: self.im.iter().map(|b| -b).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|b| b.abs() <= FREQUENCY_TOLERANCE)
    }

    /// Same exponent up to [`FREQUENCY_TOLERANCE`] on the frequencies.
    pub fn matches(&self, other: &Self) -> bool {
        self.re == other.re && self.im.iter().zip(&other.im).all(|(a, b)| (a - b).abs() <= FREQUENCY_TOLERANCE)
    }

    pub fn matches_conj(&self, other: &Self) -> bool {
        self.re == other.re && self.im.iter().zip(&other.im).all(|(a, b)| (a + b).abs() <= FREQUENCY_TOLERANCE)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.depth() != other.depth() {
            return Err(Error::DepthMismatch { left: self.depth(), right: other.depth() });
        }
        Ok(ExponentVector {
            re: self.re.iter().zip(&other.re).map(|(a, b)| a + b).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a + b).collect(),
        })
    }

    /// Subtracts one from the real parts of entries `0..=j`.
    pub(crate) fn lowered_through(&self, j: i32) -> Self {
        let mut out = self.clone();
        for r in &mut out.re[1..=(j + 1) as usize] {
            *r -= 1;
        }
        out
    }

    /// Pads with zero entries up to depth `k`.
    pub fn embed(&self, k: i32) -> Result<Self> {
        if k < self.depth() {
            return Err(Error::DepthMismatch { left: self.depth(), right: k });
        }
        let mut out = self.clone();
        out.re.resize((k + 2) as usize, Rational64::zero());
        out.im.resize((k + 2) as usize, 0.0);
        Ok(out)
    }

    /// Membership in `𝓔(m, k, μ)`: `Re α_j = 0` for `j < m` and `Re α_m = μ`.
    pub fn in_class(&self, m: i32, mu: Rational64) -> bool {
        m >= -1 && m <= self.depth() && (-1..m).all(|j| self.re(j).is_zero()) && self.re(m) == mu
    }

    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.re
            .iter()
            .zip(&other.re)
            .map(|(a, b)| a.cmp(b))
            .chain(self.im.iter().zip(&other.im).map(|(a, b)| a.total_cmp(b)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// True for the member of a conjugate pair whose first nonzero frequency
    /// is positive (and for real exponents).
    pub(crate) fn is_pair_representative(&self) -> bool {
        self.im.iter().find(|b| b.abs() > FREQUENCY_TOLERANCE).is_none_or(|b| *b > 0.0)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (a, b)) in self.re.iter().zip(&self.im).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match (a.is_zero(), *b == 0.0) {
                (_, true) => write!(f, "{a}")?,
                (true, false) => write!(f, "{b}i")?,
                (false, false) => write!(f, "{a}{b:+}i")?,
            }
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn class_membership_is_exact() {
        let a = ExponentVector::zero(2).with(0, r(-3, 2), 1.0).with(1, r(1, 3), 0.0);
        assert!(a.in_class(0, r(-3, 2)));
        assert!(!a.in_class(0, r(-1, 1)));
        assert!(!a.in_class(1, r(1, 3)));
        assert!(a.in_class(-1, Rational64::zero()));
        let b = a.add(&a.conj()).unwrap();
        assert!(b.is_real());
        assert_eq!(b.re(0), r(-3, 1));
    }

    #[test]
    fn lowering_and_embedding() {
        let a = ExponentVector::zero(1).with(1, r(-1, 1), 0.0);
        let l = a.lowered_through(1);
        assert_eq!(l.re(0), r(-1, 1));
        assert_eq!(l.re(1), r(-2, 1));
        assert_eq!(l.re(-1), r(0, 1));
        let e = a.embed(3).unwrap();
        assert_eq!(e.depth(), 3);
        assert!(a.embed(0).is_err());
    }
}
