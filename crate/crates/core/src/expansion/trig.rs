//! Real trigonometric form of conjugate-closed expansions.
//!
//! A conjugate pair `z^α ξ + z^{ᾱ} ξ̄` at `L̂_k(t)` equals
//! `2 L̂^{Re α} (cos θ · Re ξ − sin θ · Im ξ)` with
//! `θ = Σ_j Im α_j · ln L_j = Σ_j Im α_j · L_{j+1}`, so a frequency on entry
//! `j` becomes a trigonometric factor in the variable `z_{j+1}`. Expanding
//! `cos θ` and `sin θ` over the variables gives products of single-variable
//! factors.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expansion::exponent::{ExponentVector, FREQUENCY_TOLERANCE};
use crate::expansion::series::{Expansion, Term};
use crate::spectral::{ComplexField, Lattice, SpectralField};
use crate::timescales::ScaleVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `cos(ω z_j)` or `sin(ω z_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigFactor {
    pub variable: i32,
    pub frequency: f64,
    pub kind: Trig,
}

/// `z^{powers} Π factors · coefficient`, with `powers ∈ 𝓔_ℝ(m, k, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub powers: Vec<Rational64>,
    pub factors: Vec<TrigFactor>,
    pub coefficient: SpectralField,
}

/// `z_m^μ Σ` [`TrigTerm`]s over the scale vector of depth `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigExpansion {
    lattice: Arc<Lattice>,
    k: i32,
    class_m: i32,
    class_mu: Rational64,
    terms: Vec<TrigTerm>,
}

impl TrigExpansion {
    pub fn new(lattice: &Arc<Lattice>, k: i32, class_m: i32, class_mu: Rational64, terms: Vec<TrigTerm>) -> Result<Self> {
        for t in &terms {
            if t.powers.len() != (k + 2) as usize {
                return Err(Error::DepthMismatch { left: k, right: t.powers.len() as i32 - 2 });
            }
            let ok = (-1..=class_m).all(|j| t.powers[(j + 1) as usize].is_zero());
            if !ok {
                return Err(Error::Class(format!("trigonometric term powers {:?} are not in the reduced class", t.powers)));
            }
            if t.factors.iter().any(|f| f.variable < 0 || f.variable > k) {
                return Err(Error::Class("trigonometric factor variable out of range".into()));
            }
            if !t.coefficient.lattice().same_as(lattice) {
                return Err(Error::LatticeMismatch);
            }
        }
        Ok(TrigExpansion { lattice: lattice.clone(), k, class_m, class_mu, terms })
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

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    /// True when no term oscillates.
    pub fn is_non_oscillatory(&self) -> bool {
        self.terms.iter().all(|t| t.factors.iter().all(|f| f.frequency == 0.0 || f.kind == Trig::Cos))
    }

    pub fn evaluate(&self, t: f64) -> Result<SpectralField> {
        let s = ScaleVector::new(self.k, t)?;
        let lead = self.class_mu.to_f64().unwrap_or(f64::NAN) * s.ln_level(self.class_m);
        let mut out = SpectralField::zeros(&self.lattice);
        for term in &self.terms {
            let ln_mag: f64 = lead
                + term
                    .powers
                    .iter()
                    .zip(s.log_values())
                    .map(|(a, l)| a.to_f64().unwrap_or(f64::NAN) * l)
                    .sum::<f64>();
            let mut c = ln_mag.exp();
            for f in &term.factors {
                let x = f.frequency * s.level(f.variable);
                c *= match f.kind {
                    Trig::Cos => x.cos(),
                    Trig::Sin => x.sin(),
                };
            }
            out.axpy(c, &term.coefficient);
        }
        Ok(out)
    }
}

/// Rewrites a conjugate-closed expansion in trigonometric form. The result
/// has depth `k + 1` when some `Im α_k ≠ 0`, and depth `k` otherwise.
pub fn to_trig_form(p: &Expansion) -> Result<TrigExpansion> {
    if !p.is_conjugate_closed() {
        return Err(Error::NotConjugateClosed("trigonometric form needs a closed expansion".into()));
    }
    let k = p.depth();
    let uses_last = p.terms().iter().any(|t| t.exponent.im(k).abs() > FREQUENCY_TOLERANCE);
    let depth = if uses_last { k + 1 } else { k };
    let (m, mu) = (p.class_m(), p.class_mu());
    let mut out: Vec<TrigTerm> = Vec::new();
    for term in p.terms().iter().filter(|t| t.exponent.is_pair_representative()) {
        let mut powers = term.exponent.re_parts().to_vec();
        powers.resize((depth + 2) as usize, Rational64::zero());
        powers[(m + 1) as usize] -= mu;
        let (x, y) = (term.coefficient.re(), term.coefficient.im());
        if term.exponent.is_real() {
            push_merged(&mut out, TrigTerm { powers, factors: Vec::new(), coefficient: x.clone() });
            continue;
        }
        let oscillating: Vec<(i32, f64)> = (-1..=k)
            .map(|j| (j + 1, term.exponent.im(j)))
            .filter(|(_, w)| w.abs() > FREQUENCY_TOLERANCE)
            .collect();
        // e^{iθ} = Π (cos θ_v + i sin θ_v); choose a set of sine factors.
        for mask in 0u32..(1 << oscillating.len()) {
            let sines = mask.count_ones();
            let factors = oscillating
                .iter()
                .enumerate()
                .map(|(b, &(variable, frequency))| TrigFactor {
                    variable,
                    frequency,
                    kind: if mask >> b & 1 == 1 { Trig::Sin } else { Trig::Cos },
                })
                .collect();
            // Re e^{iθ} collects even sine counts, Im e^{iθ} odd ones.
            let coefficient = if sines % 2 == 0 {
                let sign = if sines % 4 == 0 { 2.0 } else { -2.0 };
                x * sign
            } else {
                let sign = if sines % 4 == 1 { -2.0 } else { 2.0 };
                y * sign
            };
            push_merged(&mut out, TrigTerm { powers: powers.clone(), factors, coefficient });
        }
    }
    TrigExpansion::new(p.lattice(), depth, m, mu, out)
}

fn push_merged(out: &mut Vec<TrigTerm>, term: TrigTerm) {
    let same = |a: &TrigTerm| {
        a.powers == term.powers
            && a.factors.len() == term.factors.len()
            && a.factors.iter().zip(&term.factors).all(|(f, g)| {
                f.variable == g.variable && f.kind == g.kind && (f.frequency - g.frequency).abs() <= FREQUENCY_TOLERANCE
            })
    };
    match out.iter_mut().find(|a| same(a)) {
        Some(a) => a.coefficient += &term.coefficient,
        None => out.push(term),
    }
}

/// Inverse of [`to_trig_form`]: `cos(ω z_j) = ½(z_{j-1}^{iω} + z_{j-1}^{-iω})`
/// and `sin(ω z_j) = (z_{j-1}^{iω} − z_{j-1}^{-iω}) / 2i`. The expansion has
/// the depth of the trigonometric form.
pub fn from_trig_form(q: &TrigExpansion) -> Result<Expansion> {
    let k = q.k;
    let mut terms = Vec::new();
    for term in &q.terms {
        let mut base = ExponentVector::real(term.powers.clone());
        base = base.clone().with(q.class_m, base.re(q.class_m) + q.class_mu, 0.0);
        // (exponent, complex weight) after expanding the product of factors
        let mut parts = vec![(base, Complex64::new(1.0, 0.0))];
        for f in &term.factors {
            let (plus, minus) = match f.kind {
                Trig::Cos => (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
                Trig::Sin => (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)),
            };
            let j = f.variable - 1;
            parts = parts
                .into_iter()
                .flat_map(|(e, w)| {
                    let shift = |sign: f64| e.clone().with(j, e.re(j), e.im(j) + sign * f.frequency);
                    [(shift(1.0), w * plus), (shift(-1.0), w * minus)]
                })
                .collect();
        }
        for (e, w) in parts {
            let coeff = ComplexField::from_real(term.coefficient.clone()).scale(w);
            terms.push(Term::new(e, coeff));
        }
    }
    Expansion::new(&q.lattice, k, q.class_m, q.class_mu, terms)
}
