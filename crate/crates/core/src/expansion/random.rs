//! Seeded random expansions for property checks.

use std::sync::Arc;

use num_rational::Rational64;
use rand::Rng;

use crate::error::Result;
use crate::expansion::exponent::ExponentVector;
use crate::expansion::series::{Expansion, Term};
use crate::spectral::random::{random_complex_field, random_field};
use crate::spectral::{ComplexField, Lattice};

/// Shape of a random expansion.
#[derive(Clone, Copy, Debug)]
pub struct RandomExpansionSpec {
    pub depth: i32,
    pub class_m: i32,
    pub class_mu: Rational64,
    /// Number of conjugate pairs.
    pub pairs: usize,
    /// Number of real (self-conjugate) terms.
    pub real_terms: usize,
    /// Allow nonzero `Im α_{-1}`.
    pub oscillate_leading: bool,
    pub max_mode: i32,
}

fn random_exponent<R: Rng + ?Sized>(spec: &RandomExpansionSpec, rng: &mut R, real: bool) -> ExponentVector {
    let mut e = ExponentVector::zero(spec.depth);
    for j in -1..=spec.depth {
        let re = if j < spec.class_m {
            Rational64::from_integer(0)
        } else if j == spec.class_m {
            spec.class_mu
        } else {
            Rational64::new(rng.random_range(-4..=2), 2)
        };
        let im = if real || (j == -1 && !spec.oscillate_leading) {
            0.0
        } else {
            // quarter-integer frequencies keep pair partners distinct
            (rng.random_range(-8..=8) as f64) * 0.25
        };
        e = e.with(j, re, im);
    }
    e
}

/// A conjugate-closed expansion with random exponents in the requested class
/// and random low-mode coefficients.
pub fn random_closed_expansion<R: Rng + ?Sized>(lattice: &Arc<Lattice>, rng: &mut R, spec: &RandomExpansionSpec) -> Result<Expansion> {
    let mut terms = Vec::new();
    for _ in 0..spec.pairs {
        let mut e = random_exponent(spec, rng, false);
        if e.is_real() {
            let j = spec.depth.min(rng.random_range(-1..=spec.depth).max(if spec.oscillate_leading { -1 } else { 0 }));
            e = e.clone().with(j, e.re(j), 0.5);
        }
        let xi = random_complex_field(lattice, rng, spec.max_mode, 0.5);
        terms.push(Term::new(e.conj(), xi.conj()));
        terms.push(Term::new(e, xi));
    }
    for _ in 0..spec.real_terms {
        let e = random_exponent(spec, rng, true);
        terms.push(Term::new(e, ComplexField::from_real(random_field(lattice, rng, spec.max_mode, 0.5))));
    }
    Expansion::new(lattice, spec.depth, spec.class_m, spec.class_mu, terms)
}
