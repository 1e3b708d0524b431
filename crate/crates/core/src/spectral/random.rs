//! Seeded random fields for property checks.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::spectral::field::{ComplexField, SpectralField};
use crate::spectral::lattice::Lattice;

/// Random divergence-free field supported on `|k_j| <= max_k`, with mode
/// amplitudes damped like `(1 + |k_L|²)^{-decay}`.
pub fn random_field<R: Rng + ?Sized>(lattice: &Arc<Lattice>, rng: &mut R, max_k: i32, decay: f64) -> SpectralField {
    let raw: Vec<_> = lattice
        .modes()
        .iter()
        .zip(lattice.eigenvalues())
        .filter(|(k, _)| k.iter().all(|c| c.abs() <= max_k))
        .map(|(&k, &lam)| {
            let amp = (1.0 + lam).powf(-decay);
            let m = std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp);
            (k, m)
        })
        .collect();
    SpectralField::leray_project(lattice, raw)
}

pub fn random_complex_field<R: Rng + ?Sized>(lattice: &Arc<Lattice>, rng: &mut R, max_k: i32, decay: f64) -> ComplexField {
    let re = random_field(lattice, rng, max_k, decay);
    let im = random_field(lattice, rng, max_k, decay);
    ComplexField::new(re, im).expect("same lattice")
}
