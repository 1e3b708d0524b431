use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::fft::Fft3;

/// Truncated Fourier lattice of a periodic box.
///
/// The physical grid has `n` points per axis. Retained wavenumbers satisfy
/// `|k_j| <= cutoff` with `3 * cutoff < n`, so quadratic products computed
/// on the grid are free of aliasing on every retained mode (2/3 rule).
///
/// Only the half space `k3 > 0 || (k3 == 0 && (k2 > 0 || (k2 == 0 && k1 > 0)))`
/// is stored; the other half follows from conjugate symmetry of real fields.
/// The zero mode is never stored.
pub struct Lattice {
    n: usize,
    cutoff: i32,
    lengths: [f64; 3],
    modes: Vec<[i32; 3]>,
    wavevectors: Vec<[f64; 3]>,
    eigenvalues: Vec<f64>,
    grid: Vec<usize>,
    neg_grid: Vec<usize>,
    lookup: HashMap<[i32; 3], usize>,
    fft: Fft3,
}

pub(crate) fn in_half_space(k: [i32; 3]) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] > 0)))
}

impl Lattice {
    /// Lattice on the `(2π)³` box.
    pub fn cube(n: usize) -> Result<Arc<Self>> {
        Self::with_box(n, [TAU; 3])
    }

    /// Lattice on a general box `ℓ₁ × ℓ₂ × ℓ₃` with `max ℓ_j = 2π`.
    pub fn with_box(n: usize, lengths: [f64; 3]) -> Result<Arc<Self>> {
        if n < 4 {
            return Err(Error::InvalidLattice(format!("resolution {n} < 4")));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidLattice(format!("box lengths {lengths:?} must be positive")));
        }
        let longest = lengths.iter().cloned().fold(0.0, f64::max);
        if (longest - TAU).abs() > 1e-12 {
            return Err(Error::InvalidLattice(format!(
                "longest box side is {longest}, expected 2π"
            )));
        }
        let cutoff = ((n - 1) / 3) as i32;
        let wrap = |k: i32| -> usize { k.rem_euclid(n as i32) as usize };
        let flat = |k: [i32; 3]| (wrap(k[0]) * n + wrap(k[1])) * n + wrap(k[2]);

        let mut modes = Vec::new();
        for k3 in -cutoff..=cutoff {
            for k2 in -cutoff..=cutoff {
                for k1 in -cutoff..=cutoff {
                    let k = [k1, k2, k3];
                    if in_half_space(k) {
                        modes.push(k);
                    }
                }
            }
        }
        let wavevectors: Vec<[f64; 3]> = modes
            .iter()
            .map(|k| {
                [
                    TAU * k[0] as f64 / lengths[0],
                    TAU * k[1] as f64 / lengths[1],
                    TAU * k[2] as f64 / lengths[2],
                ]
            })
            .collect();
        let eigenvalues = wavevectors.iter().map(|q| q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).collect();
        let grid = modes.iter().map(|&k| flat(k)).collect();
        let neg_grid = modes.iter().map(|&k| flat([-k[0], -k[1], -k[2]])).collect();
        let lookup = modes.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        Ok(Arc::new(Lattice {
            n,
            cutoff,
            lengths,
            modes,
            wavevectors,
            eigenvalues,
            grid,
            neg_grid,
            lookup,
            fft: Fft3::new(n, cutoff as usize),
        }))
    }

    /// Grid points per axis.
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Largest retained `|k_j|`.
    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    /// `|Ω| = ℓ₁ℓ₂ℓ₃`.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Number of stored (half-space) modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[[i32; 3]] {
        &self.modes
    }

    /// Scaled wavevectors `k_L` of the stored modes.
    pub fn wavevectors(&self) -> &[[f64; 3]] {
        &self.wavevectors
    }

    /// Stokes eigenvalues `|k_L|²` of the stored modes.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Position of `k` in the stored half space; the flag is true when `k`
    /// itself lies in the other half (so the stored value must be conjugated).
    pub fn locate(&self, k: [i32; 3]) -> Option<(usize, bool)> {
        if let Some(&i) = self.lookup.get(&k) {
            return Some((i, false));
        }
        self.lookup.get(&[-k[0], -k[1], -k[2]]).map(|&i| (i, true))
    }

    /// Whether two lattices describe the same discretisation.
    pub fn same_as(&self, other: &Lattice) -> bool {
        std::ptr::eq(self, other) || (self.n == other.n && self.lengths == other.lengths)
    }

    pub(crate) fn grid_index(&self) -> &[usize] {
        &self.grid
    }

    pub(crate) fn neg_grid_index(&self) -> &[usize] {
        &self.neg_grid
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// Physical grid coordinate along `axis` for index `i`.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.lengths[axis] * i as f64 / self.n as f64
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("resolution", &self.n)
            .field("cutoff", &self.cutoff)
            .field("lengths", &self.lengths)
            .finish()
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}
