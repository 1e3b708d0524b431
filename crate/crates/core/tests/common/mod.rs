//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;

use coherent_nse::solver::{integrate_nse_observed, SolverConfig};
use coherent_nse::spectral::{bilinear_b_self, Lattice, Mode, SpectralField};

/// `u(t) = sin(t) v + cos(2t) w` with low-mode `v`, `w`; the force is
/// `u' + Au + B(u, u)`.
pub struct Manufactured {
    pub v: SpectralField,
    pub w: SpectralField,
}

impl Manufactured {
    pub fn new(lat: &Arc<Lattice>) -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let v = SpectralField::leray_project(
            lat,
            [([1, 0, 0], [c(0.0, 0.0), c(0.6, 0.2), c(0.0, -0.3)]), ([0, 1, 1], [c(0.4, 0.0), c(0.0, 0.1), c(0.0, -0.1)])],
        );
        let w = SpectralField::leray_project(
            lat,
            [([0, 2, 0], [c(0.0, 0.5), c(0.0, 0.0), c(0.2, 0.0)]), ([1, -1, 0], [c(0.3, 0.1), c(0.3, 0.1), c(0.0, 0.4)])],
        );
        Manufactured { v, w }
    }

    pub fn exact(&self, t: f64) -> SpectralField {
        let mut u = &self.v * t.sin();
        u.axpy((2.0 * t).cos(), &self.w);
        u
    }

    pub fn force(&self, t: f64) -> SpectralField {
        let u = self.exact(t);
        let mut f = &self.v * t.cos();
        f.axpy(-2.0 * (2.0 * t).sin(), &self.w);
        f += &u.apply_a();
        f += &bilinear_b_self(&u);
        f
    }

    /// Relative error at `t1` when integrating from the exact state at `t0`.
    pub fn error(&self, dt: f64, t0: f64, t1: f64) -> f64 {
        let cfg = SolverConfig::new(dt, t0, t1).with_samples(vec![t1]);
        let end = integrate_nse_observed(&self.exact(t0), |t| Ok(self.force(t)), &cfg, |_, _| Ok(())).unwrap();
        let exact = self.exact(t1);
        let mut diff = end;
        diff -= &exact;
        diff.norm() / exact.norm()
    }
}

/// `P[(u·∇)v]` by summing `(û_p · i q) v̂_q` over all `p + q = k`.
pub fn convolution(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let lat = u.lattice();
    let kmax = lat.cutoff();
    let len = lat.lengths();
    let mut full: Vec<([i32; 3], Mode, Mode)> = Vec::new();
    for a in -kmax..=kmax {
        for b in -kmax..=kmax {
            for c in -kmax..=kmax {
                if [a, b, c] != [0, 0, 0] {
                    full.push(([a, b, c], u.coefficient([a, b, c]), v.coefficient([a, b, c])));
                }
            }
        }
    }
    let raw = lat.modes().iter().map(|&k| {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for (p, up, _) in &full {
            let q = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
            if q.iter().any(|x| x.abs() > kmax) || q == [0, 0, 0] {
                continue;
            }
            let vq = v.coefficient(q);
            let ql = [0, 1, 2].map(|d| 2.0 * std::f64::consts::PI * q[d] as f64 / len[d]);
            let dot: Complex64 = (0..3).map(|d| up[d] * Complex64::new(0.0, ql[d])).sum();
            for d in 0..3 {
                acc[d] += dot * vq[d];
            }
        }
        (k, acc)
    });
    SpectralField::leray_project(lat, raw.collect::<Vec<_>>())
}
