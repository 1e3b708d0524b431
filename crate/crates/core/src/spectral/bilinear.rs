//! Pseudo-spectral evaluation of `B(u, v) = P((u·∇)v)` and its
//! complexification.
//!
//! Products are formed on the `n³` grid. Because every field is band-limited
//! to `|k_j| <= cutoff` with `3·cutoff < n`, the retained modes of each
//! product are alias-free, so the result equals the Galerkin truncation of the
//! exact convolution.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::fft::with_grids;
use crate::spectral::field::{ensure_same_lattice, project_mode, scatter_with, unpack_pair, ComplexField, Mode, SpectralField};
use crate::spectral::lattice::Lattice;

type Spectrum = Vec<Complex64>;

fn component(u: &SpectralField, d: usize) -> Spectrum {
    u.coefficients().iter().map(|m| m[d]).collect()
}

/// Spectrum of `∂_j u_i`.
fn derivative(u: &SpectralField, i: usize, j: usize) -> Spectrum {
    u.coefficients()
        .iter()
        .zip(u.lattice().wavevectors())
        .map(|(m, q)| Complex64::new(0.0, q[j]) * m[i])
        .collect()
}

/// Transforms the real functions given by `inputs` to the grid, applies
/// `combine` pointwise, and returns the spectra of its `outputs` results on the
/// stored modes (normalised, not projected).
fn pointwise<const IN: usize, const OUT: usize>(
    lattice: &Lattice,
    inputs: [&Spectrum; IN],
    combine: impl Fn(&[f64; IN], &mut [f64; OUT]),
) -> [Spectrum; OUT] {
    let fft = lattice.fft();
    let len = fft.len();
    let n_in = IN.div_ceil(2);
    let n_out = OUT.div_ceil(2);
    with_grids(n_in + n_out, len, |bufs| {
        let (ins, outs) = bufs.split_at_mut(n_in);
        for (p, buf) in ins.iter_mut().enumerate() {
            let a = inputs[2 * p];
            let b = inputs.get(2 * p + 1);
            scatter_with(lattice, |i| (a[i], b.map_or(Complex64::default(), |b| b[i])), buf);
            fft.inverse(buf);
        }
        let mut x = [0.0; IN];
        let mut y = [0.0; OUT];
        for pt in 0..len {
            for (p, buf) in ins.iter().enumerate() {
                let v = buf[pt];
                x[2 * p] = v.re;
                if 2 * p + 1 < IN {
                    x[2 * p + 1] = v.im;
                }
            }
            combine(&x, &mut y);
            for (p, buf) in outs.iter_mut().enumerate() {
                let im = if 2 * p + 1 < OUT { y[2 * p + 1] } else { 0.0 };
                buf[pt] = Complex64::new(y[2 * p], im);
            }
        }
        let scale = 1.0 / len as f64;
        let mut result: [Spectrum; OUT] = std::array::from_fn(|_| Vec::with_capacity(lattice.len()));
        for (p, buf) in outs.iter_mut().enumerate() {
            fft.forward(buf);
            for i in 0..lattice.len() {
                let (a, b) = unpack_pair(buf, lattice, i);
                result[2 * p].push(a * scale);
                if 2 * p + 1 < OUT {
                    result[2 * p + 1].push(b * scale);
                }
            }
        }
        result
    })
}

fn project(lattice: &Arc<Lattice>, w: &[Spectrum; 3]) -> SpectralField {
    let coeffs = lattice
        .wavevectors()
        .iter()
        .enumerate()
        .map(|(i, q)| project_mode(*q, [w[0][i], w[1][i], w[2][i]]))
        .collect();
    SpectralField::from_raw(lattice, coeffs)
}

/// `B(u, v) = P((u·∇)v)`, truncated to the lattice.
pub fn bilinear_b(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    ensure_same_lattice(u.lattice(), v.lattice())?;
    let lat = u.lattice();
    let uc: [Spectrum; 3] = std::array::from_fn(|d| component(u, d));
    let dv: [Spectrum; 9] = std::array::from_fn(|n| derivative(v, n / 3, n % 3));
    let inputs = [&uc[0], &uc[1], &uc[2], &dv[0], &dv[1], &dv[2], &dv[3], &dv[4], &dv[5], &dv[6], &dv[7], &dv[8]];
    let w = pointwise(lat, inputs, |x, y: &mut [f64; 3]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[0] * x[3 + 3 * i] + x[1] * x[4 + 3 * i] + x[2] * x[5 + 3 * i];
        }
    });
    Ok(project(lat, &w))
}

/// `B(u, u)`, evaluated in divergence form `P ∇·(u ⊗ u)` with fewer
/// transforms. Agrees with [`bilinear_b`] for divergence-free `u`.
pub fn bilinear_b_self(u: &SpectralField) -> SpectralField {
    let lat = u.lattice();
    let uc: [Spectrum; 3] = std::array::from_fn(|d| component(u, d));
    // products ordered (00, 11, 22, 01, 02, 12)
    let p = pointwise(lat, [&uc[0], &uc[1], &uc[2]], |x, y: &mut [f64; 6]| {
        *y = [x[0] * x[0], x[1] * x[1], x[2] * x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]];
    });
    let slot = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (a, b) if a == b => a,
        (0, 1) => 3,
        (0, 2) => 4,
        _ => 5,
    };
    let coeffs = lat
        .wavevectors()
        .iter()
        .enumerate()
        .map(|(n, q)| {
            let w: Mode = std::array::from_fn(|i| (0..3).map(|j| Complex64::new(0.0, q[j]) * p[slot(i, j)][n]).sum());
            project_mode(*q, w)
        })
        .collect();
    SpectralField::from_raw(lat, coeffs)
}

/// `B_C(u₁ + iv₁, u₂ + iv₂) = B(u₁,u₂) − B(v₁,v₂) + i(B(u₁,v₂) + B(v₁,u₂))`.
pub fn bilinear_b_complex(w1: &ComplexField, w2: &ComplexField) -> Result<ComplexField> {
    ensure_same_lattice(w1.lattice(), w2.lattice())?;
    let lat = w1.lattice();
    if w1.im().is_zero() && w2.im().is_zero() {
        return Ok(ComplexField::from_real(bilinear_b(w1.re(), w2.re())?));
    }
    let u1: [Spectrum; 3] = std::array::from_fn(|d| component(w1.re(), d));
    let v1: [Spectrum; 3] = std::array::from_fn(|d| component(w1.im(), d));
    let du2: [Spectrum; 9] = std::array::from_fn(|n| derivative(w2.re(), n / 3, n % 3));
    let dv2: [Spectrum; 9] = std::array::from_fn(|n| derivative(w2.im(), n / 3, n % 3));
    let inputs: [&Spectrum; 24] = std::array::from_fn(|n| match n {
        0..=2 => &u1[n],
        3..=5 => &v1[n - 3],
        6..=14 => &du2[n - 6],
        _ => &dv2[n - 15],
    });
    let w = pointwise(lat, inputs, |x, y: &mut [f64; 6]| {
        for i in 0..3 {
            let mut re = 0.0;
            let mut im = 0.0;
            for j in 0..3 {
                let (uj, vj) = (x[j], x[3 + j]);
                let (du, dv) = (x[6 + 3 * i + j], x[15 + 3 * i + j]);
                re += uj * du - vj * dv;
                im += uj * dv + vj * du;
            }
            y[i] = re;
            y[3 + i] = im;
        }
    });
    let [r0, r1, r2, i0, i1, i2] = w;
    ComplexField::new(project(lat, &[r0, r1, r2]), project(lat, &[i0, i1, i2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unidirectional_shear_does_not_advect_itself() {
        let lat = Lattice::cube(8).unwrap();
        // sin(x₂) e₁
        let u = SpectralField::single_mode(&lat, [0, 1, 0], [Complex64::new(0.0, -0.5), c(0.0), c(0.0)]);
        assert!(bilinear_b(&u, &u).unwrap().norm() < 1e-14);
        assert!(bilinear_b_self(&u).norm() < 1e-14);
    }

    #[test]
    fn lattice_mismatch_is_reported() {
        let a = SpectralField::zeros(&Lattice::cube(8).unwrap());
        let b = SpectralField::zeros(&Lattice::cube(16).unwrap());
        assert!(bilinear_b(&a, &b).is_err());
    }
}
