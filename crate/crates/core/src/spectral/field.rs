use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft::with_grids;
use crate::spectral::lattice::Lattice;

/// Fourier coefficient of a vector field at one mode.
pub type Mode = [Complex64; 3];

const ZERO: Mode = [Complex64 { re: 0.0, im: 0.0 }; 3];

/// Index `(α, σ)` of the Gevrey–Sobolev norm `|A^α e^{σA^{1/2}} u|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GevreyIndex {
    pub alpha: f64,
    pub sigma: f64,
}

impl GevreyIndex {
    /// The plain `H` norm.
    pub const H: GevreyIndex = GevreyIndex { alpha: 0.0, sigma: 0.0 };
    /// The `V` norm `|A^{1/2} u|`.
    pub const V: GevreyIndex = GevreyIndex { alpha: 0.5, sigma: 0.0 };

    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if alpha.is_finite() && sigma.is_finite() && alpha >= 0.0 && sigma >= 0.0 {
            Ok(GevreyIndex { alpha, sigma })
        } else {
            Err(Error::InvalidGevreyIndex { alpha, sigma })
        }
    }

    /// The same index with `alpha` shifted by `delta` (clamped at zero).
    pub fn shifted(self, delta: f64) -> Self {
        GevreyIndex { alpha: (self.alpha + delta).max(0.0), sigma: self.sigma }
    }

    /// Weight `|k_L|^{4α} e^{2σ|k_L|}` applied to `|û_k|²`.
    fn weight(self, eigenvalue: f64) -> f64 {
        let mut w = 1.0;
        if self.alpha != 0.0 {
            w *= eigenvalue.powf(2.0 * self.alpha);
        }
        if self.sigma != 0.0 {
            w *= (2.0 * self.sigma * eigenvalue.sqrt()).exp();
        }
        w
    }
}

/// `d₀(α, σ)`: the bound `|A^α e^{-σA} v| ≤ d₀(α, σ)|v|` (α ≥ 0, σ > 0).
pub fn d0(alpha: f64, sigma: f64) -> f64 {
    if alpha == 0.0 {
        (-sigma).exp()
    } else {
        (alpha / (std::f64::consts::E * sigma)).powf(alpha)
    }
}

/// Orthogonal projection of one mode onto `{v : k_L · v = 0}`.
pub fn project_mode(q: [f64; 3], v: Mode) -> Mode {
    let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    if q2 == 0.0 {
        return ZERO;
    }
    let dot = (v[0] * q[0] + v[1] * q[1] + v[2] * q[2]) / q2;
    [v[0] - dot * q[0], v[1] - dot * q[1], v[2] - dot * q[2]]
}

/// A real, divergence-free, zero-mean periodic vector field given by its
/// truncated Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    lattice: Arc<Lattice>,
    coeffs: Vec<Mode>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.same_as(&other.lattice) && self.coeffs == other.coeffs
    }
}

pub(crate) fn ensure_same_lattice(a: &Lattice, b: &Lattice) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::LatticeMismatch)
    }
}

impl SpectralField {
    pub fn zeros(lattice: &Arc<Lattice>) -> Self {
        SpectralField { lattice: lattice.clone(), coeffs: vec![ZERO; lattice.len()] }
    }

    /// Leray projection of raw coefficients `k ↦ û_k`.
    ///
    /// Entries for `k` and `-k` are combined into their Hermitian part, so a
    /// conjugate-symmetric input is reproduced exactly before projection.
    /// The zero mode and modes beyond the lattice cutoff are dropped.
    pub fn leray_project<I>(lattice: &Arc<Lattice>, raw: I) -> Self
    where
        I: IntoIterator<Item = ([i32; 3], Mode)>,
    {
        let mut acc = vec![ZERO; lattice.len()];
        let mut hits = vec![0u32; lattice.len()];
        for (k, v) in raw {
            if let Some((i, conj)) = lattice.locate(k) {
                let v = if conj { v.map(|c| c.conj()) } else { v };
                for d in 0..3 {
                    acc[i][d] += v[d];
                }
                hits[i] += 1;
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(hits)
            .zip(lattice.wavevectors())
            .map(|((v, h), q)| {
                let v = if h > 1 { v.map(|c| c / h as f64) } else { v };
                project_mode(*q, v)
            })
            .collect();
        SpectralField { lattice: lattice.clone(), coeffs }
    }

    /// Builds a field from half-space coefficients ordered like
    /// [`Lattice::modes`], checking the divergence constraint.
    pub fn from_half_space(lattice: &Arc<Lattice>, coeffs: Vec<Mode>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::InvalidLattice(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        let field = SpectralField { lattice: lattice.clone(), coeffs };
        let residual = field.divergence_residual();
        if residual > 1e-10 {
            return Err(Error::InvalidLattice(format!("field is not divergence-free (residual {residual:e})")));
        }
        Ok(field)
    }

    pub(crate) fn from_raw(lattice: &Arc<Lattice>, coeffs: Vec<Mode>) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        SpectralField { lattice: lattice.clone(), coeffs }
    }

    /// Field with a single Fourier mode `k` (and its conjugate), projected.
    pub fn single_mode(lattice: &Arc<Lattice>, k: [i32; 3], amplitude: Mode) -> Self {
        Self::leray_project(lattice, [(k, amplitude)])
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// Half-space coefficients ordered like [`Lattice::modes`].
    pub fn coefficients(&self) -> &[Mode] {
        &self.coeffs
    }

    pub(crate) fn coefficients_mut(&mut self) -> &mut [Mode] {
        &mut self.coeffs
    }

    /// `û_k` for any `k` (zero outside the lattice).
    pub fn coefficient(&self, k: [i32; 3]) -> Mode {
        match self.lattice.locate(k) {
            Some((i, false)) => self.coeffs[i],
            Some((i, true)) => self.coeffs[i].map(|c| c.conj()),
            None => ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|m| m.iter().all(|c| c.re == 0.0 && c.im == 0.0))
    }

    /// `|A^α e^{σA^{1/2}} u|`, including the `|Ω|` Parseval factor.
    pub fn gevrey_norm(&self, idx: GevreyIndex) -> f64 {
        self.gevrey_norm_squared(idx).sqrt()
    }

    pub(crate) fn gevrey_norm_squared(&self, idx: GevreyIndex) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(self.lattice.eigenvalues())
            .map(|(m, &lam)| idx.weight(lam) * mode_norm_sqr(m))
            .sum();
        2.0 * self.lattice.volume() * sum
    }

    /// `H` norm.
    pub fn norm(&self) -> f64 {
        self.gevrey_norm(GevreyIndex::H)
    }

    /// `H` inner product `∫_Ω u·v dx`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert!(self.lattice.same_as(&other.lattice), "lattice mismatch");
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (0..3).map(|d| (a[d] * b[d].conj()).re).sum::<f64>())
            .sum();
        2.0 * self.lattice.volume() * sum
    }

    /// Multiplies mode `k` by `factor(|k_L|²)`.
    pub fn map_modes(&self, factor: impl Fn(f64) -> f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.lattice.eigenvalues())
            .map(|(m, &lam)| {
                let f = factor(lam);
                m.map(|c| c * f)
            })
            .collect();
        SpectralField { lattice: self.lattice.clone(), coeffs }
    }

    /// `A^s u`.
    pub fn apply_a_power(&self, s: f64) -> SpectralField {
        self.map_modes(|lam| lam.powf(s))
    }

    pub fn apply_a(&self) -> SpectralField {
        self.map_modes(|lam| lam)
    }

    /// `e^{σA^{1/2}} u`.
    pub fn apply_exp_sqrt_a(&self, sigma: f64) -> SpectralField {
        self.map_modes(|lam| (sigma * lam.sqrt()).exp())
    }

    /// `e^{sA} u`.
    pub fn apply_exp_a(&self, s: f64) -> SpectralField {
        self.map_modes(|lam| (s * lam).exp())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert!(self.lattice.same_as(&x.lattice), "lattice mismatch");
        for (y, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            for d in 0..3 {
                y[d] += v[d] * a;
            }
        }
    }

    /// Largest `|k_L · û_k| / (|k_L| |û_k|)` over nonzero modes.
    pub fn divergence_residual(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.lattice.wavevectors())
            .zip(self.lattice.eigenvalues())
            .filter_map(|((m, q), &lam)| {
                let mag = mode_norm_sqr(m).sqrt();
                (mag > 0.0).then(|| (m[0] * q[0] + m[1] * q[1] + m[2] * q[2]).norm() / (lam.sqrt() * mag))
            })
            .fold(0.0, f64::max)
    }

    /// Point values on the `n³` grid, one array per component, last axis
    /// contiguous.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let fft = self.lattice.fft();
        with_grids(2, fft.len(), |bufs| {
            let (a, b) = bufs.split_at_mut(1);
            scatter_pair(self, 0, Some((self, 1)), &mut a[0]);
            scatter_pair(self, 2, None, &mut b[0]);
            fft.inverse(&mut a[0]);
            fft.inverse(&mut b[0]);
            [
                a[0].iter().map(|c| c.re).collect(),
                a[0].iter().map(|c| c.im).collect(),
                b[0].iter().map(|c| c.re).collect(),
            ]
        })
    }

    /// Leray projection of grid values sampled like [`Self::to_physical`].
    pub fn from_physical(lattice: &Arc<Lattice>, values: [&[f64]; 3]) -> Self {
        let fft = lattice.fft();
        let modes = with_grids(2, fft.len(), |bufs| {
            let (a, b) = bufs.split_at_mut(1);
            for (i, c) in a[0].iter_mut().enumerate() {
                *c = Complex64::new(values[0][i], values[1][i]);
            }
            for (i, c) in b[0].iter_mut().enumerate() {
                *c = Complex64::new(values[2][i], 0.0);
            }
            fft.forward(&mut a[0]);
            fft.forward(&mut b[0]);
            let scale = 1.0 / fft.len() as f64;
            let mut out = vec![ZERO; lattice.len()];
            for (i, m) in out.iter_mut().enumerate() {
                let (x, y) = unpack_pair(&a[0], lattice, i);
                let (z, _) = unpack_pair(&b[0], lattice, i);
                *m = [x * scale, y * scale, z * scale];
            }
            out
        });
        let coeffs = modes
            .into_iter()
            .zip(lattice.wavevectors())
            .map(|(m, q)| project_mode(*q, m))
            .collect();
        SpectralField { lattice: lattice.clone(), coeffs }
    }
}

pub(crate) fn mode_norm_sqr(m: &Mode) -> f64 {
    m[0].norm_sqr() + m[1].norm_sqr() + m[2].norm_sqr()
}

/// Writes `a_d + i b_e` onto the full grid, where `a_d` is component `d` of
/// `a` (and `b_e` likewise, or zero).
pub(crate) fn scatter_pair(a: &SpectralField, d: usize, b: Option<(&SpectralField, usize)>, out: &mut [Complex64]) {
    scatter_with(a.lattice(), |i| (a.coeffs[i][d], b.map_or(Complex64::default(), |(f, e)| f.coeffs[i][e])), out)
}

/// Writes the spectra of two real functions given mode-wise as `pair(i)` onto
/// the grid as `â + i b̂`, covering the whole retained cube.
pub(crate) fn scatter_with(lattice: &Lattice, pair: impl Fn(usize) -> (Complex64, Complex64), out: &mut [Complex64]) {
    let iu = Complex64::i();
    out[0] = Complex64::default();
    for (i, (&g, &ng)) in lattice.grid_index().iter().zip(lattice.neg_grid_index()).enumerate() {
        let (a, b) = pair(i);
        out[g] = a + iu * b;
        out[ng] = a.conj() + iu * b.conj();
    }
}

/// Recovers the spectra `(â_k, b̂_k)` at stored mode `i` from the transform
/// of `a + i b` (unnormalised).
pub(crate) fn unpack_pair(data: &[Complex64], lattice: &Lattice, i: usize) -> (Complex64, Complex64) {
    let f = data[lattice.grid_index()[i]];
    let g = data[lattice.neg_grid_index()[i]].conj();
    ((f + g) * 0.5, (f - g) * Complex64::new(0.0, -0.5))
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().map(|m| m.map(|c| c * a)).collect(),
        }
    }
}

/// An element `u + iv` of the complexified space, kept as the pair of real
/// fields `(u, v)`; the two coefficient sets are never merged.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    re: SpectralField,
    im: SpectralField,
}

impl ComplexField {
    pub fn new(re: SpectralField, im: SpectralField) -> Result<Self> {
        ensure_same_lattice(&re.lattice, &im.lattice)?;
        Ok(ComplexField { re, im })
    }

    pub fn from_real(re: SpectralField) -> Self {
        let im = SpectralField::zeros(&re.lattice);
        ComplexField { re, im }
    }

    pub fn zeros(lattice: &Arc<Lattice>) -> Self {
        ComplexField { re: SpectralField::zeros(lattice), im: SpectralField::zeros(lattice) }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.re.lattice
    }

    pub fn re(&self) -> &SpectralField {
        &self.re
    }

    pub fn im(&self) -> &SpectralField {
        &self.im
    }

    pub fn into_parts(self) -> (SpectralField, SpectralField) {
        (self.re, self.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> ComplexField {
        ComplexField { re: self.re.clone(), im: -&self.im }
    }

    /// `c · w` for a complex scalar `c`.
    pub fn scale(&self, c: Complex64) -> ComplexField {
        let mut re = &self.re * c.re;
        re.axpy(-c.im, &self.im);
        let mut im = &self.im * c.re;
        im.axpy(c.im, &self.re);
        ComplexField { re, im }
    }

    /// `self += c · x`.
    pub fn axpy(&mut self, c: Complex64, x: &ComplexField) {
        self.re.axpy(c.re, &x.re);
        self.re.axpy(-c.im, &x.im);
        self.im.axpy(c.re, &x.im);
        self.im.axpy(c.im, &x.re);
    }

    /// `(|u|²_{α,σ} + |v|²_{α,σ})^{1/2}`.
    pub fn gevrey_norm(&self, idx: GevreyIndex) -> f64 {
        (self.re.gevrey_norm_squared(idx) + self.im.gevrey_norm_squared(idx)).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.gevrey_norm(GevreyIndex::H)
    }

    pub fn map_modes(&self, factor: impl Fn(f64) -> f64) -> ComplexField {
        ComplexField { re: self.re.map_modes(&factor), im: self.im.map_modes(&factor) }
    }

    pub fn apply_a_power(&self, s: f64) -> ComplexField {
        self.map_modes(|lam| lam.powf(s))
    }

    pub fn apply_exp_sqrt_a(&self, sigma: f64) -> ComplexField {
        self.map_modes(|lam| (sigma * lam.sqrt()).exp())
    }

    /// `(A_C + c) w = (Au + au - ωv) + i(ωu + Av + av)` for `c = a + iω`.
    pub fn apply_stokes_shifted(&self, c: Complex64) -> ComplexField {
        let lat = self.lattice();
        let mut re = Vec::with_capacity(lat.len());
        let mut im = Vec::with_capacity(lat.len());
        for ((u, v), &lam) in self.re.coeffs.iter().zip(&self.im.coeffs).zip(lat.eigenvalues()) {
            let d = lam + c.re;
            re.push([0, 1, 2].map(|j| u[j] * d - v[j] * c.im));
            im.push([0, 1, 2].map(|j| u[j] * c.im + v[j] * d));
        }
        ComplexField { re: SpectralField::from_raw(lat, re), im: SpectralField::from_raw(lat, im) }
    }

    /// `(A_C + iω)⁻¹ w`, mode by mode:
    /// `((λu + ωv) + i(λv - ωu)) / (λ² + ω²)` with `λ = |k_L|²`.
    pub fn resolvent_shift_inverse(&self, omega: f64) -> ComplexField {
        let lat = self.lattice();
        let mut re = Vec::with_capacity(lat.len());
        let mut im = Vec::with_capacity(lat.len());
        for ((u, v), &lam) in self.re.coeffs.iter().zip(&self.im.coeffs).zip(lat.eigenvalues()) {
            let den = lam * lam + omega * omega;
            re.push([0, 1, 2].map(|j| (u[j] * lam + v[j] * omega) / den));
            im.push([0, 1, 2].map(|j| (v[j] * lam - u[j] * omega) / den));
        }
        ComplexField { re: SpectralField::from_raw(lat, re), im: SpectralField::from_raw(lat, im) }
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: &ComplexField) -> ComplexField {
        ComplexField { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: &ComplexField) -> ComplexField {
        ComplexField { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Neg for &ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        ComplexField { re: -&self.re, im: -&self.im }
    }
}

impl AddAssign<&ComplexField> for ComplexField {
    fn add_assign(&mut self, rhs: &ComplexField) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}
