//! Iterated exponentials and logarithms, and the scale vector
//! `(e^t, t, ln t, ln ln t, …)` kept in log space.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default distance kept from the edge of the scale-vector domain.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// `E_m(t)`: `E_0 = t`, `E_{m+1} = exp(E_m)`.
pub fn iter_exp(m: u32, t: f64) -> f64 {
    (0..m).fold(t, |x, _| x.exp())
}

/// Left end of the domain of `L_m` (`-∞` for `m <= 0`).
pub fn log_domain_bound(m: i32) -> f64 {
    if m <= 0 {
        f64::NEG_INFINITY
    } else {
        iter_exp(m as u32, 0.0)
    }
}

/// `L_m(t)`: `L_{-1} = e^t`, `L_0 = t`, `L_{m+1} = ln L_m`. Requires
/// `t > E_m(0)` when `m >= 1`.
pub fn iter_log(m: i32, t: f64) -> Result<f64> {
    if m < -1 {
        return Err(Error::IndexOutOfRange { index: m, lo: -1, hi: i32::MAX });
    }
    if m == -1 {
        return Ok(t.exp());
    }
    check_domain(m, t, 0.0)?;
    Ok((0..m).fold(t, |x, _| x.ln()))
}

fn check_domain(m: i32, t: f64, margin: f64) -> Result<()> {
    let bound = log_domain_bound(m);
    if t.is_nan() || !(t > bound) || (m > 0 && t < bound + margin) {
        return Err(Error::Domain { what: format!("L_{m}"), t, bound });
    }
    Ok(())
}

/// `L_m'(t) = 1 / (t L_1(t) ⋯ L_{m-1}(t))` for `m >= 1`; `L_0' = 1`.
pub fn iter_log_derivative(m: i32, t: f64) -> Result<f64> {
    if m < 0 {
        return Err(Error::IndexOutOfRange { index: m, lo: 0, hi: i32::MAX });
    }
    check_domain(m, t, 0.0)?;
    let mut prod = 1.0;
    let mut level = t;
    for _ in 0..m {
        prod *= level;
        level = level.ln();
    }
    Ok(1.0 / prod)
}

/// `(ln L_{-1}(t), ln L_0(t), …, ln L_k(t)) = (t, ln t, …, L_{k+1}(t))`.
///
/// `e^t` itself is never formed, so powers with purely imaginary `z_{-1}`
/// exponent stay finite for any `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleVector {
    k: i32,
    t: f64,
    logs: Vec<f64>,
}

impl ScaleVector {
    pub fn new(k: i32, t: f64) -> Result<Self> {
        Self::with_margin(k, t, DEFAULT_MARGIN)
    }

    /// As [`ScaleVector::new`] but requiring `t >= E_k(0) + margin`.
    pub fn with_margin(k: i32, t: f64, margin: f64) -> Result<Self> {
        if k < -1 {
            return Err(Error::IndexOutOfRange { index: k, lo: -1, hi: i32::MAX });
        }
        if !t.is_finite() {
            return Err(Error::Domain { what: format!("scale vector of depth {k}"), t, bound: log_domain_bound(k) });
        }
        if k >= 0 {
            // ln L_k needs L_k > 0, i.e. t > E_k(0)
            let bound = iter_exp(k as u32, 0.0);
            if !(t > bound) || t < bound + margin {
                return Err(Error::Domain { what: format!("scale vector of depth {k}"), t, bound });
            }
        }
        let mut logs = Vec::with_capacity((k + 2) as usize);
        logs.push(t);
        for j in 0..=k {
            let prev = logs[j as usize];
            logs.push(prev.ln());
        }
        Ok(ScaleVector { k, t, logs })
    }

    pub fn depth(&self) -> i32 {
        self.k
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// `ln L_j(t)` for `j = -1..=k`, in that order.
    pub fn log_values(&self) -> &[f64] {
        &self.logs
    }

    /// `ln L_j(t)` for `-1 <= j <= k`.
    pub fn ln_level(&self, j: i32) -> f64 {
        self.logs[(j + 1) as usize]
    }

    /// `L_j(t)` for `0 <= j <= k + 1`.
    pub fn level(&self, j: i32) -> f64 {
        self.logs[j as usize]
    }

    /// `Π_j L_j(t)^{re_j + i im_j}`, with `re`, `im` indexed from `j = -1`.
    pub fn power(&self, re: impl IntoIterator<Item = f64>, im: impl IntoIterator<Item = f64>) -> Complex64 {
        let ln_mag: f64 = re.into_iter().zip(&self.logs).map(|(a, l)| a * l).sum();
        let phase: f64 = im.into_iter().zip(&self.logs).map(|(b, l)| b * l).sum();
        Complex64::from_polar(ln_mag.exp(), phase)
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let s = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 10_000;
    let mut pending = vec![(a, b, gk15(&f, a, b))];
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut done = 0;
    while let Some((lo, hi, (val, err))) = pending.pop() {
        let scale = (hi - lo) / (b - a);
        if err <= (abs_tol + rel_tol * val.abs()) * scale.max(1e-3) || hi - lo < 1e-12 * (b - a).abs() {
            total += val;
            total_err += err;
            continue;
        }
        done += 1;
        if done > MAX_INTERVALS {
            return Err(Error::Quadrature { a, b, error: err });
        }
        let mid = 0.5 * (lo + hi);
        pending.push((lo, mid, gk15(&f, lo, mid)));
        pending.push((mid, hi, gk15(&f, mid, hi)));
    }
    if !total.is_finite() || total_err > 1e-6 * total.abs().max(abs_tol) {
        return Err(Error::Quadrature { a, b, error: total_err });
    }
    Ok(total)
}

/// One row of [`integral_lemma_ratio`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaSample {
    pub t: f64,
    pub integral: f64,
    pub ratio: f64,
}

/// Ratio of `∫_0^t e^{-γ(t-τ)} L_m(T_* + τ)^{-λ} dτ` to `L_m(T_* + t)^{-λ}`
/// on an increasing grid of `t >= 0`.
///
/// The integral is advanced between grid points with
/// `I(t + Δ) = e^{-γΔ} I(t) + ∫_t^{t+Δ} e^{-γ(t+Δ-τ)} g(τ) dτ`.
pub fn integral_lemma_ratio(m: i32, lambda: f64, gamma: f64, t_star: f64, t_grid: &[f64]) -> Result<Vec<LemmaSample>> {
    if !(lambda > 0.0 && gamma > 0.0) {
        return Err(Error::Config(format!("need λ > 0 and γ > 0, got λ = {lambda}, γ = {gamma}")));
    }
    if m < 0 {
        return Err(Error::IndexOutOfRange { index: m, lo: 0, hi: i32::MAX });
    }
    if iter_log(m, t_star)? <= 0.0 {
        return Err(Error::Domain { what: format!("L_{m}"), t: t_star, bound: iter_exp(m as u32 + 1, 0.0) });
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("time grid must be nonnegative and strictly increasing".into()));
    }
    let g = |tau: f64| iter_log(m, t_star + tau).map_or(f64::NAN, |l| l.powf(-lambda));
    let mut out = Vec::with_capacity(t_grid.len());
    let mut prev_t = 0.0;
    let mut integral = 0.0;
    for &t in t_grid {
        if t > prev_t {
            let piece = integrate(|tau| (-gamma * (t - tau)).exp() * g(tau), prev_t, t, 1e-300, 1e-12)?;
            integral = (-gamma * (t - prev_t)).exp() * integral + piece;
        }
        prev_t = t;
        out.push(LemmaSample { t, integral, ratio: integral / g(t) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn iterated_functions() {
        assert_eq!(iter_exp(2, 0.0), E);
        assert!((iter_log(1, E).unwrap() - 1.0).abs() < 1e-15);
        assert!((iter_log(2, E.exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(iter_log(1, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(iter_log(2, 2.0), Err(Error::Domain { .. })));
        assert_eq!(iter_log(0, -3.0).unwrap(), -3.0);
    }

    #[test]
    fn scale_vectors() {
        let s = ScaleVector::new(1, E).unwrap();
        assert_eq!(s.log_values()[0], E);
        assert!((s.log_values()[1] - 1.0).abs() < 1e-15);
        assert!(s.log_values()[2].abs() < 1e-15);
        assert_eq!(ScaleVector::new(0, 1.0).unwrap().log_values(), &[1.0, 0.0]);
        assert!(ScaleVector::new(0, -1.0).is_err());
        assert!(ScaleVector::new(0, 0.0).is_err());
        assert!(ScaleVector::new(-1, -1.0).is_ok());
        let s = ScaleVector::new(2, 20.0).unwrap();
        assert!((s.ln_level(0) - 20f64.ln()).abs() < 1e-15);
        assert!((s.ln_level(1) - 20f64.ln().ln()).abs() < 1e-15);
        assert!(ScaleVector::new(1, 1.0 + 1e-9).is_err());
        assert!(ScaleVector::with_margin(1, 1.0 + 1e-9, 0.0).is_ok());
    }

    #[test]
    fn derivative_formula() {
        assert_eq!(iter_log_derivative(1, 4.0).unwrap(), 0.25);
        let t = E * E;
        assert!((iter_log_derivative(2, t).unwrap() - 1.0 / (2.0 * t)).abs() < 1e-15);
        let t = 4f64.exp();
        let h = 1e-4 * t;
        for m in 1..=3 {
            let fd = (iter_log(m, t + h).unwrap() - iter_log(m, t - h).unwrap()) / (2.0 * h);
            let exact = iter_log_derivative(m, t).unwrap();
            assert!(((fd - exact) / exact).abs() < 1e-8, "m = {m}");
        }
    }

    #[test]
    fn gauss_kronrod_is_exact_on_smooth_integrands() {
        let v = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (1023.0 / 10.0 - 9.0)).abs() < 1e-11);
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-15, 1e-13).unwrap();
        assert!((v - (1.0 - (-50f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn lemma_ratio_examples() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
        let rows = integral_lemma_ratio(0, 1.0, 1.0, 1.0, &grid).unwrap();
        assert_eq!(rows[0].ratio, 0.0);
        assert!((rows[1000].ratio - 1.0).abs() < 2e-3);
        let rows = integral_lemma_ratio(1, 1.0, 1.0, 2.0, &grid).unwrap();
        assert!(rows.iter().all(|r| r.ratio.is_finite()));
    }
}
