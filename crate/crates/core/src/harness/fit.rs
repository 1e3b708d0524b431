use serde::Serialize;

use crate::error::{Error, Result};
use crate::timescales::iter_log;

/// Least-squares decay rate of `r` against `ln L_m(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub samples: usize,
}

impl DecayFit {
    /// Whether two fitted slopes agree within `k` combined standard errors.
    pub fn agrees_with(&self, other: &DecayFit, k: f64) -> bool {
        (self.slope - other.slope).abs() <= k * self.stderr.hypot(other.stderr)
    }
}

/// Ordinary least squares of `ln r` on `ln L_m(t)`; needs at least ten
/// samples with `r > 0` and `L_m(t) > 0`.
pub fn fit_decay_exponent(series: &[(f64, f64)], m: i32) -> Result<DecayFit> {
    if series.len() < 10 {
        return Err(Error::Fit(format!("{} samples, need at least 10", series.len())));
    }
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    for &(t, r) in series {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Fit(format!("residual {r} at t = {t} is not positive")));
        }
        let level = iter_log(m, t)?;
        if !(level > 0.0) {
            return Err(Error::Fit(format!("L_{m}({t}) = {level} has no logarithm")));
        }
        xs.push(level.ln());
        ys.push(r.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all samples share one abscissa".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(DecayFit { slope, stderr, intercept, samples: xs.len() })
}

/// `count` points from `a` to `b`, equally spaced in `ln t`.
pub fn log_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..count).map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}
