use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentKind;
use crate::harness::fit::DecayFit;
use crate::spectral::GevreyIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// The expansion is nonzero and residuals decay like powers of `L_m(t)`.
    Algebraic,
    /// The expansion vanishes; residuals decay exponentially and no slope is
    /// tested.
    Exponential,
}

/// Fit and verdict for one truncation order.
#[derive(Clone, Debug, Serialize)]
pub struct Truncation {
    pub order: usize,
    /// `μ_N`, as text and as a float.
    pub rate: String,
    pub rate_value: f64,
    pub fit: Option<DecayFit>,
    /// `s_N + μ_N`; its negative is the measured extra decay.
    pub margin: Option<f64>,
    pub pass: bool,
}

/// Residuals of the run started from a perturbed initial datum.
#[derive(Clone, Debug, Serialize)]
pub struct PairedRun {
    pub perturbation_norm: f64,
    pub residuals: Vec<Vec<f64>>,
    pub fits: Vec<DecayFit>,
    /// Slopes agree with the main run within two combined standard errors.
    pub agree: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub kind: ExperimentKind,
    /// Slopes are fitted against `ln L_m(t)`.
    pub m: i32,
    pub norm: GevreyIndex,
    pub margin_min: f64,
    pub fit_window: [f64; 2],
    pub regime: Regime,
    /// Decay measured in `L_m` with `m >= 2`, which grows too slowly for the
    /// horizon to show more than a trend.
    pub horizon_limited: bool,
    /// Residual norm at `t_start`.
    pub initial_mismatch: f64,
    pub times: Vec<f64>,
    /// `residuals[N-1][s]` is `r_N` at `times[s]`.
    pub residuals: Vec<Vec<f64>>,
    pub truncations: Vec<Truncation>,
    pub paired: Option<PairedRun>,
    pub elapsed_seconds: f64,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.truncations.iter().all(|t| t.pass) && self.paired.as_ref().is_none_or(|p| p.agree.iter().all(|&a| a))
    }

    /// Columns `t, r_1, …, r_N`, then `r_1_perturbed, …` when a paired run
    /// exists.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.residuals.len()).map(|n| format!("r_{n}")));
        if let Some(p) = &self.paired {
            header.extend((1..=p.residuals.len()).map(|n| format!("r_{n}_perturbed")));
        }
        w.write_record(&header)?;
        for (s, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.12e}")];
            row.extend(self.residuals.iter().map(|r| format!("{:.12e}", r[s])));
            if let Some(p) = &self.paired {
                row.extend(p.residuals.iter().map(|r| format!("{:.12e}", r[s])));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(Path::new("<csv>"), e))?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {:?}", self.kind);
        let _ = writeln!(
            s,
            "norm: alpha = {}, sigma = {}; slopes against ln L_{}(t) over [{}, {}]; margin {}",
            self.norm.alpha, self.norm.sigma, self.m, self.fit_window[0], self.fit_window[1], self.margin_min
        );
        let _ = writeln!(s, "initial mismatch: {:.3e}", self.initial_mismatch);
        if self.horizon_limited {
            let _ = writeln!(s, "horizon-limited: L_{}(t) barely grows over the run", self.m);
        }
        if self.regime == Regime::Exponential {
            let _ = writeln!(s, "regime: exponential (zero expansion); slope test vacuous");
        }
        for t in &self.truncations {
            match (&t.fit, t.margin) {
                (Some(f), Some(m)) => {
                    let _ = writeln!(
                        s,
                        "N = {}: mu = {}, slope = {:.4} +/- {:.4} ({} samples), threshold = {:.4}, slope + mu = {:.4}: {}",
                        t.order,
                        t.rate,
                        f.slope,
                        f.stderr,
                        f.samples,
                        -t.rate_value,
                        m,
                        if t.pass { "PASS" } else { "FAIL" }
                    );
                }
                _ => {
                    let _ = writeln!(s, "N = {}: mu = {}, no fit: {}", t.order, t.rate, if t.pass { "PASS" } else { "FAIL" });
                }
            }
        }
        if let Some(p) = &self.paired {
            let _ = writeln!(s, "perturbed run (|noise| = {:.3e}):", p.perturbation_norm);
            for (n, (f, a)) in p.fits.iter().zip(&p.agree).enumerate() {
                let _ = writeln!(
                    s,
                    "  N = {}: slope = {:.4} +/- {:.4}, agrees: {}",
                    n + 1,
                    f.slope,
                    f.stderr,
                    if *a { "yes" } else { "NO" }
                );
            }
        }
        let _ = writeln!(s, "elapsed: {:.1} s", self.elapsed_seconds);
        let _ = writeln!(s, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// Writes `<prefix>.csv`, `<prefix>.txt` and `<prefix>.json` into `dir`.
    pub fn save(&self, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{prefix}.csv"));
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(file)?;
        let txt = dir.join(format!("{prefix}.txt"));
        std::fs::write(&txt, self.summary()).map_err(|e| Error::io(&txt, e))?;
        let json = dir.join(format!("{prefix}.json"));
        let body = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(&json, body).map_err(|e| Error::io(&json, e))?;
        Ok(vec![csv_path, txt, json])
    }
}
