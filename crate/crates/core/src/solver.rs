//! Spectral Galerkin time integration of `u' + Au + B(u, u) = f` and of the
//! linear Stokes equation.
//!
//! The Stokes part is integrated exactly with the factor `e^{-λh}` per mode;
//! the force and `B` are advanced by the explicit midpoint rule:
//!
//! ```text
//! u_½   = e^{-Ah/2} (u + h/2 · N(u, t))
//! u_new = e^{-Ah} u + h · e^{-Ah/2} N(u_½, t + h/2)
//! ```
//!
//! with `N(u, t) = f(t) − B(u, u)`. Both stages use the exact factor, so the
//! scheme is stable for any `h` in the Stokes part and second order overall.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bilinear_b_self, GevreyIndex, SpectralField};

fn default_blowup_factor() -> f64 {
    1e3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Output times; each is moved to the nearest step of the `dt` grid.
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// Abort once `|u|` exceeds this multiple of the initial scale
    /// `max(|u(t_start)|, |f(t_start)|)`.
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
    /// Gevrey norms recorded at every sample.
    #[serde(default)]
    pub monitor: Vec<GevreyIndex>,
    /// Keep the sampled fields in the trajectory.
    #[serde(default)]
    pub keep_fields: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_start: f64, t_end: f64) -> Self {
        SolverConfig {
            dt,
            t_start,
            t_end,
            sample_times: Vec::new(),
            blowup_factor: default_blowup_factor(),
            monitor: Vec::new(),
            keep_fields: false,
        }
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Solver(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end > self.t_start) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::Solver(format!("empty interval [{}, {}]", self.t_start, self.t_end)));
        }
        let ratio = (self.t_end - self.t_start) / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::Solver(format!("dt = {} does not divide the interval length {}", self.dt, self.t_end - self.t_start)));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Solver("blow-up factor must exceed 1".into()));
        }
        Ok(())
    }

    /// Step indices of the sample times, strictly increasing.
    pub fn sample_steps(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let n = self.steps();
        let mut out: Vec<usize> = Vec::with_capacity(self.sample_times.len());
        for &s in &self.sample_times {
            let i = ((s - self.t_start) / self.dt).round();
            if !(0.0..=n as f64).contains(&i) {
                return Err(Error::Solver(format!("sample time {s} is outside [{}, {}]", self.t_start, self.t_end)));
            }
            let i = i as usize;
            if out.last().is_some_and(|&last| last >= i) {
                return Err(Error::Solver(format!("sample time {s} does not increase after snapping to the dt grid")));
            }
            out.push(i);
        }
        Ok(out)
    }
}

/// Samples of a solution with diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Present when [`SolverConfig::keep_fields`] is set.
    pub fields: Vec<SpectralField>,
    /// `|u|²`.
    pub energy: Vec<f64>,
    /// `|A^{1/2} u|²`.
    pub enstrophy: Vec<f64>,
    pub monitor: Vec<GevreyIndex>,
    /// `gevrey[i][s]` is norm `monitor[i]` at sample `s`.
    pub gevrey: Vec<Vec<f64>>,
}

impl Trajectory {
    fn new(monitor: &[GevreyIndex]) -> Self {
        Trajectory {
            times: Vec::new(),
            fields: Vec::new(),
            energy: Vec::new(),
            enstrophy: Vec::new(),
            monitor: monitor.to_vec(),
            gevrey: vec![Vec::new(); monitor.len()],
        }
    }

    fn record(&mut self, t: f64, u: &SpectralField, keep: bool) {
        self.times.push(t);
        self.energy.push(u.norm().powi(2));
        self.enstrophy.push(u.gevrey_norm(GevreyIndex::V).powi(2));
        for (col, idx) in self.gevrey.iter_mut().zip(&self.monitor) {
            col.push(u.gevrey_norm(*idx));
        }
        if keep {
            self.fields.push(u.clone());
        }
    }

    /// CSV with columns `t, energy, enstrophy, gevrey_a<α>_s<σ>…`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "energy".into(), "enstrophy".into()];
        header.extend(self.monitor.iter().map(|g| format!("gevrey_a{}_s{}", g.alpha, g.sigma)));
        w.write_record(&header)?;
        for s in 0..self.times.len() {
            let mut row = vec![self.times[s].to_string(), self.energy[s].to_string(), self.enstrophy[s].to_string()];
            row.extend(self.gevrey.iter().map(|c| c[s].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// Per-mode factors `e^{-λh}` and `e^{-λh/2}`.
struct Propagator {
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Propagator {
    fn new(u: &SpectralField, h: f64) -> Self {
        let lams = u.lattice().eigenvalues();
        Propagator {
            full: lams.iter().map(|l| (-l * h).exp()).collect(),
            half: lams.iter().map(|l| (-l * h * 0.5).exp()).collect(),
        }
    }
}

fn scale_modes(u: &mut SpectralField, factors: &[f64]) {
    for (m, &f) in u.coefficients_mut().iter_mut().zip(factors) {
        for c in m.iter_mut() {
            *c *= f;
        }
    }
}

fn check_lattice(u: &SpectralField, f: &SpectralField) -> Result<()> {
    if u.lattice().same_as(f.lattice()) {
        Ok(())
    } else {
        Err(Error::LatticeMismatch)
    }
}

/// Generic integrator. `rhs(u, t)` returns `N(u, t)`; `observe(t, u)` is
/// called at every sample step.
fn integrate<F, O>(u0: &SpectralField, cfg: &SolverConfig, mut rhs: F, mut observe: O) -> Result<SpectralField>
where
    F: FnMut(&SpectralField, f64) -> Result<SpectralField>,
    O: FnMut(f64, &SpectralField) -> Result<()>,
{
    let samples = cfg.sample_steps()?;
    if u0.divergence_residual() > 1e-10 {
        return Err(Error::Solver("initial datum is not divergence-free".into()));
    }
    let h = cfg.dt;
    let prop = Propagator::new(u0, h);
    let n = cfg.steps();
    let mut u = u0.clone();
    let mut next = samples.iter().peekable();
    let time = |i: usize| cfg.t_start + i as f64 * h;

    let mut n0 = rhs(&u, cfg.t_start)?;
    check_lattice(&u, &n0)?;
    let scale = u.norm().max(n0.norm());
    let threshold = if scale > 0.0 { cfg.blowup_factor * scale } else { f64::INFINITY };

    for i in 0..=n {
        let t = time(i);
        if next.peek() == Some(&&i) {
            next.next();
            observe(t, &u)?;
        }
        if i == n {
            break;
        }
        if i > 0 {
            n0 = rhs(&u, t)?;
        }
        let mut mid = u.clone();
        mid.axpy(0.5 * h, &n0);
        scale_modes(&mut mid, &prop.half);
        let mut n1 = rhs(&mid, t + 0.5 * h)?;
        scale_modes(&mut n1, &prop.half);
        scale_modes(&mut u, &prop.full);
        u.axpy(h, &n1);

        let norm = u.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite { t: time(i + 1) });
        }
        if norm > threshold {
            return Err(Error::BlowUp { t: time(i + 1), norm, threshold });
        }
    }
    Ok(u)
}

/// Integrates `u' + Au + B(u, u) = f(t)` from `u(t_start) = u0`, calling
/// `observe` at each sample time; returns the final state.
pub fn integrate_nse_observed<F, O>(u0: &SpectralField, mut force: F, cfg: &SolverConfig, observe: O) -> Result<SpectralField>
where
    F: FnMut(f64) -> Result<SpectralField>,
    O: FnMut(f64, &SpectralField) -> Result<()>,
{
    integrate(
        u0,
        cfg,
        |u, t| {
            let mut r = force(t)?;
            check_lattice(u, &r)?;
            r -= &bilinear_b_self(u);
            Ok(r)
        },
        observe,
    )
}

pub fn integrate_nse<F>(u0: &SpectralField, force: F, cfg: &SolverConfig) -> Result<Trajectory>
where
    F: FnMut(f64) -> Result<SpectralField>,
{
    let mut traj = Trajectory::new(&cfg.monitor);
    integrate_nse_observed(u0, force, cfg, |t, u| {
        traj.record(t, u, cfg.keep_fields);
        Ok(())
    })?;
    Ok(traj)
}

/// Integrates `w' + Aw = p(L̂_k(t)) + g(t)`, where `force(t)` returns
/// `p(L̂_k(t)) + g(t)`.
pub fn integrate_stokes_linear_observed<F, O>(w0: &SpectralField, mut force: F, cfg: &SolverConfig, observe: O) -> Result<SpectralField>
where
    F: FnMut(f64) -> Result<SpectralField>,
    O: FnMut(f64, &SpectralField) -> Result<()>,
{
    integrate(w0, cfg, |_, t| force(t), observe)
}

/// [`integrate_stokes_linear_observed`] for an expansion `p` plus a
/// remainder `g`, recording a trajectory.
pub fn integrate_stokes_linear<G>(w0: &SpectralField, p: &crate::expansion::Expansion, mut g: G, cfg: &SolverConfig) -> Result<Trajectory>
where
    G: FnMut(f64) -> Result<SpectralField>,
{
    let mut traj = Trajectory::new(&cfg.monitor);
    integrate_stokes_linear_observed(
        w0,
        |t| {
            let mut f = p.evaluate(t)?;
            f += &g(t)?;
            Ok(f)
        },
        cfg,
        |t, u| {
            traj.record(t, u, cfg.keep_fields);
            Ok(())
        },
    )?;
    Ok(traj)
}
