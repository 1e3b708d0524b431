//! Linear and nonlinear decay experiments and the integral-lemma table.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructor::{construct_expansion, evaluate_sum};
use crate::error::{Error, Result};
use crate::expansion::{op_z, Expansion};
use crate::harness::config::{ExperimentConfig, ExperimentKind, ExperimentSection, InitialDatum, LemmaSection};
use crate::harness::fit::{fit_decay_exponent, DecayFit};
use crate::harness::report::{PairedRun, Regime, ResidualReport, Truncation};
use crate::solver::{integrate_nse_observed, integrate_stokes_linear_observed, SolverConfig};
use crate::spectral::random::random_field;
use crate::spectral::{GevreyIndex, SpectralField};
use crate::timescales::{integral_lemma_ratio, LemmaSample};

/// Samples inside `window`, leaving out the initial sample (it holds the
/// initialization mismatch, which is zero for runs started on the expansion).
fn fit_window(times: &[f64], r: &[f64], window: [f64; 2]) -> Vec<(f64, f64)> {
    times.iter().zip(r).skip(1).filter(|(t, _)| **t >= window[0] && **t <= window[1]).map(|(t, r)| (*t, *r)).collect()
}

fn judge(order: usize, rate: Rational64, fit: Result<DecayFit>, margin_min: f64) -> Result<Truncation> {
    let rate_value = rate.to_f64().unwrap_or(f64::NAN);
    let fit = fit?;
    let margin = fit.slope + rate_value;
    Ok(Truncation {
        order,
        rate: rate.to_string(),
        rate_value,
        fit: Some(fit),
        margin: Some(margin),
        pass: margin < -margin_min,
    })
}

/// Divergence-free noise with `|noise| = scale · |u0|` (or `scale` when `u0`
/// vanishes), seeded by `seed`.
pub fn perturbation(u0: &SpectralField, scale: f64, seed: u64) -> SpectralField {
    let lat = u0.lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = random_field(lat, &mut rng, lat.cutoff(), 1.0);
    let target = if u0.norm() > 0.0 { scale * u0.norm() } else { scale };
    let n = noise.norm();
    noise.map_modes(|_| if n > 0.0 { target / n } else { 0.0 })
}

fn blowup_hint(e: Error) -> Error {
    match e {
        Error::BlowUp { t, norm, threshold } => Error::Solver(format!(
            "solution norm {norm:.3e} exceeded {threshold:.3e} at t = {t}; reduce the force amplitudes or the step size"
        )),
        other => other,
    }
}

/// Integrates `w' + Aw = p + g` and compares `w` with `Z p`.
pub fn run_linear_experiment(cfg: &ExperimentConfig) -> Result<ResidualReport> {
    let clock = Instant::now();
    let lat = cfg.lattice()?;
    let exp = cfg.experiment()?;
    let solver = cfg.solver()?.config()?;
    let (m, p) = match &cfg.force {
        Some(f) => {
            let mut groups = f.expansions(&lat, &cfg.base_dir)?;
            if groups.len() > 1 {
                return Err(Error::Config("a linear experiment takes force terms of a single rate".into()));
            }
            let p = groups.pop().map(|(_, p)| p).unwrap_or_else(|| Expansion::zero(&lat, f.depth, f.m_star, Rational64::from_integer(0)));
            (f.m_star, p)
        }
        None => (0, Expansion::zero(&lat, 0, 0, Rational64::from_integer(0))),
    };
    let rate = -p.class_mu();
    let zp = op_z(&p)?;
    let g = match &cfg.remainder {
        Some(r) => Some(r.build(&lat, m)?),
        None => None,
    };
    let mut w0 = match exp.initial {
        InitialDatum::Expansion => zp.evaluate(solver.t_start)?,
        InitialDatum::Zero => SpectralField::zeros(&lat),
    };
    if exp.perturbation > 0.0 {
        w0 += &perturbation(&w0, exp.perturbation, cfg.seed);
    }
    let initial_mismatch = {
        let mut d = w0.clone();
        d -= &zp.evaluate(solver.t_start)?;
        d.gevrey_norm(exp.norm)
    };
    let mut times = Vec::new();
    let mut r = Vec::new();
    integrate_stokes_linear_observed(
        &w0,
        |t| {
            let mut f = p.evaluate(t)?;
            if let Some(g) = &g {
                f += &g(t)?;
            }
            Ok(f)
        },
        &solver,
        |t, w| {
            let mut d = w.clone();
            d -= &zp.evaluate(t)?;
            times.push(t);
            r.push(d.gevrey_norm(exp.norm));
            Ok(())
        },
    )
    .map_err(blowup_hint)?;

    let (regime, truncations) = if zp.is_empty() {
        let t = Truncation { order: 1, rate: rate.to_string(), rate_value: rate.to_f64().unwrap_or(0.0), fit: None, margin: None, pass: true };
        (Regime::Exponential, vec![t])
    } else {
        let fit = fit_decay_exponent(&fit_window(&times, &r, exp.fit_window), m);
        (Regime::Algebraic, vec![judge(1, rate, fit, exp.margin)?])
    };
    Ok(ResidualReport {
        kind: ExperimentKind::Linear,
        m,
        norm: exp.norm,
        margin_min: exp.margin,
        fit_window: exp.fit_window,
        regime,
        horizon_limited: m >= 2,
        initial_mismatch,
        times,
        residuals: vec![r],
        truncations,
        paired: None,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Residuals `|u − Σ_{n≤N} q_n|` for `N = 1..=q_list.len()` along one run.
fn nse_residuals(
    u0: &SpectralField,
    q_list: &[Expansion],
    force: &(dyn Fn(f64) -> Result<SpectralField> + Sync),
    solver: &SolverConfig,
    norm: GevreyIndex,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut times = Vec::new();
    let mut res = vec![Vec::new(); q_list.len()];
    integrate_nse_observed(u0, force, solver, |t, u| {
        let mut d = u.clone();
        for (n, q) in q_list.iter().enumerate() {
            d -= &q.evaluate(t)?;
            res[n].push(d.gevrey_norm(norm));
        }
        times.push(t);
        Ok(())
    })
    .map_err(blowup_hint)?;
    Ok((times, res))
}

/// Integrates the Navier–Stokes equations forced by `Σ_{n≤N} p_n` from the
/// expansion's initial value (and from a perturbed one), and fits the decay
/// of `u − Σ_{n≤N} q_n` for each truncation.
pub fn run_nse_experiment(cfg: &ExperimentConfig) -> Result<ResidualReport> {
    let clock = Instant::now();
    let lat = cfg.lattice()?;
    let exp: &ExperimentSection = cfg.experiment()?;
    let solver = cfg.solver()?.config()?;
    let force_cfg = cfg.force()?;
    let seq = force_cfg.sequence()?;
    let spec = force_cfg.spec(&lat, &cfg.base_dir)?;
    let order = exp.order;
    let q_list = construct_expansion(&spec, &seq, order)?;
    let force = |t: f64| spec.evaluate(&seq, order, t);

    let u0 = match exp.initial {
        InitialDatum::Expansion => evaluate_sum(&q_list, &lat, solver.t_start)?,
        InitialDatum::Zero => SpectralField::zeros(&lat),
    };
    let initial_mismatch = {
        let mut d = u0.clone();
        d -= &evaluate_sum(&q_list, &lat, solver.t_start)?;
        d.gevrey_norm(exp.norm)
    };
    let noise = (exp.perturbation > 0.0).then(|| perturbation(&u0, exp.perturbation, cfg.seed));

    let (main, other) = std::thread::scope(|s| {
        let other = noise.as_ref().map(|noise| {
            let mut v0 = u0.clone();
            v0 += noise;
            let (q_list, force, solver) = (&q_list, &force, &solver);
            s.spawn(move || nse_residuals(&v0, q_list, force, solver, exp.norm))
        });
        let main = nse_residuals(&u0, &q_list, &force, &solver, exp.norm);
        (main, other.map(|h| h.join().expect("paired run panicked")))
    });
    let (times, residuals) = main?;

    let mut truncations = Vec::with_capacity(order);
    let mut fits = Vec::with_capacity(order);
    for (n, r) in residuals.iter().enumerate() {
        let fit = fit_decay_exponent(&fit_window(&times, r, exp.fit_window), seq.m_star());
        let t = judge(n + 1, seq.mu(n + 1)?, fit, exp.margin)?;
        fits.push(t.fit.expect("judged fit"));
        truncations.push(t);
    }
    let paired = match other {
        Some(run) => {
            let (_, pres) = run?;
            let pfits = pres
                .iter()
                .map(|r| fit_decay_exponent(&fit_window(&times, r, exp.fit_window), seq.m_star()))
                .collect::<Result<Vec<_>>>()?;
            let agree = pfits.iter().zip(&fits).map(|(a, b)| a.agrees_with(b, 2.0)).collect();
            Some(PairedRun {
                perturbation_norm: noise.as_ref().map_or(0.0, |n| n.norm()),
                residuals: pres,
                fits: pfits,
                agree,
            })
        }
        None => None,
    };
    Ok(ResidualReport {
        kind: cfg.kind,
        m: seq.m_star(),
        norm: exp.norm,
        margin_min: exp.margin,
        fit_window: exp.fit_window,
        regime: Regime::Algebraic,
        horizon_limited: seq.m_star() >= 2,
        initial_mismatch,
        times,
        residuals,
        truncations,
        paired,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Dispatches on the experiment kind; `selftest` and `lemma-integral` are
/// not residual experiments.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResidualReport> {
    match cfg.kind {
        ExperimentKind::Linear => run_linear_experiment(cfg),
        ExperimentKind::NsePower | ExperimentKind::NseLog => run_nse_experiment(cfg),
        k => Err(Error::Config(format!("{k:?} is not a residual experiment"))),
    }
}

/// Ratio curve of one `(m, λ, γ, T_*)` case.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCurve {
    pub m: i32,
    pub lambda: f64,
    pub gamma: f64,
    pub t_star: f64,
    pub sup: f64,
    pub sup_at: f64,
    /// Ratio at the start of the last decade of `t`.
    pub decade_start: f64,
    pub last: f64,
    /// No growth over the last decade: the ratio stays at or below its value
    /// at the start of the decade.
    pub tail_bounded: bool,
    #[serde(skip)]
    pub samples: Vec<LemmaSample>,
}

impl LemmaCurve {
    pub fn passed(&self) -> bool {
        self.sup.is_finite() && self.tail_bounded
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaTable {
    pub t_max: f64,
    pub curves: Vec<LemmaCurve>,
}

impl LemmaTable {
    pub fn passed(&self) -> bool {
        self.curves.iter().all(LemmaCurve::passed)
    }

    /// Long format: `m, lambda, gamma, t_star, t, integral, ratio`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "lambda", "gamma", "t_star", "t", "integral", "ratio"])?;
        for c in &self.curves {
            for s in &c.samples {
                w.write_record([
                    c.m.to_string(),
                    c.lambda.to_string(),
                    c.gamma.to_string(),
                    c.t_star.to_string(),
                    format!("{:.12e}", s.t),
                    format!("{:.12e}", s.integral),
                    format!("{:.12e}", s.ratio),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(Path::new("<csv>"), e))?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::from("m  lambda  gamma  t_star  sup(ratio)  at t  ratio(t_max/10)  ratio(t_max)  tail\n");
        for c in &self.curves {
            s += &format!(
                "{}  {}  {}  {:.6}  {:.6}  {:.1}  {:.6}  {:.6}  {}\n",
                c.m,
                c.lambda,
                c.gamma,
                c.t_star,
                c.sup,
                c.sup_at,
                c.decade_start,
                c.last,
                if c.tail_bounded { "bounded" } else { "GROWING" }
            );
        }
        s
    }
}

pub fn run_lemma_table(section: &LemmaSection) -> Result<LemmaTable> {
    if section.points < 20 || !(section.t_max > 0.0) {
        return Err(Error::Config("lemma table needs t_max > 0 and at least 20 points".into()));
    }
    let grid: Vec<f64> = (0..section.points).map(|i| section.t_max * i as f64 / (section.points - 1) as f64).collect();
    let decade = section.t_max / 10.0;
    let mut curves = Vec::new();
    for c in &section.cases {
        let samples = integral_lemma_ratio(c.m, c.lambda, c.gamma, c.t_star, &grid)?;
        let (sup_at, sup) = samples.iter().fold((0.0, f64::NEG_INFINITY), |acc, s| if s.ratio > acc.1 { (s.t, s.ratio) } else { acc });
        let start = samples.iter().find(|s| s.t >= decade).map_or(f64::NAN, |s| s.ratio);
        let tail_max = samples.iter().filter(|s| s.t >= decade).map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
        curves.push(LemmaCurve {
            m: c.m,
            lambda: c.lambda,
            gamma: c.gamma,
            t_star: c.t_star,
            sup,
            sup_at,
            decade_start: start,
            last: samples.last().map_or(f64::NAN, |s| s.ratio),
            tail_bounded: tail_max <= start * (1.0 + 1e-9),
            samples,
        });
    }
    Ok(LemmaTable { t_max: section.t_max, curves })
}

/// The solution expansion `q_1..q_N` of a force configuration.
pub fn expand(cfg: &ExperimentConfig) -> Result<(crate::constructor::ExponentSequence, Vec<Expansion>)> {
    let lat = cfg.lattice()?;
    let force = cfg.force()?;
    let seq = force.sequence()?;
    let spec = force.spec(&lat, &cfg.base_dir)?;
    let order = cfg.experiment.as_ref().map_or(seq.len(), |e| e.order);
    let q = construct_expansion(&spec, &seq, order)?;
    Ok((seq, q))
}

/// Integrates the configured equation from the expansion's initial value and
/// records energy, enstrophy, the residual norm and the monitored norms.
pub fn simulate(cfg: &ExperimentConfig) -> Result<crate::solver::Trajectory> {
    let lat = cfg.lattice()?;
    let section = cfg.solver()?;
    let mut solver = section.config()?;
    let exp = cfg.experiment.as_ref();
    if let Some(e) = exp {
        if !solver.monitor.contains(&e.norm) {
            solver.monitor.push(e.norm);
        }
    }
    let perturb = |u0: SpectralField| match exp {
        Some(e) if e.perturbation > 0.0 => {
            let mut u = u0.clone();
            u += &perturbation(&u0, e.perturbation, cfg.seed);
            u
        }
        _ => u0,
    };
    let zero_start = exp.is_some_and(|e| e.initial == InitialDatum::Zero);
    match cfg.kind {
        ExperimentKind::Linear => {
            let force = cfg.force()?;
            let mut groups = force.expansions(&lat, &cfg.base_dir)?;
            if groups.len() != 1 {
                return Err(Error::Config("a linear experiment takes force terms of a single rate".into()));
            }
            let p = groups.pop().expect("one group").1;
            let w0 = if zero_start { SpectralField::zeros(&lat) } else { op_z(&p)?.evaluate(solver.t_start)? };
            let g = cfg.remainder.as_ref().map(|r| r.build(&lat, force.m_star)).transpose()?;
            crate::solver::integrate_stokes_linear(&perturb(w0), &p, |t| g.as_ref().map_or_else(|| Ok(SpectralField::zeros(&lat)), |g| g(t)), &solver)
        }
        ExperimentKind::NsePower | ExperimentKind::NseLog => {
            let force_cfg = cfg.force()?;
            let seq = force_cfg.sequence()?;
            let spec = force_cfg.spec(&lat, &cfg.base_dir)?;
            let order = exp.map_or(seq.len(), |e| e.order);
            let q = construct_expansion(&spec, &seq, order)?;
            let u0 = if zero_start { SpectralField::zeros(&lat) } else { evaluate_sum(&q, &lat, solver.t_start)? };
            crate::solver::integrate_nse(&perturb(u0), |t| spec.evaluate(&seq, order, t), &solver).map_err(blowup_hint)
        }
        k => Err(Error::Config(format!("{k:?} has nothing to simulate"))),
    }
}
