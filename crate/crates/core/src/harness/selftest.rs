//! Property checks over every module, run with a fixed seed.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructor::{build_exponent_sequence, construct_expansion, recursion_rhs, ForceExpansionSpec};
use crate::error::Result;
use crate::expansion::random::{random_closed_expansion, RandomExpansionSpec};
use crate::expansion::{
    bilinear_expansion, from_trig_form, op_m, op_r, op_stokes_shifted, op_z, op_z_with, time_derivative, to_trig_form, Expansion, ExponentVector, Term,
};
use crate::solver::{integrate_nse, SolverConfig};
use crate::spectral::random::{random_complex_field, random_field};
use crate::spectral::{bilinear_b, bilinear_b_complex, ComplexField, GevreyIndex, Lattice, SpectralField};
use crate::timescales::{iter_exp, iter_log, iter_log_derivative, log_domain_bound, ScaleVector};

/// Deliberate defects for checking that the suite detects them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// `Z` uses `(A_C − iω)⁻¹` in place of `(A_C + iω)⁻¹`.
    ResolventSign,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Largest observed `|B_C(w1, w2)|_{α,σ} / (|w1|_{α+1/2,σ} |w2|_{α+1/2,σ})`.
#[derive(Clone, Debug, Serialize)]
pub struct BilinearConstant {
    pub alpha: f64,
    pub sigma: f64,
    pub pairs: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub fault: Fault,
    pub results: Vec<InvariantResult>,
    pub bilinear_constants: Vec<BilinearConstant>,
    pub elapsed_seconds: f64,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

struct Suite {
    rng: ChaCha8Rng,
    results: Vec<InvariantResult>,
}

impl Suite {
    /// Records `check`, which returns the worst observed value; passes when it
    /// is at most `tolerance`.
    fn run(&mut self, name: &str, tolerance: f64, check: impl FnOnce(&mut ChaCha8Rng) -> Result<(f64, String)>) {
        let (passed, measured, detail) = match check(&mut self.rng) {
            Ok((m, d)) => (m <= tolerance, m, d),
            Err(e) => (false, f64::NAN, e.to_string()),
        };
        self.results.push(InvariantResult { name: name.into(), passed, measured, tolerance, detail });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

fn raw_field(lat: &std::sync::Arc<Lattice>, rng: &mut ChaCha8Rng) -> SpectralField {
    let coeffs = lat
        .modes()
        .iter()
        .map(|_| [0, 1, 2].map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    SpectralField::from_raw(lat, coeffs)
}

fn expansion_gap(a: &Expansion, b: &Expansion) -> Result<f64> {
    Ok(rel(a.sub(b)?.scale(), a.scale().max(b.scale())))
}

fn random_expansions(rng: &mut ChaCha8Rng, lat: &std::sync::Arc<Lattice>, count: usize) -> Result<Vec<Expansion>> {
    (0..count)
        .map(|i| {
            let spec = RandomExpansionSpec {
                depth: (i % 3) as i32,
                class_m: 0,
                class_mu: Rational64::new(-(1 + (i % 3) as i64), 2),
                pairs: 1 + i % 3,
                real_terms: i % 2,
                oscillate_leading: true,
                max_mode: 2,
            };
            random_closed_expansion(lat, rng, &spec)
        })
        .collect()
}

/// Runs every invariant suite with the given seed; `fault` injects a defect.
pub fn run_selftest(seed: u64, fault: Fault) -> Result<SelftestReport> {
    let clock = Instant::now();
    let mut s = Suite { rng: ChaCha8Rng::seed_from_u64(seed), results: Vec::new() };
    let small = Lattice::cube(8)?;
    let mid = Lattice::cube(16)?;

    s.run("leray-idempotent-self-adjoint", 1e-13, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let (a, b) = (raw_field(&small, rng), raw_field(&small, rng));
            let pa = SpectralField::leray_project(&small, small.modes().iter().copied().zip(a.coefficients().iter().copied()));
            let pb = SpectralField::leray_project(&small, small.modes().iter().copied().zip(b.coefficients().iter().copied()));
            let ppa = SpectralField::leray_project(&small, small.modes().iter().copied().zip(pa.coefficients().iter().copied()));
            let mut d = ppa.clone();
            d -= &pa;
            worst = worst.max(rel(d.norm(), pa.norm()));
            worst = worst.max(rel((pa.inner(&b) - a.inner(&pb)).abs(), a.norm() * b.norm()));
        }
        Ok((worst, "|PPu - Pu|/|Pu| and <Pa,b> - <a,Pb>".into()))
    });

    s.run("gevrey-monotone", 0.0, |rng| {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            let u = random_field(&small, rng, 2, 0.0);
            for (a, b) in [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5)] {
                for (sa, sb) in [(0.0, 0.0), (0.0, 0.1), (0.1, 0.3)] {
                    let lo = u.gevrey_norm(GevreyIndex { alpha: a, sigma: sa });
                    let hi = u.gevrey_norm(GevreyIndex { alpha: b, sigma: sb });
                    worst = worst.max(lo - hi);
                }
            }
        }
        Ok((worst.max(0.0), "max(|u|_{a,s} - |u|_{b,t}) for a <= b, s <= t".into()))
    });

    s.run("resolvent-identity", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for i in 0..25 {
            let w = random_complex_field(&mid, rng, mid.cutoff(), 0.0);
            let omega = [0.0, 1.0, -1.0, 10.0, -10.0][i % 5];
            let back = w.resolvent_shift_inverse(omega).apply_stokes_shifted(Complex64::new(0.0, omega));
            worst = worst.max(rel((&back - &w).norm(), w.norm()));
        }
        Ok((worst, "|(A+iw)(A+iw)^-1 x - x| / |x|".into()))
    });

    s.run("resolvent-bound", 1e-12, |rng| {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..25 {
            let w = random_complex_field(&mid, rng, mid.cutoff(), 0.0);
            let omega = [0.0, 1.0, -1.0, 10.0, -10.0][i % 5];
            let idx = GevreyIndex { alpha: [0.0, 0.5, 1.0][i % 3], sigma: [0.0, 0.1][i % 2] };
            let z = w.resolvent_shift_inverse(omega);
            worst = worst.max(z.gevrey_norm(idx.shifted(1.0)) / w.gevrey_norm(idx) - 1.0);
        }
        Ok((worst.max(0.0), "|(A+iw)^-1 x|_{a+1,s} / |x|_{a,s} - 1".into()))
    });

    s.run("shifted-stokes-identity", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        for i in 0..25 {
            let w = random_complex_field(&mid, rng, mid.cutoff(), 0.0);
            let omega = [0.0, 1.0, -1.0, 10.0, -10.0][i % 5];
            let idx = GevreyIndex { alpha: [0.0, 0.5, 1.0][i % 3], sigma: [0.0, 0.1][i % 2] };
            let lhs = w.apply_stokes_shifted(Complex64::new(0.0, omega)).gevrey_norm(idx).powi(2);
            let rhs = w.apply_a_power(1.0).gevrey_norm(idx).powi(2) + omega * omega * w.gevrey_norm(idx).powi(2);
            worst = worst.max(rel((lhs - rhs).abs(), rhs));
        }
        Ok((worst, "|(A+iw)x|^2 = |Ax|^2 + w^2 |x|^2 in Gevrey norms".into()))
    });

    s.run("bilinear-orthogonality", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let u = random_field(&mid, rng, mid.cutoff(), 1.0);
            let v = random_field(&mid, rng, mid.cutoff(), 1.0);
            let b = bilinear_b(&u, &v)?;
            let scale = u.gevrey_norm(GevreyIndex::V) * v.gevrey_norm(GevreyIndex::V).powi(2);
            worst = worst.max(rel(b.inner(&v).abs(), scale));
        }
        Ok((worst, "|<B(u,v),v>| / (|u|_V |v|_V^2)".into()))
    });

    s.run("bilinear-complexification", 1e-13, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let u = random_field(&small, rng, 2, 0.0);
            let v = random_field(&small, rng, 2, 0.0);
            let zero = SpectralField::zeros(&small);
            let iu = ComplexField::new(zero.clone(), u.clone())?;
            let iv = ComplexField::new(zero, v.clone())?;
            let b = bilinear_b(&u, &v)?;
            let bc = bilinear_b_complex(&iu, &iv)?;
            let mut d = bc.re().clone();
            d += &b;
            worst = worst.max(rel(d.norm() + bc.im().norm(), b.norm()));
            let w1 = random_complex_field(&small, rng, 2, 0.0);
            let w2 = random_complex_field(&small, rng, 2, 0.0);
            let lhs = bilinear_b_complex(&w1.conj(), &w2.conj())?;
            let rhs = bilinear_b_complex(&w1, &w2)?.conj();
            worst = worst.max(rel((&lhs - &rhs).norm(), rhs.norm()));
        }
        Ok((worst, "B_C(iu, iv) + B(u, v) and conjugate symmetry".into()))
    });

    let mut constants = Vec::new();
    for alpha in [0.5, 1.0] {
        for sigma in [0.0, 0.1] {
            let pairs = 1000;
            let mut max_ratio: f64 = 0.0;
            let (lo, hi) = (GevreyIndex { alpha, sigma }, GevreyIndex { alpha: alpha + 0.5, sigma });
            for _ in 0..pairs {
                let w1 = random_complex_field(&small, &mut s.rng, small.cutoff(), 0.5);
                let w2 = random_complex_field(&small, &mut s.rng, small.cutoff(), 0.5);
                let b = bilinear_b_complex(&w1, &w2)?;
                max_ratio = max_ratio.max(b.gevrey_norm(lo) / (w1.gevrey_norm(hi) * w2.gevrey_norm(hi)));
            }
            constants.push(BilinearConstant { alpha, sigma, pairs, max_ratio });
        }
    }
    let finite = constants.iter().all(|c| c.max_ratio.is_finite());
    s.results.push(InvariantResult {
        name: "bilinear-gevrey-constant".into(),
        passed: finite,
        measured: constants.iter().map(|c| c.max_ratio).fold(0.0, f64::max),
        tolerance: f64::INFINITY,
        detail: "empirical sup |B_C(w1,w2)|_{a,s} / (|w1|_{a+1/2,s} |w2|_{a+1/2,s}) over random pairs".into(),
    });

    let flip = fault == Fault::ResolventSign;
    s.run("resolvent-expansion-identities", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for p in random_expansions(rng, &small, 12)? {
            let zp = if flip { op_z_with(&p, |xi, omega| xi.resolvent_shift_inverse(-omega))? } else { op_z(&p)? };
            worst = worst.max(expansion_gap(&op_stokes_shifted(&zp)?, &p)?);
            let zq = if flip {
                op_z_with(&op_stokes_shifted(&p)?, |xi, omega| xi.resolvent_shift_inverse(-omega))?
            } else {
                op_z(&op_stokes_shifted(&p)?)?
            };
            worst = worst.max(expansion_gap(&zq, &p)?);
        }
        Ok((worst, "(A_C + M_-1) Z p = p and Z (A_C + M_-1) p = p".into()))
    });

    s.run("closure-preserved", 0.0, |rng| {
        let list = random_expansions(rng, &small, 6)?;
        let mut broken = 0.0;
        for (i, p) in list.iter().enumerate() {
            let q = &list[(i + 1) % list.len()];
            let q = crate::expansion::embed(q, p.depth().max(q.depth()))?;
            let p = crate::expansion::embed(p, q.depth())?;
            let outs = [op_m(-1, &p)?, op_m(p.depth(), &p)?, op_r(&p)?, op_z(&p)?, bilinear_expansion(&p, &q)?];
            broken += outs.iter().filter(|o| o.verify_conjugate_closure().is_err()).count() as f64;
        }
        Ok((broken, "number of operator outputs that lost conjugate closure".into()))
    });

    s.run("time-derivative", 1e-6, |rng| {
        let mut worst: f64 = 0.0;
        let (t, h) = (20.0, 1e-4);
        for p in random_expansions(rng, &small, 12)? {
            let exact = time_derivative(&p, t)?;
            let mut fd = p.evaluate(t + h)?;
            fd -= &p.evaluate(t - h)?;
            let fd = fd.map_modes(|_| 0.5 / h);
            let mut d = fd.clone();
            d -= &exact;
            worst = worst.max(rel(d.norm(), exact.norm().max(fd.norm())));
        }
        Ok((worst, "central difference vs analytic derivative at t = 20".into()))
    });

    s.run("trig-round-trip", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        for p in random_expansions(rng, &small, 8)? {
            let back = from_trig_form(&to_trig_form(&p)?)?;
            for t in [20.0, 60.0, 400.0] {
                let a = p.evaluate(t)?;
                let mut d = back.evaluate(t)?;
                d -= &a;
                worst = worst.max(rel(d.norm(), a.norm()));
            }
        }
        Ok((worst, "from_trig_form(to_trig_form(p)) vs p at three times".into()))
    });

    s.run("iterated-log-identities", 1e-12, |_| {
        let mut worst: f64 = 0.0;
        for k in 0..=3 {
            for x in [0.5, 1.0, 2.0] {
                let t = iter_exp(k, x);
                if t.is_finite() {
                    worst = worst.max(((iter_log(k as i32, t)? - x) / x).abs());
                }
            }
        }
        for m in 0..=3 {
            for t in [20.0, 1e3, 1e8].into_iter().filter(|&t| t > log_domain_bound(m + 1)) {
                worst = worst.max((iter_log(m + 1, t)? - iter_log(m, t)?.ln()).abs());
            }
        }
        let v = ScaleVector::new(3, 1e8)?;
        if v.log_values().windows(2).any(|w| w[1] >= w[0]) {
            worst = f64::INFINITY;
        }
        Ok((worst, "L_k(E_k(x)) = x, L_{m+1} = ln L_m, decreasing scale vector".into()))
    });

    s.run("iterated-log-derivative", 1e-7, |_| {
        let mut worst: f64 = 0.0;
        for m in 0..=3 {
            for t in [20.0, 1e3, 1e8].into_iter().filter(|&t| t > log_domain_bound(m)) {
                let d = iter_log_derivative(m, t)?;
                let h = 1e-5 * t;
                let fd = (iter_log(m, t + h)? - iter_log(m, t - h)?) / (2.0 * h);
                worst = worst.max((fd - d).abs() / d);
            }
        }
        Ok((worst, "central difference vs L_m'(t)".into()))
    });

    s.run("exponent-sequence-closure", 0.0, |_| {
        let mut missing = 0.0;
        for (gens, m, cut) in [(vec![Rational64::new(1, 2)], 0, Rational64::from_integer(4)), (vec![Rational64::new(2, 3), Rational64::from_integer(1)], 1, Rational64::from_integer(3))] {
            let seq = build_exponent_sequence(&gens, m, cut)?;
            for a in seq.values() {
                for b in seq.values() {
                    if a + b <= cut && seq.position(a + b).is_none() {
                        missing += 1.0;
                    }
                }
                if m == 0 && a + 1 <= cut && seq.position(a + 1).is_none() {
                    missing += 1.0;
                }
            }
        }
        Ok((missing, "sums within the cutoff absent from the sequence".into()))
    });

    s.run("recursion-balance", 1e-12, |rng| {
        let xi = random_complex_field(&small, rng, 2, 0.5);
        let e = ExponentVector::real(vec![Rational64::from_integer(0), Rational64::from_integer(-1)]).with(-1, Rational64::from_integer(0), 1.0);
        let p1 = Expansion::new(&small, 0, 0, Rational64::from_integer(-1), vec![Term::new(e.conj(), xi.conj()), Term::new(e, xi)])?;
        let spec = ForceExpansionSpec::new(&small, 0, 0, vec![(Rational64::from_integer(1), p1)])?;
        let seq = build_exponent_sequence(&[Rational64::from_integer(1)], 0, Rational64::from_integer(3))?;
        let q = construct_expansion(&spec, &seq, 3)?;
        let mut worst: f64 = 0.0;
        for n in 1..=3 {
            let lhs = op_stokes_shifted(&q[n - 1])?;
            worst = worst.max(expansion_gap(&lhs, &recursion_rhs(n, &spec, &seq, &q)?)?);
        }
        Ok((worst, "(A_C + M_-1) q_n minus the recursion right-hand side".into()))
    });

    s.run("solver-dissipation", 1e-12, |rng| {
        let u0 = random_field(&small, rng, 2, 0.0);
        let mut cfg = SolverConfig::new(0.01, 0.0, 2.0).with_samples((0..=20).map(|i| 0.1 * i as f64).collect());
        cfg.keep_fields = true;
        let traj = integrate_nse(&u0, |_| Ok(SpectralField::zeros(&small)), &cfg)?;
        let mut worst: f64 = 0.0;
        for w in traj.energy.windows(2) {
            worst = worst.max((w[1] - w[0]) / w[0]);
        }
        for f in &traj.fields {
            worst = worst.max(f.divergence_residual());
        }
        Ok((worst, "energy increase between samples and divergence residual, unforced".into()))
    });

    Ok(SelftestReport { seed, fault, results: s.results, bilinear_constants: constants, elapsed_seconds: clock.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_and_faulty_runs() {
        let clean = run_selftest(11, Fault::None).unwrap();
        for r in &clean.results {
            assert!(r.passed, "{r:?}");
        }
        assert_eq!(clean.bilinear_constants.len(), 4);
        let bad = run_selftest(11, Fault::ResolventSign).unwrap();
        let failed: Vec<&str> = bad.failures().map(|r| r.name.as_str()).collect();
        assert_eq!(failed, ["resolvent-expansion-identities"]);
    }
}
