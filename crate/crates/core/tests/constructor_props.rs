use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coherent_nse::constructor::{build_exponent_sequence, construct_expansion, evaluate_sum, manufactured_force, resolve_chi, ExponentSequence, ForceExpansionSpec};
use coherent_nse::expansion::{bilinear_expansion, op_stokes_shifted, Expansion, ExponentVector, Term};
use coherent_nse::spectral::random::random_complex_field;
use coherent_nse::spectral::{ComplexField, Lattice, SpectralField};

fn lattice() -> &'static Arc<Lattice> {
    static L: OnceLock<Arc<Lattice>> = OnceLock::new();
    L.get_or_init(|| Lattice::cube(8).unwrap())
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `z_{-1}^{iω} z_0^{-μ} ξ` plus its conjugate (or the real term for ω = 0).
fn power_term(mu: Rational64, omega: f64, xi: ComplexField) -> Vec<Term> {
    let e = ExponentVector::real(vec![r(0, 1), -mu]).with(-1, r(0, 1), omega);
    if omega == 0.0 {
        let real = ComplexField::from_real(xi.re().clone());
        vec![Term::new(e, real)]
    } else {
        vec![Term::new(e.conj(), xi.conj()), Term::new(e, xi)]
    }
}

fn power_spec(seed: u64, amplitude: f64) -> (ForceExpansionSpec, ExponentSequence) {
    let lat = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi = || random_complex_field(lat, &mut rng, 2, 1.0).scale(Complex64::new(amplitude, 0.0));
    let p1 = [power_term(r(1, 1), 1.0, xi()), power_term(r(1, 1), 0.0, xi())].concat();
    let p2 = power_term(r(2, 1), -1.0, xi());
    let forces = vec![
        (r(1, 1), Expansion::new(lat, 0, 0, r(-1, 1), p1).unwrap()),
        (r(2, 1), Expansion::new(lat, 0, 0, r(-2, 1), p2).unwrap()),
    ];
    let spec = ForceExpansionSpec::new(lat, 0, 0, forces).unwrap();
    let seq = build_exponent_sequence(&[r(1, 1)], 0, r(5, 1)).unwrap();
    (spec, seq)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sequences_are_closed(gens in prop::collection::vec((1i64..=6, 1i64..=4), 1..=3), m_star in 0i32..=2, cut in 2i64..=4) {
        let gens: Vec<Rational64> = gens.into_iter().map(|(a, b)| r(a, b)).filter(|g| *g <= r(cut, 1)).collect();
        prop_assume!(!gens.is_empty());
        let seq = build_exponent_sequence(&gens, m_star, r(cut, 1)).unwrap();
        let v = seq.values();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        for a in v {
            for b in v {
                if a + b <= r(cut, 1) {
                    prop_assert!(seq.position(a + b).is_some());
                }
            }
            if m_star == 0 && a + 1 <= r(cut, 1) {
                prop_assert!(seq.position(a + 1).is_some());
            }
        }
        for g in &gens {
            prop_assert!(seq.position(*g).is_some());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constructed_terms_are_classified_real_and_balanced(seed: u64, s in 0.0..1.0f64) {
        let (spec, seq) = power_spec(seed, 1.0);
        let q = construct_expansion(&spec, &seq, 4).unwrap();
        let t = 2.0 + 50.0 * s;
        for n in 1..=4 {
            let mu = seq.mu(n).unwrap();
            prop_assert!(q[n - 1].classify(0, -mu).is_ok());
            prop_assert!(q[n - 1].verify_conjugate_closure().is_ok());
            prop_assert!(q[n - 1].imaginary_residue(t).unwrap() <= 1e-10);

            // (M_{-1} + A_C) q_n + χ_n + Σ B_C(q_i, q_j) − p_n evaluates to zero
            let mut balance = op_stokes_shifted(&q[n - 1]).unwrap();
            let mut scale = balance.evaluate(t).unwrap().norm();
            if let Some(chi) = resolve_chi(n, &seq, &q).unwrap() {
                scale = scale.max(chi.evaluate(t).unwrap().norm());
                balance = balance.add(&chi).unwrap();
            }
            for i in 1..n {
                for j in 1..n {
                    if seq.mu(i).unwrap() + seq.mu(j).unwrap() == mu {
                        let b = bilinear_expansion(&q[i - 1], &q[j - 1]).unwrap();
                        scale = scale.max(b.evaluate(t).unwrap().norm());
                        balance = balance.add(&b).unwrap();
                    }
                }
            }
            let p = spec.force_for(mu);
            scale = scale.max(p.evaluate(t).unwrap().norm());
            let residual = balance.sub(&p).unwrap().evaluate(t).unwrap();
            prop_assert!(residual.norm() <= 1e-10 * scale, "n = {}: {} vs {}", n, residual.norm(), scale);
        }
    }
}

#[test]
fn truncated_sum_misses_the_equation_at_the_next_rate() {
    // u = Σ_{n≤N} q_n solves the equation up to O(t^{-μ_{N+1}})
    let (spec, seq) = power_spec(3, 1e-2);
    let lat = lattice();
    let q = construct_expansion(&spec, &seq, 3).unwrap();
    let defect = |t: f64| {
        let mut d = manufactured_force(&q, lat, t).unwrap();
        d -= &spec.evaluate(&seq, 3, t).unwrap();
        d.norm()
    };
    let slope = (defect(1e5).ln() - defect(1e4).ln()) / 10f64.ln();
    assert!((slope + 4.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn missing_force_rates_are_zero() {
    let (spec, seq) = power_spec(4, 1.0);
    assert!(spec.force_for(r(3, 1)).is_empty());
    let q = construct_expansion(&spec, &seq, 5).unwrap();
    assert_eq!(q.len(), 5);
    let u: SpectralField = evaluate_sum(&q, lattice(), 10.0).unwrap();
    assert!(u.norm() > 0.0);
    assert!(construct_expansion(&spec, &seq, 6).is_err());
}
