use std::sync::{Arc, OnceLock};

use num_rational::Rational64;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coherent_nse::expansion::io::{parse_expansion, write_expansion};
use coherent_nse::expansion::random::{random_closed_expansion, RandomExpansionSpec};
use coherent_nse::expansion::{
    bilinear_expansion, embed, from_trig_form, op_m, op_r, op_stokes_shifted, op_z, time_derivative, to_trig_form, Expansion,
};
use coherent_nse::spectral::{GevreyIndex, Lattice, SpectralField};

fn lattice() -> &'static Arc<Lattice> {
    static L: OnceLock<Arc<Lattice>> = OnceLock::new();
    L.get_or_init(|| Lattice::cube(8).unwrap())
}

fn expansion(seed: u64, depth: i32, class_m: i32, mu2: i64, pairs: usize, real_terms: usize) -> Expansion {
    let spec = RandomExpansionSpec {
        depth,
        class_m,
        class_mu: Rational64::new(-mu2, 2),
        pairs,
        real_terms,
        oscillate_leading: class_m >= 0,
        max_mode: 2,
    };
    random_closed_expansion(lattice(), &mut ChaCha8Rng::seed_from_u64(seed), &spec).unwrap()
}

fn arb() -> impl Strategy<Value = Expansion> {
    (any::<u64>(), 0i32..=2, 1i64..=4, 1usize..=3, 0usize..=2).prop_flat_map(|(seed, depth, mu2, pairs, real)| {
        (0..=depth).prop_map(move |m| expansion(seed, depth, m, mu2, pairs, real))
    })
}

fn gap(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d -= b;
    d.norm()
}

fn structural_gap(a: &Expansion, b: &Expansion) -> f64 {
    a.sub(b).unwrap().scale() / a.scale().max(b.scale())
}

fn sample_time(p: &Expansion) -> f64 {
    // inside every domain used here (depth <= 3 needs t > 15.2)
    if p.depth() >= 2 { 40.0 } else { 8.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn resolvent_inverts_shifted_stokes(p in arb()) {
        prop_assert!(structural_gap(&op_stokes_shifted(&op_z(&p).unwrap()).unwrap(), &p) <= 1e-12);
        prop_assert!(structural_gap(&op_z(&op_stokes_shifted(&p).unwrap()).unwrap(), &p) <= 1e-12);
    }

    #[test]
    fn operators_keep_class_and_closure(p in arb(), q in arb()) {
        let (m, mu) = (p.class_m(), p.class_mu());
        for j in -1..=p.depth() {
            let mp = op_m(j, &p).unwrap();
            prop_assert!(mp.classify(m, mu).is_ok());
            prop_assert!(mp.verify_conjugate_closure().is_ok());
        }
        let zp = op_z(&p).unwrap();
        prop_assert!(zp.classify(m, mu).is_ok());
        prop_assert!(zp.verify_conjugate_closure().is_ok());
        let gain = zp.terms().iter().zip(p.terms()).all(|(a, b)| {
            a.coefficient.gevrey_norm(GevreyIndex { alpha: 1.0, sigma: 0.2 }) <= b.coefficient.gevrey_norm(GevreyIndex { alpha: 0.0, sigma: 0.2 }) * (1.0 + 1e-12)
        });
        prop_assert!(gain);

        let rp = op_r(&p).unwrap();
        prop_assert!(rp.verify_conjugate_closure().is_ok());
        if m == 0 {
            prop_assert_eq!(rp.class_m(), 0);
            prop_assert_eq!(rp.class_mu(), mu - Rational64::one());
        }

        let k = p.depth().max(q.depth());
        let (pe, qe) = (embed(&p, k).unwrap(), embed(&q, k).unwrap());
        let b = bilinear_expansion(&pe, &qe).unwrap();
        prop_assert!(b.verify_conjugate_closure().is_ok());
        let expected = if pe.class_m() == qe.class_m() {
            (pe.class_m(), pe.class_mu() + qe.class_mu())
        } else if pe.class_m() < qe.class_m() {
            (pe.class_m(), pe.class_mu())
        } else {
            (qe.class_m(), qe.class_mu())
        };
        prop_assert_eq!((b.class_m(), b.class_mu()), expected);
    }

    #[test]
    fn closed_expansions_evaluate_real(p in arb(), s in 0.0..1.0f64) {
        let t = sample_time(&p) * (1.0 + 20.0 * s);
        prop_assert!(p.imaginary_residue(t).unwrap() <= 1e-10);
        prop_assert!(p.evaluate(t).is_ok());
    }

    #[test]
    fn derivative_matches_central_differences(p in arb(), s in 0.0..1.0f64) {
        let t = sample_time(&p) * (1.0 + 5.0 * s);
        let exact = time_derivative(&p, t).unwrap();
        // h balances the O(h²) truncation against rounding in the difference
        let h = 1e-4 * t.max(1.0).sqrt();
        let mut fd = p.evaluate(t + h).unwrap();
        fd -= &p.evaluate(t - h).unwrap();
        let fd = fd.map_modes(|_| 0.5 / h);
        prop_assert!(gap(&fd, &exact) <= 1e-6 * exact.norm().max(fd.norm()));
    }

    #[test]
    fn trig_form_round_trips(p in arb(), s in 0.0..1.0f64) {
        let back = from_trig_form(&to_trig_form(&p).unwrap()).unwrap();
        let t = 20.0 + 500.0 * s;
        let a = p.evaluate(t).unwrap();
        prop_assert!(gap(&back.evaluate(t).unwrap(), &a) <= 1e-10 * a.norm());
        prop_assert!(to_trig_form(&p).unwrap().evaluate(t).is_ok());
    }

    #[test]
    fn text_format_round_trips(p in arb()) {
        let mut buf = Vec::new();
        write_expansion(&mut buf, &p).unwrap();
        let back = parse_expansion(std::str::from_utf8(&buf).unwrap(), None).unwrap();
        prop_assert!(back == p);
    }
}

#[test]
fn evaluate_refuses_open_expansions() {
    let p = expansion(5, 0, 0, 2, 1, 0);
    let half: Vec<_> = p.terms().iter().take(1).cloned().collect();
    let open = Expansion::new(lattice(), 0, 0, p.class_mu(), half).unwrap();
    assert!(!open.is_conjugate_closed());
    assert!(open.evaluate(5.0).is_err());
    assert!(open.evaluate_complex(5.0).is_ok());
}
