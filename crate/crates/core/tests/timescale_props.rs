use num_complex::Complex64;
use proptest::prelude::*;

use coherent_nse::timescales::{integrate, iter_exp, iter_log, ScaleVector};

proptest! {
    #[test]
    fn iterated_logs_increase(m in 0i32..=3, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let start = iter_exp(m as u32, 0.0) + 1e-3;
        let (t1, t2) = (start + a * 1e3, start + a * 1e3 + b * 1e3 + 1e-3);
        prop_assert!(iter_log(m, t1).unwrap() < iter_log(m, t2).unwrap());
    }

    #[test]
    fn powers_multiply(re1 in -3.0..3.0f64, re2 in -3.0..3.0f64, im1 in -2.0..2.0f64, im2 in -2.0..2.0f64, t in 20.0..1e6f64) {
        let s = ScaleVector::new(2, t).unwrap();
        let a = s.power([0.0, re1, 0.5, re2], [im1, 0.0, im2, 0.0]);
        let b = s.power([0.0, re2, -0.5, re1], [-im1, 0.3, 0.0, 0.0]);
        let ab = s.power([0.0, re1 + re2, 0.0, re1 + re2], [0.0, 0.3, im2, 0.0]);
        // phases of size |Im α| t lose about eps t in absolute accuracy
        prop_assert!((a * b - ab).norm() <= (1e-12 + 8.0 * f64::EPSILON * t) * ab.norm());
    }

    #[test]
    fn imaginary_leading_power_stays_bounded(w in -5.0..5.0f64, t in 1.0..1e12f64) {
        let s = ScaleVector::new(0, t).unwrap();
        let z = s.power([0.0, 0.0], [w, 0.0]);
        prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        let phase = Complex64::from_polar(1.0, (w * t) % std::f64::consts::TAU);
        prop_assert!((z - phase).norm() <= 1e-14 + 8.0 * f64::EPSILON * (w * t).abs());
    }
}

#[test]
fn slower_scales_lose_to_faster_ones() {
    // L_k^λ / L_{k-1} = x^λ / e^x with x = L_k only decreases once L_k > λ,
    // so the second case is compared far out
    for (k, m, lambda, t1, t2) in [(1, 0, 5.0, 1e3, 1e6), (2, 1, 5.0, 1e100, 1e300)] {
        let ratio = |t: f64| iter_log(k, t).unwrap().powf(lambda) / iter_log(m, t).unwrap();
        assert!(ratio(t2) < ratio(t1), "k = {k}, m = {m}");
    }
}

#[test]
fn shifted_and_scaled_arguments() {
    let (t_shift, c, t) = (5.0, 3.0, 1e8);
    let r0 = iter_log(0, t_shift + c * t).unwrap() / iter_log(0, t).unwrap();
    assert!((r0 / c - 1.0).abs() < 0.01);
    // for m >= 1 the ratio approaches 1 like ln c / ln t, so 1% needs a
    // much later time than 1e8
    for m in 1..=2 {
        let gap = |t: f64| (iter_log(m, t_shift + c * t).unwrap() / iter_log(m, t).unwrap() - 1.0).abs();
        assert!(gap(1e8) < gap(1e4), "m = {m}");
        assert!(gap(1e60) < 0.01, "m = {m}: {}", gap(1e60));
    }
}

#[test]
fn quadrature_on_smooth_and_peaked_integrands() {
    let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-14, 1e-13).unwrap();
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12).unwrap();
    let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
    assert!((v - exact).abs() < 1e-9 * exact);
}
