use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coherent_nse::spectral::random::{random_complex_field, random_field};
use coherent_nse::spectral::{bilinear_b, bilinear_b_complex, ComplexField, GevreyIndex, Lattice, Mode, SpectralField};

fn lattice() -> &'static Arc<Lattice> {
    static L: OnceLock<Arc<Lattice>> = OnceLock::new();
    L.get_or_init(|| Lattice::cube(8).unwrap())
}

fn raw_modes(rng: &mut ChaCha8Rng) -> Vec<([i32; 3], Mode)> {
    lattice()
        .modes()
        .iter()
        .map(|&k| (k, [0, 1, 2].map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))))
        .collect()
}

/// `<a, b>` over the stored modes, for unprojected data.
fn raw_inner(a: &[([i32; 3], Mode)], b: &SpectralField) -> f64 {
    let lat = lattice();
    let sum: f64 = a
        .iter()
        .zip(b.coefficients())
        .map(|((_, x), y)| (0..3).map(|d| (x[d] * y[d].conj()).re).sum::<f64>())
        .sum();
    2.0 * lat.volume() * sum
}

fn raw_norm(a: &[([i32; 3], Mode)]) -> f64 {
    let sum: f64 = a.iter().map(|(_, x)| x.iter().map(|c| c.norm_sqr()).sum::<f64>()).sum();
    (2.0 * lattice().volume() * sum).sqrt()
}

fn gap(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d -= b;
    d.norm()
}

fn omega() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(-1.0), Just(10.0), Just(-10.0), -20.0..20.0f64]
}

fn index() -> impl Strategy<Value = GevreyIndex> {
    (0.0..2.0f64, 0.0..0.5f64).prop_map(|(alpha, sigma)| GevreyIndex { alpha, sigma })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent_and_self_adjoint(seed: u64) {
        let lat = lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = raw_modes(&mut rng);
        let b = raw_modes(&mut rng);
        let pa = SpectralField::leray_project(lat, a.clone());
        let pb = SpectralField::leray_project(lat, b.clone());
        let ppa = SpectralField::leray_project(lat, lat.modes().iter().copied().zip(pa.coefficients().iter().copied()));
        prop_assert!(gap(&ppa, &pa) <= 1e-12 * pa.norm());
        let scale = raw_norm(&a) * raw_norm(&b);
        prop_assert!((raw_inner(&b, &pa) - raw_inner(&a, &pb)).abs() <= 1e-12 * scale);
        prop_assert!(pa.divergence_residual() <= 1e-13);
    }

    #[test]
    fn gevrey_norm_grows_with_both_indices(seed: u64, lo in index(), da in 0.0..1.0f64, ds in 0.0..0.5f64) {
        let u = random_field(lattice(), &mut ChaCha8Rng::seed_from_u64(seed), 2, 0.0);
        let hi = GevreyIndex { alpha: lo.alpha + da, sigma: lo.sigma + ds };
        prop_assert!(u.gevrey_norm(lo) <= u.gevrey_norm(hi) * (1.0 + 1e-15));
    }

    #[test]
    fn shifted_resolvent_inverts_and_gains_one_derivative(seed: u64, w in omega(), idx in index()) {
        let x = random_complex_field(lattice(), &mut ChaCha8Rng::seed_from_u64(seed), 2, 0.0);
        let z = x.resolvent_shift_inverse(w);
        let back = z.apply_stokes_shifted(Complex64::new(0.0, w));
        prop_assert!((&back - &x).norm() <= 1e-12 * x.norm());
        prop_assert!(z.gevrey_norm(idx.shifted(1.0)) <= x.gevrey_norm(idx) * (1.0 + 1e-12));
    }

    #[test]
    fn shifted_stokes_norm_splits(seed: u64, w in omega(), idx in index()) {
        let x = random_complex_field(lattice(), &mut ChaCha8Rng::seed_from_u64(seed), 2, 0.0);
        let lhs = x.apply_stokes_shifted(Complex64::new(0.0, w)).gevrey_norm(idx).powi(2);
        let rhs = x.apply_a_power(1.0).gevrey_norm(idx).powi(2) + w * w * x.gevrey_norm(idx).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn advection_is_skew(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(lattice(), &mut rng, 2, 0.0);
        let v = random_field(lattice(), &mut rng, 2, 0.0);
        let b = bilinear_b(&u, &v).unwrap();
        let scale = u.gevrey_norm(GevreyIndex::V) * v.gevrey_norm(GevreyIndex::V).powi(2);
        prop_assert!(b.inner(&v).abs() <= 1e-12 * scale);
    }

    #[test]
    fn complex_bilinear_follows_real_parts(seed: u64) {
        let lat = lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(lat, &mut rng, 2, 0.0);
        let v = random_field(lat, &mut rng, 2, 0.0);
        let zero = SpectralField::zeros(lat);
        let iu = ComplexField::new(zero.clone(), u.clone()).unwrap();
        let iv = ComplexField::new(zero, v.clone()).unwrap();
        let b = bilinear_b(&u, &v).unwrap();
        let bc = bilinear_b_complex(&iu, &iv).unwrap();
        let mut sum = bc.re().clone();
        sum += &b;
        prop_assert!(sum.norm() <= 1e-13 * b.norm());
        prop_assert!(bc.im().norm() <= 1e-13 * b.norm());

        let w1 = random_complex_field(lat, &mut rng, 2, 0.0);
        let w2 = random_complex_field(lat, &mut rng, 2, 0.0);
        let lhs = bilinear_b_complex(&w1.conj(), &w2.conj()).unwrap();
        let rhs = bilinear_b_complex(&w1, &w2).unwrap().conj();
        prop_assert!((&lhs - &rhs).norm() <= 1e-13 * rhs.norm());
    }

    #[test]
    fn physical_round_trip(seed: u64) {
        let u = random_field(lattice(), &mut ChaCha8Rng::seed_from_u64(seed), 2, 0.0);
        let p = u.to_physical();
        let back = SpectralField::from_physical(lattice(), [&p[0], &p[1], &p[2]]);
        prop_assert!(gap(&back, &u) <= 1e-13 * u.norm());
    }
}

#[test]
fn bilinear_constant_is_finite() {
    let lat = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for alpha in [0.5, 1.0] {
        for sigma in [0.0, 0.1] {
            let (lo, hi) = (GevreyIndex { alpha, sigma }, GevreyIndex { alpha: alpha + 0.5, sigma });
            let mut max: f64 = 0.0;
            for _ in 0..1000 {
                let w1 = random_complex_field(lat, &mut rng, lat.cutoff(), 0.5);
                let w2 = random_complex_field(lat, &mut rng, lat.cutoff(), 0.5);
                max = max.max(bilinear_b_complex(&w1, &w2).unwrap().gevrey_norm(lo) / (w1.gevrey_norm(hi) * w2.gevrey_norm(hi)));
            }
            assert!(max.is_finite() && max > 0.0);
        }
    }
}
