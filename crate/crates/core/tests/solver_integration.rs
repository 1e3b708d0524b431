mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coherent_nse::solver::{integrate_nse, SolverConfig};
use coherent_nse::spectral::random::random_field;
use coherent_nse::spectral::{Lattice, SpectralField};
use coherent_nse::Error;

#[test]
fn unforced_flow_loses_energy_and_stays_solenoidal() {
    let lat = Lattice::cube(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = &random_field(&lat, &mut rng, 4, 1.0) * 2.0;
    let zero = SpectralField::zeros(&lat);
    let mut cfg = SolverConfig::new(2e-3, 0.0, 1.0).with_samples((0..=100).map(|i| i as f64 * 0.01).collect());
    cfg.keep_fields = true;
    let traj = integrate_nse(&u0, |_| Ok(zero.clone()), &cfg).unwrap();
    assert_eq!(traj.times.len(), 101);
    assert!(traj.energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    for u in &traj.fields {
        assert!(u.divergence_residual() <= 1e-13);
    }
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let lat = Lattice::cube(16).unwrap();
    let m = common::Manufactured::new(&lat);
    let errs: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&dt| m.error(dt, 1.0, 3.0)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..=5.0).contains(&ratio), "errors {errs:?}");
    }
    assert!(m.error(1e-3, 1.0, 3.0) < 1e-5);
}

#[test]
fn runaway_growth_is_reported() {
    let lat = Lattice::cube(8).unwrap();
    let u0 = SpectralField::zeros(&lat);
    let m = common::Manufactured::new(&lat);
    let mut cfg = SolverConfig::new(1e-2, 0.0, 5.0);
    cfg.blowup_factor = 2.0;
    let err = integrate_nse(&u0, |t| Ok(&m.force(1.0) * (1.0 + 10.0 * t)), &cfg).unwrap_err();
    assert!(matches!(err, Error::BlowUp { .. }));
}

#[test]
fn step_must_divide_the_interval() {
    let lat = Lattice::cube(8).unwrap();
    let zero = SpectralField::zeros(&lat);
    let cfg = SolverConfig::new(0.3, 0.0, 1.0);
    assert!(integrate_nse(&zero, |_| Ok(zero.clone()), &cfg).is_err());
}
