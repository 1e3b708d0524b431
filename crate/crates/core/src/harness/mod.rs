//! Experiment orchestration: configuration, decay fits, residual reports,
//! the self-test suite.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;
pub mod selftest;

pub use config::{ExperimentConfig, ExperimentKind, OUTPUT_ENV};
pub use experiments::{expand, simulate, run_experiment, run_lemma_table, run_linear_experiment, run_nse_experiment, LemmaCurve, LemmaTable};
pub use fit::{fit_decay_exponent, log_spaced, DecayFit};
pub use report::{PairedRun, Regime, ResidualReport, Truncation};
pub use selftest::{run_selftest, Fault, SelftestReport};
