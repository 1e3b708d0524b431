//! Expansions `Σ z^α ξ_α` in powers of the scale vector, and the operators
//! acting on them.

mod exponent;
pub mod io;
mod ops;
pub mod random;
mod series;
mod trig;

pub use exponent::{ExponentVector, FREQUENCY_TOLERANCE};
pub use ops::{bilinear_expansion, embed, op_m, op_r, op_stokes_shifted, op_z, op_z_with, time_derivative};
pub use series::{power, Expansion, Term, CLOSURE_TOLERANCE, DROP_TOLERANCE, REALNESS_TOLERANCE};
pub use trig::{from_trig_form, to_trig_form, Trig, TrigExpansion, TrigFactor, TrigTerm};
