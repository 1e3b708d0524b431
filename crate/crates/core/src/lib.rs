//! Asymptotic expansions of periodic Navier–Stokes solutions driven by
//! coherently decaying forces, together with a pseudo-spectral solver used to
//! check them numerically.

pub mod constructor;
pub mod error;
pub mod expansion;
pub mod harness;
pub mod solver;
pub mod spectral;
mod textio;
pub mod timescales;

pub use error::{Error, Result};
