//! Truncated Fourier fields on the periodic box: Gevrey norms, the Stokes
//! operator, the Leray projection, the bilinear form and their
//! complexifications.

mod bilinear;
pub(crate) mod fft;
mod field;
pub mod io;
mod lattice;
pub mod random;

pub use bilinear::{bilinear_b, bilinear_b_complex, bilinear_b_self};
pub use field::{d0, project_mode, ComplexField, GevreyIndex, Mode, SpectralField};
pub use lattice::Lattice;
