use std::path::PathBuf;

use num_rational::Rational64;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("time {t} is outside the domain of {what} (requires t > {bound})")]
    Domain { what: String, t: f64, bound: f64 },

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid Gevrey index (alpha = {alpha}, sigma = {sigma})")]
    InvalidGevreyIndex { alpha: f64, sigma: f64 },

    #[error("class violation: {0}")]
    Class(String),

    #[error("expansion is not conjugate-closed: {0}")]
    NotConjugateClosed(String),

    #[error("scale depth mismatch: {left} vs {right}")]
    DepthMismatch { left: i32, right: i32 },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: i32, lo: i32, hi: i32 },

    #[error("imaginary residue {residue:e} exceeds tolerance (relative to scale {scale:e})")]
    ImaginaryResidue { residue: f64, scale: f64 },

    #[error("exponent sequence: {0}")]
    Sequence(String),

    #[error("no exponent {0} in the sequence")]
    MissingExponent(Rational64),

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("solution blew up at t = {t} (norm {norm:e} exceeds {threshold:e}); reduce force amplitudes")]
    BlowUp { t: f64, norm: f64, threshold: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("solver configuration: {0}")]
    Solver(String),

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
