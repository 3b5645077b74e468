use std::path::PathBuf;

use thiserror::Error;

use crate::quadrature::QuadratureKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported basis degree {0} (supported: 0..=3)")]
    UnsupportedDegree(usize),

    #[error("mode index {index} out of range for a basis of dimension {dim}")]
    ModeOutOfRange { index: usize, dim: usize },

    #[error("unsupported quadrature rule: {kind:?} with {npts} points")]
    UnsupportedQuadrature { kind: QuadratureKind, npts: usize },

    #[error("point (x = {x}, v = {v}) lies outside the phase-space domain")]
    OutOfDomain { x: f64, v: f64 },

    #[error("mesh or basis mismatch: {0}")]
    Mismatch(String),

    #[error("non-finite value in the solution at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid time step control: {0}")]
    InvalidStep(String),

    #[error("Q1 mode index m = {0} must be a positive odd integer")]
    InvalidModeIndex(i64),

    #[error("not enough peaks: found {found}, need {needed}")]
    NotEnoughPeaks { found: usize, needed: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (last omega = {last_re} {last_im:+}i, |eps| = {residual:e})")]
    NoConvergence {
        iterations: usize,
        last_re: f64,
        last_im: f64,
        residual: f64,
    },

    #[error("wavenumber k = {0} outside the root-tracking range [0.2, 1]")]
    WavenumberOutOfRange(f64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("no analytic v/f'_eq ratio for the {0} equilibrium")]
    UnsupportedEquilibrium(&'static str),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to serialize manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
