use std::path::PathBuf;

use num_complex::Complex64;

use crate::linalg::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix dimension {found} not supported (expected {expected})")]
    Dimension { expected: &'static str, found: usize },

    #[error("invalid density matrix: {}", format_violations(.violations))]
    InvalidState { violations: Vec<Violation> },

    #[error("correlation |alpha| = {modulus:.6} exceeds positivity bound {bound:.6} (alpha = {alpha})")]
    AlphaOutOfBound {
        alpha: Complex64,
        modulus: f64,
        bound: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("propagator does not conserve local energy (max |[U, H]| = {norm:.3e})")]
    EnergyConservationViolated { norm: f64 },

    #[error("path functional undefined: {0}")]
    UndefinedOnPath(String),

    #[error("heat {value:.9e} peV is {distance:.3e} peV away from the nearest support point")]
    UnsnappableHeat { value: f64, distance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("snapshot {index} invalid: {}", format_violations(.violations))]
    InvalidSnapshot {
        index: usize,
        violations: Vec<Violation>,
    },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("{failed} of {total} Monte-Carlo resamples failed (limit 1%); first failure: {first}")]
    Resampling {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("at t = {time_s:.6e} s, stage `{stage}`: {source}")]
    Stage {
        time_s: f64,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at(self, time_s: f64, stage: &'static str) -> Error {
        Error::Stage {
            time_s,
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
