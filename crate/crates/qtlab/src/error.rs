//! Crate-wide error type. Variants map onto the CLI exit code classes:
//! input problems (2), numerical hypothesis failures (3), internal
//! consistency failures (4).

use crate::perturb::PerturbReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Which mathematical hypothesis of the perturbation theory failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// E = A A^D E A A^D does not hold within tolerance.
    CoreCondition { residual: f64, tol: f64 },
    /// rho_QT(A^D * E) is not inside [0, 1).
    SpectralRadius { rho: f64 },
    /// A claimed generalized inverse fails its defining equations.
    DefiningEquations { worst: f64, tol: f64 },
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::CoreCondition { residual, tol } => write!(
                f,
                "core perturbation condition failed: residual {residual:.3e} exceeds {tol:.3e}"
            ),
            Hypothesis::SpectralRadius { rho } => {
                write!(f, "spectral radius hypothesis failed: rho(A^D * E) = {rho:.6} is not in [0, 1)")
            }
            Hypothesis::DefiningEquations { worst, tol } => write!(
                f,
                "defining equations fail: worst residual {worst:.3e} exceeds {tol:.3e}"
            ),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse failure in {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("shape error in {path}: {detail}")]
    Shape { path: String, detail: String },

    #[error("matrix is numerically singular: sigma_min {sigma_min:.3e} <= tol {tol:.3e}")]
    Singular { sigma_min: f64, tol: f64 },

    #[error("exponent {given} is below the index {index}")]
    ExponentBelowIndex { given: usize, index: usize },

    #[error("{0}")]
    Hypothesis(Hypothesis),

    #[error(
        "perturbation bounds inapplicable: ||A^D * E||_s = {norm_ade:.6} >= 1 (partial report attached)"
    )]
    BoundInapplicable { norm_ade: f64, report: Box<PerturbReport> },

    #[error("matrix lacks the chi block structure: residual {residual:.3e} exceeds {tol:.3e}")]
    ChiStructure { residual: f64, tol: f64 },

    #[error("matrix is not z-block circulant: residual {residual:.3e} exceeds {tol:.3e}")]
    NotZCirculant { residual: f64, tol: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}

impl Error {
    /// CLI exit code class for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_) | Error::Io { .. } | Error::Parse { .. } | Error::Shape { .. } => 2,
            Error::Singular { .. }
            | Error::ExponentBelowIndex { .. }
            | Error::Hypothesis(_)
            | Error::BoundInapplicable { .. } => 3,
            Error::ChiStructure { .. } | Error::NotZCirculant { .. } | Error::Inconsistency(_) => 4,
        }
    }
}
