use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or shape disagreement between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A text input failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// A binary input is malformed.
    #[error("{path}: byte {offset}: {msg}")]
    Binary {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    /// The same person id appears twice within one view.
    #[error("duplicate person id {id} ({context})")]
    DuplicateId { id: u64, context: String },

    /// A NaN or infinity showed up where finite values are required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Two views share no person ids.
    #[error("person id sets have an empty intersection")]
    EmptyIntersection,

    /// No cross-view pair shares a label, so the intra-personal moment is undefined.
    #[error("no cross-view pair shares a label")]
    NoPositivePairs,

    /// Fewer than two distinct labels in a view.
    #[error("need at least two distinct labels per view")]
    SingleLabel,

    /// The regularized intra-personal moment is not positive definite.
    #[error("Cholesky factorization failed: increase reg_eps")]
    NotPositiveDefinite,

    /// The generalized eigenproblem produced no positive eigenvalue to project on.
    #[error("no positive eigenvalue available for projection")]
    NoPositiveEigenvalues,

    /// Not enough identities for the requested split.
    #[error("too few persons: {0}")]
    TooFewPersons(String),

    /// Bad configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A persisted model file is unreadable.
    #[error("bad model file: {0}")]
    ModelFormat(String),

    /// An output file could not be written.
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A cross-validation fold failed; the fold index identifies where.
    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad
    /// configuration or unreadable inputs. The CLI maps these to exit code 2.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite
            | Error::NoPositiveEigenvalues
            | Error::NoPositivePairs
            | Error::SingleLabel => true,
            Error::Fold { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
