use thiserror::Error;

use crate::simulation::SimTrace;
use crate::synthesis::ClCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: String,
        got: String,
    },

    #[error("network graph is not connected")]
    NotConnected,

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("dynamics matrix is not neutrally stable")]
    NotNeutrallyStable,

    /// Agent indices are 1-based here to match the document format.
    #[error("pair (C_{i}{j}, A) is not detectable", i = .0 + 1, j = .1 + 1)]
    NotDetectable(usize, usize),

    #[error("neutral split is ill-conditioned (cond = {0:.3e})")]
    SplitIllConditioned(f64),

    #[error("neutral split failed to block-diagonalize: {0}")]
    SplitFailed(String),

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("Lyapunov matrix P is singular")]
    SingularP,

    #[error("CL-detectability not established: no common P found (best eps = {:.4e})", .best.eps)]
    Infeasible { best: Box<ClCertificate> },

    #[error("could not identify the synchronization-subspace eigenpairs")]
    EigenvectorMatchFailed,

    #[error("trajectory diverged at t = {at:.6}")]
    Diverged { at: f64, trace: Box<SimTrace> },

    #[error("parameter must be positive: {0}")]
    NonPositiveParameter(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn dims(what: &str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            what: what.to_string(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
