use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside the domain: {0}")]
    OutOfDomain(String),

    #[error("no records")]
    NoRecords,

    #[error("trace does not cover t = {t} (last node {last})")]
    TraceTooShort { t: f64, last: f64 },

    #[error("horizon too long: contraction factor q = {q} >= 1")]
    HorizonTooLong { q: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("malformed data spec `{spec}`: {reason}")]
    DataSpec { spec: String, reason: String },

    #[error("initial data violate the decay condition sup_(r>=1) |r phi(r)| < inf required on the exterior ball: {0}")]
    DecayCondition(String),

    #[error("study aborted at eps = {eps}: {reason} ({} points completed)", completed.len())]
    StudyAborted { eps: f64, reason: String, completed: Vec<(f64, f64)> },

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
