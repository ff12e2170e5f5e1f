//! Formats, sweeps and the command-line frontend built on `quasiscale-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod sweep;

pub use quasiscale_core as core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] quasiscale_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("invalid range `{0}`: {1}")]
    Range(String, &'static str),
    #[error("{0}")]
    Format(String),
    #[error("{count} mismatches outside the boundary band; first: {first}")]
    Mismatch { count: usize, first: String },
}

impl Error {
    /// Bad user input as opposed to a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Range(..) | Error::Json(_) | Error::Format(_) | Error::Core(quasiscale_core::Error::Parse(_))
        )
    }
}
