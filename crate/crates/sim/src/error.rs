use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("configuration violates {invariant}: {message}")]
    Invalid { invariant: &'static str, message: String },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("diagnostics file {path}: {message}")]
    Diagnostics { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] pitaevskii_core::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
