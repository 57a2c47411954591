use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Math,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 1,
            ErrorCategory::Math => 2,
            ErrorCategory::Io => 3,
        }
    }
}

/// Errors raised while reading or writing a packing cache file.
#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not a packing cache (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("spec fingerprint mismatch: file {found}, expected {expected}")]
    Fingerprint { found: String, expected: String },
    #[error("cache truncated: {0}")]
    Truncated(String),
    #[error("arithmetic mode mismatch: cache is {found}, pipeline expects {expected}")]
    ModeMismatch { found: &'static str, expected: &'static str },
    #[error("corrupt cache: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("normalization violated: |Q - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("exact arithmetic overflow: {0}")]
    Overflow(String),
    #[error("requested bound {requested} exceeds the store cutoff {cutoff}")]
    OutOfCutoff { requested: f64, cutoff: f64 },
    #[error("cutoff insufficient: {0}")]
    CutoffInsufficient(String),
    #[error("quadrature did not converge (achieved relative error {achieved:e})")]
    Accuracy { achieved: f64 },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("bracketing failed: {0}")]
    Bracket(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Cache(_) | Error::Io(_) => ErrorCategory::Io,
            _ => ErrorCategory::Math,
        }
    }
}
