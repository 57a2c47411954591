//! Command-line plumbing: experiment configs, result files and run
//! manifests.
//!
//! A config is a flat `key = value` file; `#` starts a comment. Every
//! command writes its CSV or SVG results and a `manifest.json` carrying
//! SHA-256 hashes of the resolved config and of each result file.

mod commands;
mod config;
mod output;

pub use commands::{cache_path, read_count_csv, run_command, Command};
pub use config::{
    Arithmetic, CountMode, DimSet, ExperimentConfig, FitSource, OrbitMode, CACHE_DIR_ENV,
};
pub use output::{fmt_f64, sha256_hex, write_atomic, Csv, ResultFile, RunManifest, RunOutput};
