//! Enumeration of Apollonian-type packings up to a cutoff, with a
//! deterministic canonical order and a binary cache.

pub mod cache;
mod engine;
pub(crate) mod fxhash;
mod spec;
mod store;

pub use cache::{load, load_expecting, save};
pub use engine::GenerationStats;
pub use spec::{ClusterRoot, GenerationCutoff, PackingSpec, MAX_EXACT_DENOMINATOR};
pub use store::{generate, InvarianceReport, PackingStore, Records, MAX_EXACT_CUTOFF};
