//! Apollonian circle and sphere packings.
//!
//! Packings are generated by reflecting Descartes tuples in inversive
//! coordinates, stored in a canonical binary cache, and then measured:
//! counting by volume in a conformal metric, covering sums for the residual
//! set, and orbit sums for the symmetry group acting on hyperbolic space.

pub mod cli_io;
pub mod conformal_metrics;
pub mod counting_asymptotics;
pub mod error;
pub mod group_orbits;
pub mod inversive_geometry;
pub mod packing_generator;
pub mod residual_set;
pub mod tolerance;

pub use error::{CacheError, Error, ErrorCategory, Result};
