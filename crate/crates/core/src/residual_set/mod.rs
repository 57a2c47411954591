//! Covers of the residual set by gap disks, covering-sum dimension estimates
//! and weighted Hausdorff sums.

mod cover;
mod dimension;
mod proximity;

pub use cover::{cantor_dust_cover, gap_cover, gap_covers, hausdorff_sum, level_scale, CoverDisk, GapCover};
pub use dimension::{
    cantor_dust_dimension, dimension_from_covers, estimate_dimension, estimate_weighted_measure, hurwitz_zeta,
    weighted_sum, DimensionEstimate, LevelSum, MIN_LEVELS,
};
pub use proximity::ResidualProximity;
