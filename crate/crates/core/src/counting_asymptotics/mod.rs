//! Counting functions `N_t(P, f, E)`, power-law fits and the experiments on
//! the strip packing.

mod curve;
mod experiments;
mod fit;

pub use curve::{count_curve, geometric_grid, CountCurve};
pub use experiments::{
    band_tail_experiment, estimate_ca, ideal_triangle_count, ideal_triangle_curve, BandRow, BandTable, CAEstimate,
    PLATEAU_MIN_POINTS,
};
pub use fit::{
    curvature_counts, default_window, fit_curvature_growth, fit_exponent, fit_power_law, FitResult, MIN_FIT_POINTS,
};

/// Reference value of the curvature-growth exponent of Apollonian circle
/// packings.
pub const ALPHA: f64 = 1.30568;
/// Reference value of the exponent for the Apollonian sphere packing.
pub const SPHERE_EXPONENT: f64 = 2.473946;
