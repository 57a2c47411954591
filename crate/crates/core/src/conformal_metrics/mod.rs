//! Conformal metrics `(U, f)`, `f`-volumes of balls and test regions.

mod metric;
pub mod quadrature;
mod region;

pub use metric::{
    ball_quadrature, counting_volume, unit_ball_volume, vol_f, ConformalMetric, VolMethod, VolResult,
};
pub use region::Region;
