//! The symmetry group of a packing acting on upper half-space: reduced-word
//! enumeration, Poincaré series, truncated Patterson measures and norm-ball
//! counts.

mod hyperbolic;
mod norm_ball;
mod patterson;
mod poincare;
mod presentation;
mod words;

pub use hyperbolic::{apply_to_point, displacement, hyperbolic_distance, HalfSpacePoint};
pub use norm_ball::{fit_norm_growth, norm_ball_count, norm_ball_data, NormBallData};
pub use patterson::{patterson_truncated, Atom, TruncatedPattersonMeasure, MAX_ATOMS};
pub use poincare::{poincare_partial, poincare_series, PoincareRow, PoincareSeries};
pub use presentation::GroupPresentation;
pub use words::{enumerate_words, orbit_points, reduced_word_count, OrbitPoint, ReducedWord, WordEnumeration};
