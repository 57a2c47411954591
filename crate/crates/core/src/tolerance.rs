//! Numerical tolerances shared by every module.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed |Q - 1| (relative to coordinate magnitude) for freshly built values.
    pub construction: f64,
    /// Allowed |Q - 1| after chains of reflections or map applications.
    pub chain: f64,
    /// Allowed deviation of a pairwise product from -1 in a float Descartes tuple.
    pub tangency: f64,
    /// Distance below which two tangency points are considered coincident.
    pub coincidence: f64,
    /// Relative grid step of the float dedup key, multiplied by max(1, T).
    pub dedup_grid: f64,
    /// Relative target of the adaptive quadrature.
    pub quadrature: f64,
    /// Relative slope of N_t t^(alpha/2) per decade accepted as a plateau.
    pub plateau_slope: f64,
    /// Relative tolerance of the Frobenius-norm / displacement identity.
    pub bridge: f64,
    /// Allowed deviation from identity for involution checks.
    pub involution: f64,
}

pub const TOL: Tolerances = Tolerances {
    construction: 1e-12,
    chain: 1e-10,
    tangency: 1e-8,
    coincidence: 1e-12,
    dedup_grid: 1e-9,
    quadrature: 1e-9,
    plateau_slope: 0.02,
    bridge: 1e-8,
    involution: 1e-10,
};

/// Relative normalization error |Q - 1| / (1 + |c|^2 + |b bhat|).
pub(crate) fn relative_q_error(q: f64, magnitude: f64) -> f64 {
    (q - 1.0).abs() / (1.0 + magnitude)
}
