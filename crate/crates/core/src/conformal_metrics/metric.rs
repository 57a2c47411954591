use std::f64::consts::PI;
use std::fmt;

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::inversive_geometry::{Oriented, CURV};
use crate::tolerance::TOL;

/// A conformal metric `f(x) dx` on an open set `U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConformalMetric {
    /// `f = 1` on all of space.
    Euclidean,
    /// `f = 2 / (1 + |z|^2)` on all of space.
    Spherical,
    /// `f = 1 / x_n` on the upper half-space.
    Hyperbolic,
    /// `f = y^(-k)` on the upper half-plane.
    PowerLaw { k: f64 },
}

impl fmt::Display for ConformalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalMetric::Euclidean => write!(f, "euclidean"),
            ConformalMetric::Spherical => write!(f, "spherical"),
            ConformalMetric::Hyperbolic => write!(f, "hyperbolic"),
            ConformalMetric::PowerLaw { k } => write!(f, "power_law:{k:?}"),
        }
    }
}

impl std::str::FromStr for ConformalMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "euclidean" => Ok(ConformalMetric::Euclidean),
            "spherical" => Ok(ConformalMetric::Spherical),
            "hyperbolic" => Ok(ConformalMetric::Hyperbolic),
            _ => match s.strip_prefix("power_law:").map(|k| k.trim().parse::<f64>()) {
                Some(Ok(k)) if k.is_finite() => Ok(ConformalMetric::PowerLaw { k }),
                _ => Err(Error::Config(format!("unknown metric `{s}`"))),
            },
        }
    }
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(n as f64 / 2.0) / gamma_half_int(n + 2),
    }
}

/// Gamma(m / 2) for positive integer m.
fn gamma_half_int(m: usize) -> f64 {
    let mut g = if m % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if m % 2 == 0 { 1.0 } else { 0.5 };
    while x < m as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolMethod {
    ClosedForm,
    Quadrature,
}

/// `Vol_f` of a ball; `value` is infinite for planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolResult {
    pub value: f64,
    pub method: VolMethod,
    pub error_bound: f64,
}

impl VolResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    fn closed(value: f64) -> Self {
        Self {
            value,
            method: VolMethod::ClosedForm,
            error_bound: 0.0,
        }
    }
}

impl ConformalMetric {
    /// True when `U` is all of space.
    pub fn is_global(&self) -> bool {
        matches!(self, ConformalMetric::Euclidean | ConformalMetric::Spherical)
    }

    /// Exponent `k` of the density `y^(-k)` for half-space metrics.
    pub fn height_exponent(&self) -> Option<f64> {
        match *self {
            ConformalMetric::Hyperbolic => Some(1.0),
            ConformalMetric::PowerLaw { k } => Some(k),
            _ => None,
        }
    }

    /// Density at `z` (last coordinate is the height for half-space metrics).
    pub fn density(&self, z: &[f64]) -> Result<f64> {
        match *self {
            ConformalMetric::Euclidean => Ok(1.0),
            ConformalMetric::Spherical => Ok(2.0 / (1.0 + z.iter().map(|x| x * x).sum::<f64>())),
            ConformalMetric::Hyperbolic | ConformalMetric::PowerLaw { .. } => {
                if matches!(self, ConformalMetric::PowerLaw { .. }) && z.len() != 2 {
                    return Err(Error::Domain("power-law metrics live on the upper half-plane".into()));
                }
                let h = *z.last().unwrap();
                if h > 0.0 {
                    Ok(h.powf(-self.height_exponent().unwrap()))
                } else {
                    Err(Error::Domain(format!("point with height {h} is outside the half-space")))
                }
            }
        }
    }

    /// Unchecked density with `+inf` outside the domain.
    pub(crate) fn density_or_inf(&self, z: &[f64]) -> f64 {
        self.density(z).unwrap_or(f64::INFINITY)
    }

    /// Supremum of the density over points at distance at least `dist` from
    /// the origin and height at least `height` (ignored for global metrics).
    pub fn sup_density(&self, dist_from_origin: f64, min_height: f64) -> f64 {
        match *self {
            ConformalMetric::Euclidean => 1.0,
            ConformalMetric::Spherical => {
                let d = dist_from_origin.max(0.0);
                2.0 / (1.0 + d * d)
            }
            ConformalMetric::Hyperbolic | ConformalMetric::PowerLaw { .. } => {
                let k = self.height_exponent().unwrap();
                if min_height > 0.0 {
                    min_height.powf(-k)
                } else if k > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

/// `Vol_f` of the closed ball bounded by `s`.
///
/// The enclosing circle of a bounded packing is measured by the disk it
/// bounds geometrically. Planes have infinite volume.
pub fn vol_f<const D: usize>(metric: &ConformalMetric, s: &Oriented<D>) -> Result<VolResult> {
    let n = D - 2;
    let b = s.v[CURV];
    if b == 0.0 {
        return Ok(VolResult::closed(f64::INFINITY));
    }
    let r = 1.0 / b.abs();
    let c: Vec<f64> = s.v[2..].iter().map(|x| x / b).collect();
    match *metric {
        ConformalMetric::Euclidean => Ok(VolResult::closed(unit_ball_volume(n) * r.powi(n as i32))),
        ConformalMetric::Spherical => {
            let rho = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            // angular radius of the stereographic image cap
            let theta = (rho + r).atan() - (rho - r).atan();
            let v = if n == 2 {
                2.0 * PI * (1.0 - theta.cos())
            } else if n == 3 {
                PI * (2.0 * theta - (2.0 * theta).sin())
            } else {
                return ball_quadrature(metric, &c, r);
            };
            Ok(VolResult::closed(v))
        }
        ConformalMetric::Hyperbolic => {
            let h = c[n - 1];
            if h <= r {
                return Err(Error::Domain(format!(
                    "ball of radius {r} at height {h} is not inside the half-space"
                )));
            }
            let cosh = h / ((h - r) * (h + r)).sqrt();
            let v = if n == 2 {
                2.0 * PI * (cosh - 1.0)
            } else if n == 3 {
                let rho = cosh.acosh();
                PI * ((2.0 * rho).sinh() - 2.0 * rho)
            } else {
                return Err(Error::Domain("hyperbolic volumes are implemented for n <= 3".into()));
            };
            Ok(VolResult::closed(v))
        }
        ConformalMetric::PowerLaw { k } => {
            if n != 2 {
                return Err(Error::Domain("power-law metrics live on the upper half-plane".into()));
            }
            let h = c[1];
            if h <= r {
                return Err(Error::Domain(format!(
                    "disk of radius {r} at height {h} is not inside the half-plane"
                )));
            }
            power_law_area(k, h, r)
        }
    }
}

/// `int_disk y^(-2k) dA` by integrating across horizontal chords:
/// with `y = h + r sin(phi)` the integrand `2 r^2 cos^2(phi) y^(-2k)` is smooth.
pub(crate) fn power_law_area(k: f64, h: f64, r: f64) -> Result<VolResult> {
    let half = std::f64::consts::FRAC_PI_2;
    let q = integrate(
        |phi| {
            let c = phi.cos();
            2.0 * r * r * c * c * (h + r * phi.sin()).powf(-2.0 * k)
        },
        -half,
        half,
        TOL.quadrature * 0.1,
        0.0,
        4000,
    )?;
    Ok(VolResult {
        value: q.value,
        method: VolMethod::Quadrature,
        error_bound: q.error,
    })
}

/// Independent oracle: nested adaptive quadrature in polar (n = 2) or
/// spherical (n = 3) coordinates centered at the ball's center.
pub fn ball_quadrature(metric: &ConformalMetric, c: &[f64], r: f64) -> Result<VolResult> {
    let rel = TOL.quadrature * 0.01;
    let n = c.len();
    let fpow = |p: &[f64]| metric.density_or_inf(p).powi(n as i32);
    let mut inner_err = 0.0f64;
    let mut failure: Option<Error> = None;
    let value = match n {
        2 => {
            let q = integrate(
                |phi| {
                    let (s, co) = phi.sin_cos();
                    match integrate(
                        |rho| rho * fpow(&[c[0] + rho * co, c[1] + rho * s]),
                        0.0,
                        r,
                        rel,
                        0.0,
                        400,
                    ) {
                        Ok(q) => {
                            inner_err = inner_err.max(q.error);
                            q.value
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    }
                },
                0.0,
                2.0 * PI,
                rel,
                0.0,
                400,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            q?
        }
        3 => {
            let q = integrate(
                |phi| {
                    let (sp, cp) = phi.sin_cos();
                    let r2 = integrate(
                        |theta| {
                            let (st, ct) = theta.sin_cos();
                            let d = [st * cp, st * sp, ct];
                            match integrate(
                                |rho| {
                                    rho * rho
                                        * fpow(&[c[0] + rho * d[0], c[1] + rho * d[1], c[2] + rho * d[2]])
                                },
                                0.0,
                                r,
                                rel,
                                0.0,
                                200,
                            ) {
                                Ok(q) => st * q.value,
                                Err(_) => f64::NAN,
                            }
                        },
                        0.0,
                        PI,
                        rel,
                        0.0,
                        200,
                    );
                    r2.map(|q| q.value).unwrap_or(f64::NAN)
                },
                0.0,
                2.0 * PI,
                rel,
                0.0,
                200,
            )?;
            if !q.value.is_finite() {
                return Err(Error::Accuracy { achieved: f64::NAN });
            }
            q
        }
        _ => return Err(Error::Domain("quadrature oracle supports n = 2, 3".into())),
    };
    Ok(VolResult {
        value: value.value,
        method: VolMethod::Quadrature,
        error_bound: value.error + inner_err,
    })
}

/// Volume used for counting: planes, and balls reaching the boundary of a
/// half-space where the integral diverges, count as infinite.
///
/// A disk tangent to `y = 0` has finite `y^(-k)` area iff `k < 3/4`; a disk
/// crossing `y = 0` diverges iff `k >= 1/2` and otherwise leaves the domain.
pub fn counting_volume<const D: usize>(metric: &ConformalMetric, s: &Oriented<D>) -> Result<f64> {
    let b = s.v[CURV];
    if b == 0.0 {
        return Ok(f64::INFINITY);
    }
    if let Some(k) = metric.height_exponent() {
        let r = 1.0 / b.abs();
        let h = s.v[D - 1] / b;
        let gap = h - r;
        if gap <= 1e-13 * (1.0 + h.abs()) {
            let tangent = gap.abs() <= 1e-13 * (1.0 + h.abs());
            return if (tangent && k >= 0.75) || (!tangent && k >= 0.5) {
                Ok(f64::INFINITY)
            } else if tangent && D == 4 {
                power_law_area(k, r, r).map(|v| v.value)
            } else {
                Err(Error::Domain(format!(
                    "ball crosses the boundary of the half-space where y^-{k} is not integrable"
                )))
            };
        }
    }
    vol_f(metric, s).map(|v| v.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversive_geometry::{circle_from_center_radius, Orientation};

    fn circ(x: f64, y: f64, r: f64) -> Oriented<4> {
        circle_from_center_radius((x, y), r, Orientation::Positive).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let e = vol_f(&ConformalMetric::Euclidean, &circ(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(e.value, PI);
        let s = vol_f(&ConformalMetric::Spherical, &circ(0.0, 0.0, 1.0)).unwrap();
        assert!((s.value - 2.0 * PI).abs() < 1e-14);
        let h = vol_f(&ConformalMetric::Hyperbolic, &circ(0.0, 2.0, 1.0)).unwrap();
        assert!((h.value - 2.0 * PI * (2.0 / 3f64.sqrt() - 1.0)).abs() < 1e-14);
        assert!((h.value - 0.972012).abs() < 1e-6);
    }

    #[test]
    fn densities() {
        assert_eq!(ConformalMetric::Spherical.density(&[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(ConformalMetric::Hyperbolic.density(&[0.0, 2.0]).unwrap(), 0.5);
        assert!(ConformalMetric::Hyperbolic.density(&[0.0, -1.0]).is_err());
    }

    #[test]
    fn power_law_matches_hyperbolic_at_one() {
        let c = circ(0.3, 1.7, 0.9);
        let h = vol_f(&ConformalMetric::Hyperbolic, &c).unwrap().value;
        let p = vol_f(&ConformalMetric::PowerLaw { k: 1.0 }, &c).unwrap().value;
        assert!((h - p).abs() < 1e-10 * h);
    }

    #[test]
    fn counting_rules_at_the_boundary() {
        let unit = circ(0.0, 0.0, 1.0);
        assert!(counting_volume(&ConformalMetric::Hyperbolic, &unit).unwrap().is_infinite());
        assert!(counting_volume(&ConformalMetric::PowerLaw { k: 0.5 }, &unit).unwrap().is_infinite());
        assert!(counting_volume(&ConformalMetric::PowerLaw { k: 0.25 }, &unit).is_err());
        let tangent = circ(0.0, 1.0, 1.0);
        assert!(counting_volume(&ConformalMetric::Hyperbolic, &tangent).unwrap().is_infinite());
        let finite = counting_volume(&ConformalMetric::PowerLaw { k: 0.5 }, &tangent).unwrap();
        assert!((finite - 2.0 * PI).abs() < 1e-6, "{finite}");
    }

    #[test]
    fn quadrature_oracle_agrees_with_closed_forms() {
        let c = circ(0.4, 1.3, 0.7);
        for m in [ConformalMetric::Euclidean, ConformalMetric::Spherical, ConformalMetric::Hyperbolic] {
            let closed = vol_f(&m, &c).unwrap().value;
            let quad = ball_quadrature(&m, &[0.4, 1.3], 0.7).unwrap().value;
            assert!((closed - quad).abs() < 1e-9 * closed, "{m}: {closed} vs {quad}");
        }
        let s = crate::inversive_geometry::sphere_from_center_radius([0.2, -0.5, 1.5], 0.9, Orientation::Positive).unwrap();
        for m in [ConformalMetric::Spherical, ConformalMetric::Hyperbolic] {
            let closed = vol_f(&m, &s).unwrap().value;
            let quad = ball_quadrature(&m, &[0.2, -0.5, 1.5], 0.9).unwrap().value;
            assert!((closed - quad).abs() < 1e-8 * closed, "{m}: {closed} vs {quad}");
        }
    }
}
