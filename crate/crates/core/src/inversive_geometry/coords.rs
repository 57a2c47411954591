use crate::error::{Error, Result};
use crate::tolerance::{relative_q_error, TOL};

/// Slot of the curvature in a coordinate vector.
pub const CURV: usize = 0;
/// Slot of the co-curvature.
pub const COCURV: usize = 1;

/// Orientation of a circle: positive circles bound their disk, negative ones
/// bound the complement (the enclosing circle of a bounded packing).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// An oriented circle (D = 4) or sphere (D = 5) in inversive coordinates
/// `[b, bhat, b*x, b*y(, b*z)]`.
///
/// For a plane `b = 0`, the trailing coordinates are the unit normal `n` and
/// `bhat = 2h` where the plane is `{x . n = h}`; its interior is `{x . n > h}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oriented<const D: usize> {
    pub v: [f64; D],
}

pub type OrientedCircle = Oriented<4>;
pub type OrientedSphere = Oriented<5>;

/// The Lorentz bilinear form `c.c' - (b bhat' + bhat b') / 2`.
#[inline]
pub fn bilinear<const D: usize>(u: &[f64; D], v: &[f64; D]) -> f64 {
    let mut s = -0.5 * (u[CURV] * v[COCURV] + u[COCURV] * v[CURV]);
    for k in 2..D {
        s += u[k] * v[k];
    }
    s
}

fn magnitude<const D: usize>(v: &[f64; D]) -> f64 {
    let mut m = (v[CURV] * v[COCURV]).abs();
    for x in &v[2..] {
        m += x * x;
    }
    m
}

impl<const D: usize> Oriented<D> {
    /// Wraps raw coordinates without checking normalization.
    pub const fn from_coords(v: [f64; D]) -> Self {
        Self { v }
    }

    /// Wraps raw coordinates, rejecting vectors off the quadric `Q = 1`.
    pub fn new(v: [f64; D]) -> Result<Self> {
        let c = Self { v };
        c.check_normalized(TOL.construction)?;
        Ok(c)
    }

    pub fn curvature(&self) -> f64 {
        self.v[CURV]
    }

    pub fn cocurvature(&self) -> f64 {
        self.v[COCURV]
    }

    pub fn curvature_center(&self) -> &[f64] {
        &self.v[2..]
    }

    pub fn is_plane(&self) -> bool {
        self.v[CURV] == 0.0
    }

    pub fn radius(&self) -> Option<f64> {
        if self.is_plane() {
            None
        } else {
            Some(1.0 / self.v[CURV].abs())
        }
    }

    pub fn quadratic_form(&self) -> f64 {
        bilinear(&self.v, &self.v)
    }

    pub fn normalization_error(&self) -> f64 {
        relative_q_error(self.quadratic_form(), magnitude(&self.v))
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let deviation = self.normalization_error();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotNormalized { deviation })
        }
    }

    /// `b|p|^2 - 2 c.p + bhat`: negative exactly on the interior.
    pub fn power(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), D - 2);
        let mut p2 = 0.0;
        let mut cp = 0.0;
        for (k, x) in p.iter().enumerate() {
            p2 += x * x;
            cp += self.v[2 + k] * x;
        }
        self.v[CURV] * p2 - 2.0 * cp + self.v[COCURV]
    }

    pub fn interior_contains(&self, p: &[f64]) -> bool {
        self.power(p) < 0.0
    }

    /// Euclidean distance from `p` to the circle or plane itself.
    pub fn distance_to_point(&self, p: &[f64]) -> f64 {
        let b = self.v[CURV];
        if b == 0.0 {
            let mut np = 0.0;
            for (k, x) in p.iter().enumerate() {
                np += self.v[2 + k] * x;
            }
            (np - 0.5 * self.v[COCURV]).abs()
        } else {
            let mut d2 = 0.0;
            for (k, x) in p.iter().enumerate() {
                let c = self.v[2 + k] / b;
                d2 += (x - c) * (x - c);
            }
            (d2.sqrt() - 1.0 / b.abs()).abs()
        }
    }

    /// Euclidean center, for finite circles/spheres.
    pub fn center_vec(&self) -> Option<Vec<f64>> {
        let b = self.v[CURV];
        (b != 0.0).then(|| self.v[2..].iter().map(|c| c / b).collect())
    }

    /// The same geometric circle with the opposite orientation.
    pub fn reversed(&self) -> Self {
        let mut v = self.v;
        for x in v.iter_mut() {
            *x = -*x;
        }
        Self { v }
    }
}

impl Oriented<4> {
    pub fn center(&self) -> Option<(f64, f64)> {
        let b = self.v[CURV];
        (b != 0.0).then(|| (self.v[2] / b, self.v[3] / b))
    }
}

impl Oriented<5> {
    pub fn center(&self) -> Option<[f64; 3]> {
        let b = self.v[CURV];
        (b != 0.0).then(|| [self.v[2] / b, self.v[3] / b, self.v[4] / b])
    }
}

/// The inversive product of two normalized oriented circles or spheres.
///
/// Equals 1 for `u = v`, -1 for external tangency and 0 for orthogonality.
pub fn inversive_product<const D: usize>(u: &Oriented<D>, v: &Oriented<D>) -> Result<f64> {
    u.check_normalized(TOL.chain)?;
    v.check_normalized(TOL.chain)?;
    Ok(bilinear(&u.v, &v.v))
}

/// Circle or sphere with the given center and radius.
pub fn from_center_radius<const D: usize>(
    center: &[f64],
    r: f64,
    orientation: Orientation,
) -> Result<Oriented<D>> {
    if center.len() + 2 != D {
        return Err(Error::Domain(format!(
            "center has {} coordinates, expected {}",
            center.len(),
            D - 2
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let sigma = orientation.sign();
    let b = sigma / r;
    let mut v = [0.0; D];
    let mut c2 = 0.0;
    for (k, x) in center.iter().enumerate() {
        v[2 + k] = b * x;
        c2 += x * x;
    }
    v[CURV] = b;
    v[COCURV] = b * c2 - sigma * r;
    Ok(Oriented { v })
}

pub fn circle_from_center_radius(
    center: (f64, f64),
    r: f64,
    orientation: Orientation,
) -> Result<OrientedCircle> {
    from_center_radius(&[center.0, center.1], r, orientation)
}

pub fn sphere_from_center_radius(
    center: [f64; 3],
    r: f64,
    orientation: Orientation,
) -> Result<OrientedSphere> {
    from_center_radius(&center, r, orientation)
}

/// The plane `{x . n = offset}` (with `n` normalized), interior `{x . n > offset}`.
pub fn plane_from_normal_offset<const D: usize>(normal: &[f64], offset: f64) -> Result<Oriented<D>> {
    if normal.len() + 2 != D {
        return Err(Error::Domain(format!(
            "normal has {} coordinates, expected {}",
            normal.len(),
            D - 2
        )));
    }
    let len = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) || !len.is_finite() || !offset.is_finite() {
        return Err(Error::Domain("plane normal must be nonzero and finite".into()));
    }
    let mut v = [0.0; D];
    for (k, x) in normal.iter().enumerate() {
        v[2 + k] = x / len;
    }
    v[COCURV] = 2.0 * offset / len;
    Ok(Oriented { v })
}

pub fn line_from_normal_offset(normal: (f64, f64), offset: f64) -> Result<OrientedCircle> {
    plane_from_normal_offset(&[normal.0, normal.1], offset)
}

/// Tangency point of two tangent circles/spheres, `None` at infinity.
///
/// Uses `p = (c_u + c_v) / (b_u + b_v)` on curvature-center coordinates.
pub fn tangency_point<const D: usize>(u: &Oriented<D>, v: &Oriented<D>) -> Option<Vec<f64>> {
    let den = u.v[CURV] + v.v[CURV];
    let scale = 1.0 + u.v[CURV].abs() + v.v[CURV].abs();
    if den.abs() <= 1e-14 * scale {
        return None;
    }
    Some((2..D).map(|k| (u.v[k] + v.v[k]) / den).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_constructor_values() {
        let unit = circle_from_center_radius((0.0, 0.0), 1.0, Orientation::Positive).unwrap();
        assert_eq!(unit.v, [1.0, -1.0, 0.0, 0.0]);
        let up = circle_from_center_radius((0.0, 2.0), 1.0, Orientation::Positive).unwrap();
        assert_eq!(up.v, [1.0, 3.0, 0.0, 2.0]);
        let line = line_from_normal_offset((1.0, 0.0), 1.0).unwrap();
        assert_eq!(line.v, [0.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn tangency_products() {
        let a = circle_from_center_radius((-0.5, 0.0), 0.5, Orientation::Positive).unwrap();
        let b = circle_from_center_radius((0.5, 0.0), 0.5, Orientation::Positive).unwrap();
        assert!((inversive_product(&a, &b).unwrap() + 1.0).abs() < 1e-15);
        let unit = circle_from_center_radius((0.0, 0.0), 1.0, Orientation::Positive).unwrap();
        // x = 1 oriented with the half-plane x > 1 as interior
        let line = line_from_normal_offset((1.0, 0.0), 1.0).unwrap();
        assert!((inversive_product(&unit, &line).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(tangency_point(&unit, &line).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(circle_from_center_radius((0.0, 0.0), 0.0, Orientation::Positive).is_err());
        assert!(circle_from_center_radius((0.0, 0.0), -1.0, Orientation::Positive).is_err());
        let bad = Oriented::from_coords([1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            inversive_product(&bad, &bad),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn interior_and_distance() {
        let outer = circle_from_center_radius((0.0, 0.0), 1.0, Orientation::Negative).unwrap();
        assert!(outer.interior_contains(&[2.0, 0.0]));
        assert!(!outer.interior_contains(&[0.1, 0.0]));
        let line = line_from_normal_offset((0.0, 1.0), 0.0).unwrap();
        assert!((line.distance_to_point(&[3.0, -2.0]) - 2.0).abs() < 1e-15);
    }
}
