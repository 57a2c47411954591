use crate::error::{Error, Result};
use crate::inversive_geometry::{MobiusMap, COCURV, CURV};

/// A point of upper half-space: boundary coordinates and height.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpacePoint {
    pub coords: Vec<f64>,
    pub height: f64,
}

impl HalfSpacePoint {
    pub fn new(coords: Vec<f64>, height: f64) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("not a point of upper half-space: {coords:?}, height {height}")));
        }
        Ok(Self { coords, height })
    }

    /// The base point `j` at height 1 above the origin.
    pub fn base(boundary_dim: usize) -> Self {
        Self {
            coords: vec![0.0; boundary_dim],
            height: 1.0,
        }
    }

    /// Unit timelike vector `[1/h, (|x|^2 + h^2)/h, x/h]`, on which Möbius
    /// maps act by their Poincaré extension.
    pub fn to_vector<const D: usize>(&self) -> Result<[f64; D]> {
        if self.coords.len() + 2 != D {
            return Err(Error::Domain(format!(
                "point has {} boundary coordinates, expected {}",
                self.coords.len(),
                D - 2
            )));
        }
        let h = self.height;
        let x2: f64 = self.coords.iter().map(|x| x * x).sum();
        let mut v = [0.0; D];
        v[CURV] = 1.0 / h;
        v[COCURV] = (x2 + h * h) / h;
        for (k, x) in self.coords.iter().enumerate() {
            v[2 + k] = x / h;
        }
        Ok(v)
    }

    pub fn from_vector<const D: usize>(v: &[f64; D]) -> Self {
        let h = 1.0 / v[CURV];
        Self {
            coords: v[2..].iter().map(|c| c * h).collect(),
            height: h,
        }
    }
}

/// Hyperbolic distance `2 asinh(|p - q| / (2 sqrt(h_p h_q)))`.
pub fn hyperbolic_distance(p: &HalfSpacePoint, q: &HalfSpacePoint) -> f64 {
    let mut d2 = (p.height - q.height).powi(2);
    for (a, b) in p.coords.iter().zip(&q.coords) {
        d2 += (a - b) * (a - b);
    }
    2.0 * (d2.sqrt() / (2.0 * (p.height * q.height).sqrt())).asinh()
}

/// Distance between the points of two timelike vectors (of any scale).
#[inline]
pub(crate) fn vector_distance<const D: usize>(u: &[f64; D], v: &[f64; D]) -> f64 {
    // through the points rather than -<u, v>, so nearby points keep their digits
    let (hu, hv) = (1.0 / u[CURV], 1.0 / v[CURV]);
    let mut d2 = (hu - hv).powi(2);
    for k in 2..D {
        let t = u[k] * hu - v[k] * hv;
        d2 += t * t;
    }
    2.0 * (d2.sqrt() / (2.0 * (hu * hv).sqrt())).asinh()
}

/// `d(j, g j)`.
pub fn displacement<const D: usize>(g: &MobiusMap<D>) -> f64 {
    let j = base_vector::<D>();
    vector_distance(&j, &g.apply_raw(&j))
}

#[inline]
pub(crate) fn base_vector<const D: usize>() -> [f64; D] {
    let mut v = [0.0; D];
    v[CURV] = 1.0;
    v[COCURV] = 1.0;
    v
}

/// Image of `p` under `g`.
pub fn apply_to_point<const D: usize>(g: &MobiusMap<D>, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
    Ok(HalfSpacePoint::from_vector(&g.apply_raw(&p.to_vector::<D>()?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_metrics::quadrature::integrate;
    use crate::inversive_geometry::{circle_from_center_radius, line_from_normal_offset, Orientation};

    /// Length of the geodesic from `p` to `q` (same vertical plane) by
    /// quadrature of `ds / h` along the semicircle joining them.
    fn path_length(p: (f64, f64), q: (f64, f64)) -> f64 {
        // (u, h) coordinates in the vertical plane
        let c = ((q.0 * q.0 + q.1 * q.1) - (p.0 * p.0 + p.1 * p.1)) / (2.0 * (q.0 - p.0));
        let r = (p.0 - c).hypot(p.1);
        let a = ((p.0 - c) / r).acos();
        let b = ((q.0 - c) / r).acos();
        integrate(|th| r / (r * th.sin()), a.min(b), a.max(b), 1e-13, 0.0, 10_000).unwrap().value
    }

    #[test]
    fn translation_matches_the_path_integral() {
        let g = MobiusMap::<4>::translation(&[0.0, 2.0]).unwrap();
        let d = displacement(&g);
        assert!((d - 3f64.acosh()).abs() < 1e-12);
        assert!((d - path_length((0.0, 1.0), (2.0, 1.0))).abs() < 1e-10);
        let img = apply_to_point(&g, &HalfSpacePoint::base(2)).unwrap();
        assert!((img.coords[1] - 2.0).abs() < 1e-14 && (img.height - 1.0).abs() < 1e-14);
    }

    #[test]
    fn composite_matches_the_path_integral() {
        let c = circle_from_center_radius((0.3, 0.0), 0.7, Orientation::Positive).unwrap();
        let g = MobiusMap::inversion(&c).compose(&MobiusMap::translation(&[1.1, 0.0]).unwrap());
        let img = apply_to_point(&g, &HalfSpacePoint::base(2)).unwrap();
        assert!(img.coords[1].abs() < 1e-14);
        let d = displacement(&g);
        assert!((d - path_length((0.0, 1.0), (img.coords[0], img.height))).abs() < 1e-10);
        assert!((d - displacement(&g.inverse())).abs() < 1e-10);
    }

    #[test]
    fn inversions_fix_j_only_through_it() {
        let through = circle_from_center_radius((1.0, 0.0), 2f64.sqrt(), Orientation::Positive).unwrap();
        assert!(displacement(&MobiusMap::inversion(&through)) < 1e-14);
        let line = line_from_normal_offset((0.0, 1.0), 0.0).unwrap();
        assert!(displacement(&MobiusMap::inversion(&line)) < 1e-14);
        let off = circle_from_center_radius((1.0, 0.0), 1.2, Orientation::Positive).unwrap();
        assert!(displacement(&MobiusMap::inversion(&off)) > 0.1);
        assert_eq!(displacement(&MobiusMap::<4>::identity()), 0.0);
    }

    #[test]
    fn vector_round_trip() {
        let p = HalfSpacePoint::new(vec![0.4, -1.3], 0.25).unwrap();
        let v = p.to_vector::<4>().unwrap();
        assert!((crate::inversive_geometry::bilinear(&v, &v) + 1.0).abs() < 1e-13);
        let q = HalfSpacePoint::from_vector(&v);
        assert!((q.height - 0.25).abs() < 1e-15 && (q.coords[1] + 1.3).abs() < 1e-14);
        assert!(HalfSpacePoint::new(vec![0.0, 0.0], 0.0).is_err());
    }
}
