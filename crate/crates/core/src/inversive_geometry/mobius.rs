use super::coords::{bilinear, Oriented, COCURV, CURV};
use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// A Möbius or anti-Möbius map acting linearly on inversive coordinates.
///
/// The matrix preserves the form `Q`; `anticonformal` records whether the
/// map reverses orientation of the boundary sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap<const D: usize> {
    pub m: [[f64; D]; D],
    pub anticonformal: bool,
}

/// Gram matrix `J` of the bilinear form.
fn gram<const D: usize>() -> [[f64; D]; D] {
    let mut j = [[0.0; D]; D];
    j[CURV][COCURV] = -0.5;
    j[COCURV][CURV] = -0.5;
    for (k, row) in j.iter_mut().enumerate().skip(2) {
        row[k] = 1.0;
    }
    j
}

fn matmul<const D: usize>(a: &[[f64; D]; D], b: &[[f64; D]; D]) -> [[f64; D]; D] {
    let mut c = [[0.0; D]; D];
    for i in 0..D {
        for k in 0..D {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..D {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

impl<const D: usize> MobiusMap<D> {
    pub fn identity() -> Self {
        let mut m = [[0.0; D]; D];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            m,
            anticonformal: false,
        }
    }

    /// Inversion in a circle (reflection in a line or plane when `b = 0`):
    /// `u -> u - 2 <u, c> c`.
    pub fn inversion(c: &Oriented<D>) -> Self {
        let mut jc = [0.0; D];
        jc[CURV] = -0.5 * c.v[COCURV];
        jc[COCURV] = -0.5 * c.v[CURV];
        jc[2..D].copy_from_slice(&c.v[2..D]);
        let mut m = Self::identity().m;
        for a in 0..D {
            for b in 0..D {
                m[a][b] -= 2.0 * c.v[a] * jc[b];
            }
        }
        Self {
            m,
            anticonformal: true,
        }
    }

    /// Translation `x -> x + a`.
    pub fn translation(a: &[f64]) -> Result<Self> {
        if a.len() + 2 != D {
            return Err(Error::Domain(format!(
                "translation vector has {} components, expected {}",
                a.len(),
                D - 2
            )));
        }
        let mut m = Self::identity().m;
        let a2: f64 = a.iter().map(|x| x * x).sum();
        m[COCURV][CURV] = a2;
        for (k, ak) in a.iter().enumerate() {
            m[2 + k][CURV] = *ak;
            m[COCURV][2 + k] = 2.0 * ak;
        }
        Ok(Self {
            m,
            anticonformal: false,
        })
    }

    /// Dilation `x -> lambda x` about the origin.
    pub fn scaling(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("scale factor must be positive, got {lambda}")));
        }
        let mut m = Self::identity().m;
        m[CURV][CURV] = 1.0 / lambda;
        m[COCURV][COCURV] = lambda;
        Ok(Self {
            m,
            anticonformal: false,
        })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: matmul(&self.m, &other.m),
            anticonformal: self.anticonformal ^ other.anticonformal,
        }
    }

    /// Inverse via `J^-1 M^T J`.
    pub fn inverse(&self) -> Self {
        let j = gram::<D>();
        let mut jinv = [[0.0; D]; D];
        jinv[CURV][COCURV] = -2.0;
        jinv[COCURV][CURV] = -2.0;
        for (k, row) in jinv.iter_mut().enumerate().skip(2) {
            row[k] = 1.0;
        }
        let mut mt = [[0.0; D]; D];
        for a in 0..D {
            for b in 0..D {
                mt[a][b] = self.m[b][a];
            }
        }
        Self {
            m: matmul(&matmul(&jinv, &mt), &j),
            anticonformal: self.anticonformal,
        }
    }

    #[inline]
    pub fn apply_raw(&self, v: &[f64; D]) -> [f64; D] {
        let mut out = [0.0; D];
        for (o, row) in out.iter_mut().zip(self.m.iter()) {
            let mut s = 0.0;
            for (a, x) in row.iter().zip(v.iter()) {
                s += a * x;
            }
            *o = s;
        }
        out
    }

    pub fn apply(&self, v: &Oriented<D>) -> Oriented<D> {
        Oriented {
            v: self.apply_raw(&v.v),
        }
    }

    /// Largest entry of `|M^T J M - J|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let j = gram::<D>();
        let mut worst = 0.0f64;
        for a in 0..D {
            for b in 0..D {
                let mut ea = [0.0; D];
                let mut eb = [0.0; D];
                for r in 0..D {
                    ea[r] = self.m[r][a];
                    eb[r] = self.m[r][b];
                }
                worst = worst.max((bilinear(&ea, &eb) - j[a][b]).abs());
            }
        }
        worst
    }

    pub fn is_q_orthogonal(&self, tol: f64) -> bool {
        self.orthogonality_defect() <= tol
    }

    /// Largest entry of `|M - I|`.
    pub fn distance_from_identity(&self) -> f64 {
        let id = Self::identity();
        let mut worst = 0.0f64;
        for a in 0..D {
            for b in 0..D {
                worst = worst.max((self.m[a][b] - id.m[a][b]).abs());
            }
        }
        worst
    }

    /// `M M = I` up to rounding relative to the square of the largest entry.
    pub fn is_involution(&self) -> bool {
        let big = self.m.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        self.compose(self).distance_from_identity() <= TOL.involution * big * big
    }
}

pub type CircleMap = MobiusMap<4>;
pub type SphereMap = MobiusMap<5>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversive_geometry::coords::{circle_from_center_radius, Orientation};

    #[test]
    fn translation_by_two_i() {
        let g = CircleMap::translation(&[0.0, 2.0]).unwrap();
        let unit = circle_from_center_radius((0.0, 0.0), 1.0, Orientation::Positive).unwrap();
        let img = g.apply(&unit);
        assert_eq!(img.center(), Some((0.0, 2.0)));
        assert_eq!(img.radius(), Some(1.0));
        assert!(g.is_q_orthogonal(1e-15));
    }

    #[test]
    fn unit_inversion_swaps_curvatures() {
        let unit = circle_from_center_radius((0.0, 0.0), 1.0, Orientation::Positive).unwrap();
        let inv = CircleMap::inversion(&unit);
        let c = circle_from_center_radius((0.3, -0.2), 0.1, Orientation::Positive).unwrap();
        let img = inv.apply(&c);
        for (a, b) in img.v.iter().zip([c.v[1], c.v[0], c.v[2], c.v[3]]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(inv.is_involution());
        assert!(inv.anticonformal);
    }

    #[test]
    fn inverse_undoes() {
        let a = CircleMap::translation(&[0.3, -1.1])
            .unwrap()
            .compose(&CircleMap::scaling(2.5).unwrap());
        let p = a.compose(&a.inverse());
        assert!(p.distance_from_identity() < 1e-12);
    }
}
