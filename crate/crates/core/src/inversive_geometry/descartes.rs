use std::fmt::Debug;

use num_bigint::BigInt;

use super::coords::{bilinear, tangency_point, Oriented, CURV};
use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// Scalar used for tuple coordinates: `f64`, or `i128` with checked arithmetic.
pub trait Coord: Copy + PartialEq + PartialOrd + Debug + Send + Sync + 'static {
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn add(self, o: Self) -> Option<Self>;
    fn sub(self, o: Self) -> Option<Self>;
    fn mul(self, o: Self) -> Option<Self>;
    fn to_f64(self) -> f64;
    /// The exact integer value, for exact scalars.
    fn exact(self) -> Option<i128>;
}

impl Coord for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn add(self, o: Self) -> Option<Self> {
        Some(self + o)
    }
    #[inline]
    fn sub(self, o: Self) -> Option<Self> {
        Some(self - o)
    }
    #[inline]
    fn mul(self, o: Self) -> Option<Self> {
        Some(self * o)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    fn exact(self) -> Option<i128> {
        None
    }
}

impl Coord for i128 {
    const EXACT: bool = true;
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    #[inline]
    fn add(self, o: Self) -> Option<Self> {
        self.checked_add(o)
    }
    #[inline]
    fn sub(self, o: Self) -> Option<Self> {
        self.checked_sub(o)
    }
    #[inline]
    fn mul(self, o: Self) -> Option<Self> {
        self.checked_mul(o)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn exact(self) -> Option<i128> {
        Some(self)
    }
}

/// Multiplier `2 / (n - 1)` of the reflection rule for `n = D - 2`.
pub const fn reflection_factor(d: usize) -> i64 {
    match d {
        4 => 2,
        5 => 1,
        _ => panic!("only circles (D = 4) and spheres (D = 5) are supported"),
    }
}

/// New coordinates for slot `i`: `k * (sum of the other slots) - slot i`.
#[inline]
pub fn reflect_coords<S: Coord, const D: usize>(members: &[[S; D]; D], i: usize) -> Option<[S; D]> {
    let mut out = [S::zero(); D];
    for (c, o) in out.iter_mut().enumerate() {
        let mut sum = S::zero();
        for (j, m) in members.iter().enumerate() {
            if j != i {
                sum = sum.add(m[c])?;
            }
        }
        if reflection_factor(D) == 2 {
            sum = sum.add(sum)?;
        }
        *o = sum.sub(members[i][c])?;
    }
    Some(out)
}

/// Twice the bilinear form: `2 c.c' - (b bhat' + bhat b')`.
pub fn twice_product<S: Coord, const D: usize>(u: &[S; D], v: &[S; D]) -> Option<S> {
    let mut s = u[0].mul(v[1])?.add(u[1].mul(v[0])?)?;
    s = S::zero().sub(s)?;
    for k in 2..D {
        let p = u[k].mul(v[k])?;
        s = s.add(p)?.add(p)?;
    }
    Some(s)
}

/// `n + 2` pairwise tangent oriented circles (D = 4) or spheres (D = 5).
///
/// Coordinates are stored multiplied by `scale`, so integral packings whose
/// inversive coordinates are rational can be held exactly in `i128`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescartesTuple<S: Coord, const D: usize> {
    pub members: [[S; D]; D],
    pub scale: S,
    pub incoming: Option<usize>,
}

pub type DescartesQuadruple<S = f64> = DescartesTuple<S, 4>;
pub type DescartesQuintuple<S = f64> = DescartesTuple<S, 5>;

impl<S: Coord, const D: usize> DescartesTuple<S, D> {
    /// Reflects slot `i` across the dual circle of the other slots.
    pub fn reflect(&self, i: usize) -> Result<Self> {
        if i >= D {
            return Err(Error::Domain(format!("slot {i} out of range")));
        }
        let v = reflect_coords(&self.members, i)
            .ok_or_else(|| Error::Overflow(format!("reflecting slot {i}")))?;
        let mut members = self.members;
        members[i] = v;
        Ok(Self {
            members,
            scale: self.scale,
            incoming: Some(i),
        })
    }

    /// Applies a word of slot reflections, left to right.
    pub fn reflect_word(&self, word: &[usize]) -> Result<Self> {
        word.iter().try_fold(self.clone(), |q, &i| q.reflect(i))
    }

    pub fn curvature(&self, i: usize) -> f64 {
        self.members[i][CURV].to_f64() / self.scale.to_f64()
    }

    pub fn member_f64(&self, i: usize) -> Oriented<D> {
        let s = self.scale.to_f64();
        let mut v = [0.0; D];
        for (o, x) in v.iter_mut().zip(self.members[i].iter()) {
            *o = x.to_f64() / s;
        }
        Oriented { v }
    }

    pub fn to_float(&self) -> DescartesTuple<f64, D> {
        let mut members = [[0.0; D]; D];
        for (i, m) in members.iter_mut().enumerate() {
            *m = self.member_f64(i).v;
        }
        DescartesTuple {
            members,
            scale: 1.0,
            incoming: self.incoming,
        }
    }

    /// Checks `(sum b)^2 = n sum b^2`; exact (with big-integer promotion) for `i128`.
    pub fn descartes_identity_holds(&self) -> bool {
        let n = (D - 2) as i64;
        if S::EXACT {
            let b: Vec<BigInt> = self
                .members
                .iter()
                .map(|m| BigInt::from(m[CURV].exact().unwrap_or_default()))
                .collect();
            let sum: BigInt = b.iter().sum();
            let sq: BigInt = b.iter().map(|x| x * x).sum();
            &sum * &sum == sq * n
        } else {
            let b: Vec<f64> = (0..D).map(|i| self.curvature(i)).collect();
            let sum: f64 = b.iter().sum();
            let sq: f64 = b.iter().map(|x| x * x).sum();
            let scale = 1.0 + sq;
            (sum * sum - n as f64 * sq).abs() <= 1e-9 * scale
        }
    }

    /// Checks normalization, pairwise tangency and distinct tangency points.
    pub fn validate(&self) -> Result<()> {
        if S::EXACT {
            let s2 = self
                .scale
                .mul(self.scale)
                .and_then(|x| x.add(x))
                .ok_or_else(|| Error::Overflow("scale squared".into()))?;
            let minus = S::zero().sub(s2).unwrap();
            for i in 0..D {
                let qq = twice_product(&self.members[i], &self.members[i])
                    .ok_or_else(|| Error::Overflow("normalization check".into()))?;
                if qq != s2 {
                    return Err(Error::NotNormalized {
                        deviation: (qq.to_f64() - s2.to_f64()).abs() / s2.to_f64(),
                    });
                }
                for j in i + 1..D {
                    let p = twice_product(&self.members[i], &self.members[j])
                        .ok_or_else(|| Error::Overflow("tangency check".into()))?;
                    if p != minus {
                        return Err(Error::Invariant(format!(
                            "members {i} and {j} are not externally tangent"
                        )));
                    }
                }
            }
        } else {
            let f = self.to_float();
            for i in 0..D {
                f.member_f64(i).check_normalized(TOL.chain)?;
                for j in i + 1..D {
                    let p = bilinear(&f.members[i], &f.members[j]);
                    if (p + 1.0).abs() > TOL.tangency {
                        return Err(Error::Invariant(format!(
                            "members {i} and {j} have product {p}, not -1"
                        )));
                    }
                }
            }
        }
        self.check_distinct_tangencies()
    }

    fn check_distinct_tangencies(&self) -> Result<()> {
        let f: Vec<Oriented<D>> = (0..D).map(|i| self.member_f64(i)).collect();
        let mut points: Vec<Option<Vec<f64>>> = Vec::new();
        for i in 0..D {
            for j in i + 1..D {
                points.push(tangency_point(&f[i], &f[j]));
            }
        }
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                let same = match (&points[a], &points[b]) {
                    (None, None) => true,
                    (Some(p), Some(q)) => {
                        let d2: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
                        d2.sqrt() <= TOL.coincidence * (1.0 + p.iter().map(|x| x.abs()).sum::<f64>())
                    }
                    _ => false,
                };
                if same {
                    return Err(Error::Degenerate("two tangency points coincide".into()));
                }
            }
        }
        Ok(())
    }

    /// Dual circle for slot `i`: orthogonal to the other members and passing
    /// through their tangency points; its interior contains the gap where
    /// slot `i`'s twin lies.
    pub fn dual_circle(&self, i: usize) -> Result<Oriented<D>> {
        let f = self.to_float();
        dual_of(&f.members, i)
    }

    pub fn dual_circles(&self) -> Result<Vec<Oriented<D>>> {
        self.check_distinct_tangencies()?;
        (0..D).map(|i| self.dual_circle(i)).collect()
    }
}

/// Dual of slot `i` for float coordinates: `w / sqrt<w,w>` with
/// `w = sum_{j != i} v_j - (n - 1) v_i`.
pub fn dual_of<const D: usize>(members: &[[f64; D]; D], i: usize) -> Result<Oriented<D>> {
    let n1 = (D - 3) as f64;
    let mut w = [0.0; D];
    for (c, o) in w.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, m) in members.iter().enumerate() {
            if j != i {
                s += m[c];
            }
        }
        *o = s - n1 * members[i][c];
    }
    let norm2 = bilinear(&w, &w);
    if !(norm2 > 0.0) {
        return Err(Error::Degenerate(format!("dual of slot {i} is not spacelike")));
    }
    let inv = 1.0 / norm2.sqrt();
    for x in w.iter_mut() {
        *x *= inv;
    }
    Ok(Oriented { v: w })
}

impl<const D: usize> DescartesTuple<f64, D> {
    pub fn from_members(members: [Oriented<D>; D]) -> Result<Self> {
        let t = Self {
            members: members.map(|m| m.v),
            scale: 1.0,
            incoming: None,
        };
        t.validate()?;
        Ok(t)
    }
}

impl<const D: usize> DescartesTuple<i128, D> {
    /// Exact form of a float tuple whose coordinates are rational with a
    /// common denominator at most `max_denominator`.
    pub fn exact_from_float(t: &DescartesTuple<f64, D>, max_denominator: i64) -> Result<Self> {
        let f = t.to_float();
        'scale: for d in 1..=max_denominator {
            let mut members = [[0i128; D]; D];
            for (i, m) in f.members.iter().enumerate() {
                for (c, x) in m.iter().enumerate() {
                    let y = x * d as f64;
                    let r = y.round();
                    if (y - r).abs() > 1e-9 * (1.0 + y.abs()) || r.abs() > 1e30 {
                        continue 'scale;
                    }
                    members[i][c] = r as i128;
                }
            }
            let e = Self {
                members,
                scale: d as i128,
                incoming: t.incoming,
            };
            e.validate()?;
            return Ok(e);
        }
        Err(Error::Domain(format!(
            "root coordinates are not rational with denominator <= {max_denominator}"
        )))
    }

    /// Exact tuple from raw integer coordinates and a common scale.
    pub fn from_scaled(members: [[i128; D]; D], scale: i128) -> Result<Self> {
        if scale <= 0 {
            return Err(Error::Domain("scale must be positive".into()));
        }
        let t = Self {
            members,
            scale,
            incoming: None,
        };
        t.validate()?;
        Ok(t)
    }
}

/// The standard bounded root `(-1, 2, 2, 3)`: the unit circle enclosing two
/// circles of radius 1/2 centered at `(+-1/2, 0)` and a circle of radius 1/3
/// centered at `(0, 2/3)`.
pub fn standard_bounded_root() -> DescartesQuadruple<i128> {
    DescartesTuple {
        members: [[-1, 1, 0, 0], [2, 0, 1, 0], [2, 0, -1, 0], [3, 1, 0, 2]],
        scale: 1,
        incoming: None,
    }
}

/// The strip packing root: lines `x = 1`, `x = -1`, the unit circle and the
/// unit circle centered at `-2i`.
pub fn strip_root() -> DescartesQuadruple<i128> {
    DescartesTuple {
        members: [[0, 2, 1, 0], [0, 2, -1, 0], [1, -1, 0, 0], [1, 3, 0, -2]],
        scale: 1,
        incoming: None,
    }
}

/// Float placement of a root with given curvatures `b1 <= 0 < b2, b3, b4`
/// or all positive: circle 1 at the origin, circle 2 on the positive x axis,
/// circle 3 above the axis, circle 4 solved by the complex Descartes relation.
pub fn place_curvatures(b: [f64; 4]) -> Result<DescartesQuadruple<f64>> {
    if b.iter().any(|x| *x == 0.0) {
        return Err(Error::Domain("curvature placement does not handle lines".into()));
    }
    let sum: f64 = b.iter().sum();
    let sq: f64 = b.iter().map(|x| x * x).sum();
    if (sum * sum - 2.0 * sq).abs() > 1e-9 * (1.0 + sq) {
        return Err(Error::Invariant("curvatures violate the Descartes identity".into()));
    }
    if b.iter().filter(|x| **x < 0.0).count() > 1 {
        return Err(Error::Domain("at most one enclosing circle".into()));
    }
    let r: Vec<f64> = b.iter().map(|x| 1.0 / x).collect();
    // signed distance between centers of tangent circles is r_i + r_j
    let d12 = r[0] + r[1];
    let c1 = (0.0, 0.0);
    let c2 = (d12.abs(), 0.0);
    let d13 = (r[0] + r[2]).abs();
    let d23 = (r[1] + r[2]).abs();
    let x3 = (d13 * d13 - d23 * d23 + c2.0 * c2.0) / (2.0 * c2.0);
    let h2 = d13 * d13 - x3 * x3;
    // collinear centers: snap instead of amplifying rounding through sqrt
    let y3 = if h2 <= 1e-12 * d13 * d13 { 0.0 } else { h2.sqrt() };
    let c3 = (x3, y3);
    // complex Descartes on curvature-centers w = b z
    let w = |k: usize, c: (f64, f64)| (b[k] * c.0, b[k] * c.1);
    let (w1, w2, w3) = (w(0, c1), w(1, c2), w(2, c3));
    let cm = |a: (f64, f64), bb: (f64, f64)| (a.0 * bb.0 - a.1 * bb.1, a.0 * bb.1 + a.1 * bb.0);
    let s = (w1.0 + w2.0 + w3.0, w1.1 + w2.1 + w3.1);
    let p12 = cm(w1, w2);
    let p23 = cm(w2, w3);
    let p31 = cm(w3, w1);
    let pr = (p12.0 + p23.0 + p31.0, p12.1 + p23.1 + p31.1);
    let m = (pr.0 * pr.0 + pr.1 * pr.1).sqrt().sqrt();
    let ang = pr.1.atan2(pr.0) / 2.0;
    let root = (m * ang.cos(), m * ang.sin());
    let mut best: Option<(f64, DescartesQuadruple<f64>)> = None;
    for sign in [1.0, -1.0] {
        let w4 = (s.0 + sign * 2.0 * root.0, s.1 + sign * 2.0 * root.1);
        let c4 = (w4.0 / b[3], w4.1 / b[3]);
        let cs = [c1, c2, c3, c4];
        let mut members = [[0.0; 4]; 4];
        for k in 0..4 {
            let o = if b[k] < 0.0 {
                super::coords::Orientation::Negative
            } else {
                super::coords::Orientation::Positive
            };
            members[k] = super::coords::circle_from_center_radius(cs[k], r[k].abs(), o)?.v;
        }
        let mut err = 0.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                err = err.max((bilinear(&members[i], &members[j]) + 1.0).abs());
            }
        }
        let t = DescartesTuple {
            members,
            scale: 1.0,
            incoming: None,
        };
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, t));
        }
    }
    let (_, t) = best.unwrap();
    t.validate()?;
    Ok(t)
}
