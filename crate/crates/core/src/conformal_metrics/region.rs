use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::inversive_geometry::{OrientedCircle, OrientedSphere, CURV};

/// A test set `E` in the plane. Every variant is treated as closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: (f64, f64), r: f64 },
    /// `{|x| <= 1, n <= y <= n + 1}`.
    Band { n: u32 },
    /// `{|x| <= 1, y >= eta}`.
    HalfStrip { eta: f64 },
    /// `{|x| <= 1, |z| >= 1, 0 < y <= cap}`; unbounded without a cap.
    Triangle { cap: Option<f64> },
    /// The whole space; meets every element of a packing.
    All,
}

fn clamp_dist(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.0 - a.0 - s * dx).hypot(p.1 - a.1 - s * dy)
}

/// Distance from `p` to the upper half of the unit circle.
fn dist_to_upper_arc(p: (f64, f64)) -> f64 {
    let rho = p.0.hypot(p.1);
    if p.1 >= 0.0 && rho > 0.0 {
        (rho - 1.0).abs()
    } else if rho == 0.0 {
        1.0
    } else {
        (p.0 - 1.0).hypot(p.1).min((p.0 + 1.0).hypot(p.1))
    }
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Rectangle { x0, x1, y0, y1 } => {
                [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 <= x1 && y0 <= y1
            }
            Region::Disk { center, r } => center.0.is_finite() && center.1.is_finite() && r.is_finite() && r >= 0.0,
            Region::Band { n } => n >= 1,
            Region::HalfStrip { eta } => eta.is_finite() && eta > 0.0,
            Region::Triangle { cap } => cap.map_or(true, |c| c.is_finite() && c >= 1.0),
            Region::All => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid region {self}")))
        }
    }

    /// Closed rectangle `[x0, x1] x [y0, y1]` containing the region.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let inf = f64::INFINITY;
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Region::Disk { center, r } => (center.0 - r, center.0 + r, center.1 - r, center.1 + r),
            Region::Band { n } => (-1.0, 1.0, n as f64, n as f64 + 1.0),
            Region::HalfStrip { eta } => (-1.0, 1.0, eta, inf),
            Region::Triangle { cap } => (-1.0, 1.0, 0.0, cap.unwrap_or(inf)),
            Region::All => (-inf, inf, -inf, inf),
        }
    }

    pub fn y_range(&self) -> (f64, f64) {
        let (_, _, y0, y1) = self.bounding_box();
        (y0, y1)
    }

    pub fn is_bounded(&self) -> bool {
        let (x0, x1, y0, y1) = self.bounding_box();
        [x0, x1, y0, y1].iter().all(|v| v.is_finite())
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        match *self {
            Region::Disk { center, r } => (p.0 - center.0).hypot(p.1 - center.1) <= r,
            Region::Triangle { .. } => {
                let (x0, x1, _, y1) = self.bounding_box();
                p.0 >= x0 && p.0 <= x1 && p.1 > 0.0 && p.1 <= y1 && p.0 * p.0 + p.1 * p.1 >= 1.0
            }
            Region::All => true,
            _ => {
                let (x0, x1, y0, y1) = self.bounding_box();
                p.0 >= x0 && p.0 <= x1 && p.1 >= y0 && p.1 <= y1
            }
        }
    }

    /// Euclidean distance from `p` to the region.
    pub fn min_dist(&self, p: (f64, f64)) -> f64 {
        match *self {
            Region::Disk { center, r } => ((p.0 - center.0).hypot(p.1 - center.1) - r).max(0.0),
            Region::All => 0.0,
            Region::Triangle { cap } => {
                if self.contains(p) {
                    return 0.0;
                }
                let top = cap.unwrap_or(p.1.max(1.0) + 1.0);
                let mut d = dist_to_upper_arc(p)
                    .min(dist_to_segment(p, (-1.0, 0.0), (-1.0, top)))
                    .min(dist_to_segment(p, (1.0, 0.0), (1.0, top)));
                if cap.is_some() {
                    d = d.min(dist_to_segment(p, (-1.0, top), (1.0, top)));
                }
                d
            }
            _ => {
                let (x0, x1, y0, y1) = self.bounding_box();
                clamp_dist(p.0, x0, x1).hypot(clamp_dist(p.1, y0, y1))
            }
        }
    }

    /// Largest distance from `p` to a point of the region (`inf` if unbounded).
    pub fn max_dist(&self, p: (f64, f64)) -> f64 {
        match *self {
            Region::Disk { center, r } => (p.0 - center.0).hypot(p.1 - center.1) + r,
            _ => {
                // attained at a corner of the bounding box, which lies in the region
                let (x0, x1, y0, y1) = self.bounding_box();
                if !self.is_bounded() {
                    return f64::INFINITY;
                }
                let dx = (p.0 - x0).abs().max((p.0 - x1).abs());
                let dy = (p.1 - y0).abs().max((p.1 - y1).abs());
                dx.hypot(dy)
            }
        }
    }

    /// Range of the linear function `n . p` over the region.
    fn linear_range(&self, n: (f64, f64)) -> (f64, f64) {
        match *self {
            Region::Disk { center, r } => {
                let m = n.0 * center.0 + n.1 * center.1;
                let s = r * n.0.hypot(n.1);
                (m - s, m + s)
            }
            _ => {
                // the convex hull of every other variant is its bounding box
                let (x0, x1, y0, y1) = self.bounding_box();
                let span = |a: f64, lo: f64, hi: f64| {
                    if a == 0.0 {
                        (0.0, 0.0)
                    } else {
                        let (u, v) = (a * lo, a * hi);
                        (u.min(v), u.max(v))
                    }
                };
                let (ax, bx) = span(n.0, x0, x1);
                let (ay, by) = span(n.1, y0, y1);
                (ax + ay, bx + by)
            }
        }
    }

    /// Whether the closed disk `|p - c| <= r` meets the region.
    pub fn meets_disk(&self, c: (f64, f64), r: f64) -> bool {
        self.min_dist(c) <= r
    }

    /// Whether the closed half-plane `n . p >= h` meets the region.
    pub fn meets_half_plane(&self, n: (f64, f64), h: f64) -> bool {
        self.linear_range(n).1 >= h
    }

    /// True iff the circle, as a curve, meets the region.
    ///
    /// For a connected region the distances from the center fill the interval
    /// `[min_dist, max_dist]`, so the curve meets it iff `r` lies inside.
    pub fn intersects(&self, s: &OrientedCircle) -> bool {
        if matches!(self, Region::All) {
            return true;
        }
        if s.v[CURV] == 0.0 {
            let n = (s.v[2], s.v[3]);
            let h = s.v[1] / 2.0;
            let (lo, hi) = self.linear_range(n);
            return lo <= h && h <= hi;
        }
        let b = s.v[CURV];
        let r = 1.0 / b.abs();
        let c = (s.v[2] / b, s.v[3] / b);
        self.min_dist(c) <= r && r <= self.max_dist(c)
    }

    /// Sphere packings are counted against the whole space only.
    pub fn intersects_sphere(&self, _s: &OrientedSphere) -> Result<bool> {
        match self {
            Region::All => Ok(true),
            other => Err(Error::Domain(format!("region {other} is planar; spheres need region `all`"))),
        }
    }

    /// Whether the closed disk bounded by `s` lies in the region.
    pub fn contains_circle(&self, s: &OrientedCircle) -> bool {
        let b = s.v[CURV];
        if b <= 0.0 {
            return matches!(self, Region::All);
        }
        let r = 1.0 / b;
        let c = (s.v[2] / b, s.v[3] / b);
        match *self {
            Region::All => true,
            Region::Disk { center, r: rr } => (c.0 - center.0).hypot(c.1 - center.1) + r <= rr,
            Region::Triangle { .. } => {
                let (x0, x1, _, y1) = self.bounding_box();
                c.0 - r >= x0 && c.0 + r <= x1 && c.1 - r > 0.0 && c.1 + r <= y1 && c.0.hypot(c.1) >= 1.0 + r
            }
            _ => {
                let (x0, x1, y0, y1) = self.bounding_box();
                c.0 - r >= x0 && c.0 + r <= x1 && c.1 - r >= y0 && c.1 + r <= y1
            }
        }
    }

    /// The region moved by `(dx, dy)`, when that is another region.
    pub fn translated(&self, dx: f64, dy: f64) -> Option<Region> {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => Some(Region::Rectangle {
                x0: x0 + dx,
                x1: x1 + dx,
                y0: y0 + dy,
                y1: y1 + dy,
            }),
            Region::Disk { center, r } => Some(Region::Disk {
                center: (center.0 + dx, center.1 + dy),
                r,
            }),
            Region::All => Some(Region::All),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Rectangle { x0, x1, y0, y1 } => write!(f, "rect:{x0:?},{x1:?},{y0:?},{y1:?}"),
            Region::Disk { center, r } => write!(f, "disk:{:?},{:?},{r:?}", center.0, center.1),
            Region::Band { n } => write!(f, "band:{n}"),
            Region::HalfStrip { eta } => write!(f, "half_strip:{eta:?}"),
            Region::Triangle { cap: None } => write!(f, "triangle"),
            Region::Triangle { cap: Some(c) } => write!(f, "triangle:{c:?}"),
            Region::All => write!(f, "all"),
        }
    }
}

fn numbers(s: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == want => Ok(v),
        _ => Err(Error::Config(format!("{what} expects {want} comma-separated numbers, got `{s}`"))),
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let region = match head {
            "rect" | "rectangle" => {
                let v = numbers(tail, 4, "rect")?;
                Region::Rectangle {
                    x0: v[0],
                    x1: v[1],
                    y0: v[2],
                    y1: v[3],
                }
            }
            "disk" => {
                let v = numbers(tail, 3, "disk")?;
                Region::Disk {
                    center: (v[0], v[1]),
                    r: v[2],
                }
            }
            "band" => Region::Band {
                n: tail
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("band expects a positive integer, got `{tail}`")))?,
            },
            "half_strip" => Region::HalfStrip {
                eta: numbers(tail, 1, "half_strip")?[0],
            },
            "triangle" if tail.is_empty() => Region::Triangle { cap: None },
            "triangle" => Region::Triangle {
                cap: Some(numbers(tail, 1, "triangle")?[0]),
            },
            "all" if tail.is_empty() => Region::All,
            _ => return Err(Error::Config(format!("unknown region `{s}`"))),
        };
        region.validate()?;
        Ok(region)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversive_geometry::{circle_from_center_radius, line_from_normal_offset, Orientation};

    fn circ(x: f64, y: f64, r: f64) -> OrientedCircle {
        circle_from_center_radius((x, y), r, Orientation::Positive).unwrap()
    }

    #[test]
    fn rectangle_examples() {
        let e = Region::Rectangle {
            x0: -1.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        };
        assert!(e.intersects(&circ(0.0, 2.0, 1.0)));
        assert!(!e.intersects(&circ(0.0, 10.0, 1.0)));
        assert!(!e.intersects(&circ(0.0, 0.5, 5.0)));
        assert!(e.intersects(&circ(0.0, 0.5, 0.6)));
    }

    #[test]
    fn lines_against_regions() {
        let e = Region::Band { n: 3 };
        let vertical = line_from_normal_offset((1.0, 0.0), 1.0).unwrap();
        assert!(e.intersects(&vertical));
        let far = line_from_normal_offset((1.0, 0.0), 1.5).unwrap();
        assert!(!e.intersects(&far));
        let horizontal = line_from_normal_offset((0.0, 1.0), 3.5).unwrap();
        assert!(e.intersects(&horizontal));
        assert!(Region::HalfStrip { eta: 1.0 }.intersects(&vertical));
    }

    #[test]
    fn triangle_geometry() {
        let t = Region::Triangle { cap: None };
        assert!(t.contains((0.0, 1.5)));
        assert!(!t.contains((0.0, 0.5)));
        assert!(t.intersects(&circ(0.0, 2.0, 1.0)));
        assert!(t.contains_circle(&circ(0.0, 2.0, 1.0)));
        assert!(!t.contains_circle(&circ(0.0, 1.5, 0.6)));
        assert!((t.min_dist((0.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((t.min_dist((0.0, -1.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.max_dist((0.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn band_is_symmetric_in_x() {
        let e = Region::Band { n: 2 };
        for &(x, y, r) in &[(0.3, 1.7, 0.4), (1.2, 2.5, 0.25), (0.9, 3.2, 0.1)] {
            assert_eq!(e.intersects(&circ(x, y, r)), e.intersects(&circ(-x, y, r)));
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["rect:-1.0,1.0,0.0,1.0", "disk:0.0,0.0,1.0", "band:4", "half_strip:2.0", "triangle", "triangle:40.0", "all"] {
            let r: Region = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert!("band:0".parse::<Region>().is_err());
        assert!("hexagon".parse::<Region>().is_err());
    }
}
