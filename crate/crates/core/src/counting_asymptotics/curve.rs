use std::f64::consts::PI;

use rayon::prelude::*;

use crate::conformal_metrics::{counting_volume, unit_ball_volume, ConformalMetric, Region};
use crate::error::{Error, Result};
use crate::inversive_geometry::{Oriented, OrientedCircle, CURV};
use crate::packing_generator::PackingStore;

/// `N_t(P, f, E)` sampled on a grid of thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct CountCurve {
    pub metric: String,
    pub region: String,
    pub fingerprint: String,
    /// `(t, N_t)` with `t` strictly decreasing.
    pub points: Vec<(f64, u64)>,
    /// Thresholds in `[lo, hi]` are counted exactly.
    pub validity: (f64, f64),
}

impl CountCurve {
    /// A curve built from given samples, valid everywhere.
    pub fn from_points(metric: &str, region: &str, mut points: Vec<(f64, u64)>) -> Result<Self> {
        points.sort_by(|a, b| b.0.total_cmp(&a.0));
        if points.iter().any(|p| !(p.0 > 0.0 && p.0.is_finite())) {
            return Err(Error::Config("thresholds must be positive and finite".into()));
        }
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("duplicate threshold".into()));
        }
        Ok(Self {
            metric: metric.into(),
            region: region.into(),
            fingerprint: String::new(),
            points,
            validity: (0.0, f64::INFINITY),
        })
    }

    /// Samples whose threshold lies in the validity window.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        let (lo, hi) = self.validity;
        self.points.iter().copied().filter(move |p| p.0 >= lo && p.0 <= hi)
    }

    pub fn count_at(&self, t: f64) -> Option<u64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }
}

/// Descending geometric grid from `t_hi` down to `t_lo` with `per_decade`
/// points per factor of ten.
pub fn geometric_grid(t_lo: f64, t_hi: f64, per_decade: u32) -> Result<Vec<f64>> {
    if !(t_lo > 0.0 && t_hi >= t_lo && t_hi.is_finite() && per_decade > 0) {
        return Err(Error::Config(format!(
            "bad grid [{t_lo}, {t_hi}] with {per_decade} points per decade"
        )));
    }
    let span = (t_hi / t_lo).log10();
    let steps = (span * per_decade as f64 + 1e-9).floor() as u32;
    Ok((0..=steps)
        .map(|k| t_hi * 10f64.powf(-(k as f64) / per_decade as f64))
        .collect())
}

/// Which circles a count includes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Selector {
    /// Circles meeting the closed region.
    Meets(Region),
    /// Circles of the ideal-triangle packing: disks inside the triangle plus
    /// its three sides.
    IdealTriangle,
}

const TRIANGLE: Region = Region::Triangle { cap: None };

impl Selector {
    fn y_range(&self) -> (f64, f64) {
        match self {
            Selector::Meets(r) => r.y_range(),
            Selector::IdealTriangle => (0.0, f64::INFINITY),
        }
    }

    fn accepts(&self, c: &OrientedCircle) -> bool {
        match self {
            Selector::Meets(r) => r.intersects(c),
            Selector::IdealTriangle => {
                let b = c.v[CURV];
                if b == 0.0 {
                    // the sides x = +-1
                    return c.v[3].abs() < 1e-12 && (c.v[2].abs() - 1.0).abs() < 1e-12 && (c.v[1] / 2.0 - 1.0).abs() < 1e-12;
                }
                let unit = (b - 1.0).abs() < 1e-12 && c.v[2].abs() < 1e-12 && c.v[3].abs() < 1e-12;
                unit || TRIANGLE.contains_circle(c)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Selector::Meets(r) => r.to_string(),
            Selector::IdealTriangle => "ideal_triangle".into(),
        }
    }
}

/// Smallest threshold at which counts are guaranteed complete.
///
/// A circle missing from the store has radius below `1/T`; if it meets `E`
/// it lies in the `2/T`-neighbourhood of `E`, so its volume is at most
/// `v_n T^-n sup f^n` over that neighbourhood.
pub(crate) fn validity_floor(store: &PackingStore, metric: &ConformalMetric, sel: &Selector) -> Result<f64> {
    let t = store.max_curvature().ok_or_else(|| {
        Error::CutoffInsufficient("counts need a store generated with a curvature cutoff".into())
    })?;
    let n = store.dim();
    let r = 1.0 / t;
    let floor = match sel {
        Selector::IdealTriangle => {
            // a disk of radius r inside the triangle has center height >= 2 sqrt(r)
            match *metric {
                ConformalMetric::Hyperbolic => 2.0 * PI * (1.0 / (1.0 - r / 4.0).sqrt() - 1.0),
                ConformalMetric::PowerLaw { k } if k > 0.0 => PI * r * r * (2.0 * r.sqrt() - r).powf(-2.0 * k),
                _ => {
                    return Err(Error::Domain(format!(
                        "ideal-triangle counts need a decaying half-plane metric, got {metric}"
                    )))
                }
            }
        }
        Selector::Meets(region) => {
            let (y0, _) = region.y_range();
            let d = region.min_dist((0.0, 0.0)) - 2.0 * r;
            unit_ball_volume(n) * r.powi(n as i32) * metric.sup_density(d, y0 - 2.0 * r).powi(n as i32)
        }
    };
    if floor.is_finite() {
        Ok(floor)
    } else {
        Err(Error::CutoffInsufficient(format!(
            "the density of {metric} is unbounded near {}",
            sel.label()
        )))
    }
}

/// Upper bound for `Vol_f` of a disk of radius `r` whose points have
/// height at least `y_low` and distance at least `d_low` from the origin.
fn disk_upper_bound(metric: &ConformalMetric, r: f64, d_low: f64, y_low: f64) -> f64 {
    PI * r * r * metric.sup_density(d_low, y_low).powi(2)
}

fn circle_volume(metric: &ConformalMetric, c: &OrientedCircle, t_floor: f64) -> Result<Option<f64>> {
    let b = c.v[CURV];
    if b > 0.0 {
        let r = 1.0 / b;
        let (x, y) = (c.v[2] / b, c.v[3] / b);
        let ub = disk_upper_bound(metric, r, x.hypot(y) - r, y - r);
        if ub <= t_floor {
            return Ok(None);
        }
    }
    let v = counting_volume(metric, c)?;
    Ok((v > t_floor).then_some(v))
}

/// A store arranged for repeated counting.
pub(crate) enum Prepared<'a> {
    Spheres(&'a PackingStore),
    Circles(&'a PackingStore),
    /// The strip packing is invariant under `z -> z + 2i`: every circle is a
    /// translate of one whose center height lies in `[-1, 1)`. Fundamental
    /// circles are `(r, x, y)` sorted by decreasing radius.
    Strip {
        lines: Vec<OrientedCircle>,
        fund: Vec<(f64, f64, f64)>,
    },
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(store: &'a PackingStore) -> Result<Self> {
        if store.dim() == 3 {
            return Ok(Prepared::Spheres(store));
        }
        let Some(window) = store.strip_window() else {
            return Ok(Prepared::Circles(store));
        };
        if window.0 > -1.0 || window.1 < 1.0 {
            return Err(Error::CutoffInsufficient(format!(
                "strip window [{}, {}] does not cover a period",
                window.0, window.1
            )));
        }
        let mut lines = Vec::new();
        let mut fund = Vec::new();
        for i in 0..store.len() {
            let c = store.circle(i).unwrap();
            let b = c.v[CURV];
            if b == 0.0 {
                lines.push(c);
            } else {
                let cy = c.v[3] / b;
                if (-1.0..1.0).contains(&cy) {
                    fund.push((1.0 / b, c.v[2] / b, cy));
                }
            }
        }
        fund.sort_unstable_by(|a: &(f64, f64, f64), b| b.0.total_cmp(&a.0));
        Ok(Prepared::Strip { lines, fund })
    }
}

/// Volumes above `t_floor` of the selected circles, sorted descending.
pub(crate) fn selected_volumes(
    prep: &Prepared<'_>,
    metric: &ConformalMetric,
    sel: &Selector,
    t_floor: f64,
) -> Result<Vec<f64>> {
    let mut vols: Vec<f64> = match (prep, sel) {
        (Prepared::Spheres(_), Selector::IdealTriangle) => {
            return Err(Error::Domain("ideal triangles are planar".into()))
        }
        (Prepared::Circles(_), Selector::IdealTriangle) => {
            return Err(Error::Domain("ideal-triangle counts need the strip packing".into()))
        }
        (Prepared::Spheres(store), Selector::Meets(region)) => {
            let any = store.sphere(0).map(|s| region.intersects_sphere(&s)).transpose()?;
            if any == Some(false) {
                Vec::new()
            } else {
                (0..store.len())
                    .into_par_iter()
                    .map(|i| {
                        let s = store.sphere(i).unwrap();
                        counting_volume(metric, &s).map(|v| (v > t_floor).then_some(v))
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .flatten()
                    .collect()
            }
        }
        (Prepared::Circles(store), _) => (0..store.len())
            .into_par_iter()
            .map(|i| {
                let c = store.circle(i).unwrap();
                if sel.accepts(&c) {
                    circle_volume(metric, &c, t_floor)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect(),
        (Prepared::Strip { lines, fund }, _) => strip_volumes(lines, fund, metric, sel, t_floor)?,
    };
    vols.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(vols)
}

fn strip_volumes(
    lines: &[OrientedCircle],
    fund: &[(f64, f64, f64)],
    metric: &ConformalMetric,
    sel: &Selector,
    t_floor: f64,
) -> Result<Vec<f64>> {
    let (y0, y1) = sel.y_range();
    if y0 == f64::NEG_INFINITY {
        return Err(Error::Domain("strip counts need a region bounded below".into()));
    }
    let decays = match *metric {
        ConformalMetric::Euclidean => false,
        ConformalMetric::Spherical => true,
        _ => metric.height_exponent().unwrap() > 0.0,
    };
    if y1 == f64::INFINITY && !decays {
        return Err(Error::Domain(format!("{metric} counts on an unbounded region diverge")));
    }
    let mut vols = Vec::new();
    for c in lines {
        if sel.accepts(c) {
            vols.extend(circle_volume(metric, c, t_floor)?);
        }
    }
    let r_max = fund.first().map_or(0.0, |f| f.0);
    let m_lo = ((y0 - 1.0 - r_max) / 2.0).floor() as i64;
    let m_hi = if y1.is_finite() {
        Some(((y1 + 1.0 + r_max) / 2.0).ceil() as i64)
    } else {
        None
    };
    let mut m = m_lo;
    loop {
        if m_hi.is_some_and(|h| m > h) {
            break;
        }
        let shift = 2.0 * m as f64;
        // every translate has center height >= base
        let base = shift - 1.0;
        let prefix = if decays && base - r_max > 0.0 {
            fund.partition_point(|f| disk_upper_bound(metric, f.0, base - f.0, base - f.0) > t_floor)
        } else {
            fund.len()
        };
        if prefix == 0 && m_hi.is_none() && base - r_max > 0.0 {
            break;
        }
        let found = fund[..prefix]
            .par_iter()
            .map(|&(r, x, y)| {
                let y = y + shift;
                if y + r < y0 || y - r > y1 {
                    return Ok(None);
                }
                let c = Oriented::from_coords([1.0 / r, (x * x + y * y - r * r) / r, x / r, y / r]);
                if sel.accepts(&c) {
                    circle_volume(metric, &c, t_floor)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        vols.extend(found.into_iter().flatten());
        m += 1;
    }
    Ok(vols)
}

fn counts_on_grid(vols: &[f64], t_grid: &[f64]) -> Vec<(f64, u64)> {
    t_grid
        .iter()
        .map(|&t| (t, vols.partition_point(|v| *v > t) as u64))
        .collect()
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Config("empty threshold grid".into()));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Config("thresholds must be positive and finite".into()));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("threshold grid must be strictly decreasing".into()));
    }
    Ok(())
}

pub(crate) fn curve_for(
    store: &PackingStore,
    metric: &ConformalMetric,
    sel: &Selector,
    t_grid: &[f64],
) -> Result<CountCurve> {
    check_grid(t_grid)?;
    if let Selector::Meets(r) = sel {
        r.validate()?;
    }
    let floor = validity_floor(store, metric, sel)?;
    let t_min = *t_grid.last().unwrap();
    if t_grid[0] < floor {
        return Err(Error::CutoffInsufficient(format!(
            "every threshold lies below the exactness floor {floor:e}"
        )));
    }
    let vols = selected_volumes(&Prepared::new(store)?, metric, sel, t_min)?;
    Ok(CountCurve {
        metric: metric.to_string(),
        region: sel.label(),
        fingerprint: hex::encode(store.fingerprint()),
        points: counts_on_grid(&vols, t_grid),
        validity: (floor, f64::INFINITY),
    })
}

/// `N_t(P, f, E)` on a strictly decreasing grid of thresholds.
///
/// Lines and other elements of infinite volume are counted at every `t`.
/// Counts below the validity floor are lower bounds.
pub fn count_curve(
    store: &PackingStore,
    metric: &ConformalMetric,
    region: &Region,
    t_grid: &[f64],
) -> Result<CountCurve> {
    curve_for(store, metric, &Selector::Meets(*region), t_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::{generate, GenerationCutoff, PackingSpec};

    #[test]
    fn grid_is_geometric_and_descending() {
        let g = geometric_grid(1e-3, 1.0, 4).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1.0);
        assert!((g[12] - 1e-3).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn small_bounded_store_counts() {
        let store = generate(&PackingSpec::standard_bounded(), GenerationCutoff::MaxCurvature(3.0)).unwrap();
        let disk = Region::Disk {
            center: (0.0, 0.0),
            r: 1.0,
        };
        let t = PI / 9.0 - 1e-9;
        let curve = count_curve(&store, &ConformalMetric::Euclidean, &disk, &[4.0, t]).unwrap();
        assert_eq!(curve.points, vec![(4.0, 0), (t, 5)]);
        assert!((curve.validity.0 - PI / 9.0).abs() < 1e-15);
    }

    #[test]
    fn strip_translates_cover_the_band() {
        let store = generate(&PackingSpec::strip(), GenerationCutoff::MaxCurvature(20.0)).unwrap();
        let band = Region::Band { n: 5 };
        let curve = count_curve(&store, &ConformalMetric::Hyperbolic, &band, &[1.0, 0.02]).unwrap();
        // the two sides always count; the unit circles at heights 4 and 6 meet the band
        assert_eq!(curve.points[0].1, 2);
        let at4 = 2.0 * PI * (4.0 / 15f64.sqrt() - 1.0);
        assert!(at4 > 0.02);
        assert!(curve.points[1].1 >= 4);
    }
}
