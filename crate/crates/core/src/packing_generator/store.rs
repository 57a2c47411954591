use std::cmp::Ordering;

use super::engine::{grow_cluster, grow_tuples, GenerationStats, KeyIndex, Monotone, TreeParams};
use super::spec::{ClusterRoot, GenerationCutoff, PackingSpec};
use crate::error::{Error, Result};
use crate::inversive_geometry::{dual_of, MobiusMap, Oriented, OrientedCircle, OrientedSphere, CURV};
use crate::tolerance::TOL;

/// Largest curvature cutoff accepted in exact mode: squares of scaled
/// coordinates must stay far inside the 128-bit range.
pub const MAX_EXACT_CUTOFF: f64 = 1.0e15;

/// Record storage, one variant per arithmetic mode and dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum Records {
    /// Exact circles; coordinates are multiplied by `scale`.
    Exact4 { scale: i128, rows: Vec<[i128; 4]> },
    Float4(Vec<[f64; 4]>),
    Float5(Vec<[f64; 5]>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Exact4 { rows, .. } => rows.len(),
            Records::Float4(r) => r.len(),
            Records::Float5(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A deduplicated, canonically ordered packing truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingStore {
    pub spec: PackingSpec,
    pub cutoff: GenerationCutoff,
    pub records: Records,
    pub stats: GenerationStats,
}

fn key_step(cutoff: &GenerationCutoff) -> f64 {
    match cutoff {
        GenerationCutoff::MaxCurvature(t) => TOL.dedup_grid * t.max(1.0),
        _ => TOL.dedup_grid * 1e3,
    }
}

fn canonical_cmp<T: PartialOrd + Copy, const D: usize>(abs: fn(T) -> T, a: &[T; D], b: &[T; D]) -> Ordering {
    let ord = |x: T, y: T| x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    ord(abs(a[CURV]), abs(b[CURV]))
        .then_with(|| {
            (2..D)
                .map(|k| ord(a[k], b[k]))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| ord(a[0], b[0]))
        .then_with(|| ord(a[1], b[1]))
}

fn sort_float<const D: usize>(rows: &mut [[f64; D]]) {
    rows.sort_unstable_by(|a, b| canonical_cmp(f64::abs, a, b));
}

fn sort_exact(rows: &mut [[i128; 4]]) {
    rows.sort_unstable_by(|a, b| canonical_cmp(i128::abs, a, b));
}

/// Strip branches whose gap misses the height window can be dropped.
fn strip_filter(window: (f64, f64)) -> impl Fn(&[[f64; 4]; 4], usize) -> bool + Sync {
    move |members, slot| match dual_of(members, slot) {
        Ok(d) => half_space_meets_band(&d, window),
        Err(_) => true,
    }
}

/// Whether the interior of an oriented circle meets `{y0 <= y <= y1}`.
pub(crate) fn half_space_meets_band(d: &OrientedCircle, (y0, y1): (f64, f64)) -> bool {
    let eps = 1e-12;
    let b = d.v[CURV];
    if b == 0.0 {
        let (nx, ny) = (d.v[2], d.v[3]);
        let h = 0.5 * d.v[1];
        if nx.abs() > 1e-15 {
            return true;
        }
        if ny > 0.0 {
            y1 > h / ny - eps
        } else {
            y0 < h / ny + eps
        }
    } else if b > 0.0 {
        let cy = d.v[3] / b;
        let r = 1.0 / b;
        cy - r <= y1 + eps && cy + r >= y0 - eps
    } else {
        true
    }
}

/// Enumerates the packing described by `spec` up to `cutoff`.
pub fn generate(spec: &PackingSpec, cutoff: GenerationCutoff) -> Result<PackingStore> {
    spec.validate()?;
    cutoff.validate()?;
    let max_curvature = cutoff.max_curvature();
    let max_depth = match cutoff {
        GenerationCutoff::MaxWordLength(l) => Some(l),
        _ => None,
    };
    let max_records = match cutoff {
        GenerationCutoff::MaxCircles(n) => Some(n),
        _ => None,
    };
    let step = key_step(&cutoff);
    let (records, stats) = match spec {
        PackingSpec::BoundedIntegral { .. } | PackingSpec::StripP0 { .. } => {
            let root = spec.exact_root().expect("exact spec");
            if let Some(t) = max_curvature {
                if t * root.scale as f64 > MAX_EXACT_CUTOFF {
                    return Err(Error::Overflow(format!(
                        "curvature cutoff {t} exceeds the exact integer width (limit {MAX_EXACT_CUTOFF:e})"
                    )));
                }
            }
            let window = match spec {
                PackingSpec::StripP0 { window } => Some(*window),
                _ => None,
            };
            let filter = window.map(strip_filter);
            let params = TreeParams {
                max_curvature,
                max_depth,
                max_records,
                tuple_dedup: false,
                monotone: Monotone::Chain,
                branch_filter: filter.as_ref().map(|f| f as _),
                key_step: step,
            };
            let (mut rows, stats) = grow_tuples(&root.members, root.scale, &params)?;
            if let Some(t) = max_curvature {
                let lim = t * root.scale as f64;
                rows.retain(|r| (r[CURV].abs() as f64) <= lim);
            }
            if let Some((y0, y1)) = window {
                // the scale cancels in the center height
                rows.retain(|r| {
                    r[CURV] == 0 || {
                        let y = r[3] as f64 / r[CURV] as f64;
                        y >= y0 && y <= y1
                    }
                });
            }
            sort_exact(&mut rows);
            (
                Records::Exact4 {
                    scale: root.scale,
                    rows,
                },
                stats,
            )
        }
        PackingSpec::CustomFloat { root } => {
            let params = TreeParams {
                max_curvature,
                max_depth,
                max_records,
                tuple_dedup: false,
                monotone: Monotone::Chain,
                branch_filter: None,
                key_step: step,
            };
            let (mut rows, stats) = grow_tuples(&root.to_float().members, 1.0, &params)?;
            retain_curvature(&mut rows, max_curvature);
            sort_float(&mut rows);
            (Records::Float4(rows), stats)
        }
        PackingSpec::Sphere3d { root } => {
            let params = TreeParams {
                max_curvature,
                max_depth,
                max_records,
                tuple_dedup: true,
                monotone: Monotone::Replaced,
                branch_filter: None,
                key_step: step,
            };
            let (mut rows, stats) = grow_tuples(&root.to_float().members, 1.0, &params)?;
            retain_curvature(&mut rows, max_curvature);
            sort_float(&mut rows);
            (Records::Float5(rows), stats)
        }
        PackingSpec::DualCluster { root } => match root {
            ClusterRoot::Circles(r) => {
                let (mut rows, stats) =
                    grow_cluster(&r.members, max_curvature, max_depth, max_records, step)?;
                retain_curvature(&mut rows, max_curvature);
                sort_float(&mut rows);
                (Records::Float4(rows), stats)
            }
            ClusterRoot::Spheres(r) => {
                let (mut rows, stats) =
                    grow_cluster(&r.members, max_curvature, max_depth, max_records, step)?;
                retain_curvature(&mut rows, max_curvature);
                sort_float(&mut rows);
                (Records::Float5(rows), stats)
            }
        },
    };
    Ok(PackingStore {
        spec: spec.clone(),
        cutoff,
        records,
        stats,
    })
}

fn retain_curvature<const D: usize>(rows: &mut Vec<[f64; D]>, t: Option<f64>) {
    if let Some(t) = t {
        rows.retain(|r| r[CURV].abs() <= t);
    }
}

/// Outcome of checking that a map sends the store into itself.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvarianceReport {
    pub checked: usize,
    pub skipped_out_of_range: usize,
    /// Indices of records whose in-range image is missing from the store.
    pub violations: Vec<usize>,
}

impl InvarianceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PackingStore {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.records, Records::Exact4 { .. })
    }

    pub fn dim(&self) -> usize {
        match self.records {
            Records::Float5(_) => 3,
            _ => 2,
        }
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        self.spec.fingerprint()
    }

    pub fn max_curvature(&self) -> Option<f64> {
        self.cutoff.max_curvature()
    }

    /// Height window of a strip store.
    pub fn strip_window(&self) -> Option<(f64, f64)> {
        match self.spec {
            PackingSpec::StripP0 { window } => Some(window),
            _ => None,
        }
    }

    pub fn curvature(&self, i: usize) -> f64 {
        match &self.records {
            Records::Exact4 { scale, rows } => rows[i][CURV] as f64 / *scale as f64,
            Records::Float4(r) => r[i][CURV],
            Records::Float5(r) => r[i][CURV],
        }
    }

    /// Record `i` as a float circle; `None` for sphere stores.
    pub fn circle(&self, i: usize) -> Option<OrientedCircle> {
        match &self.records {
            Records::Exact4 { scale, rows } => {
                let s = *scale as f64;
                let r = rows[i];
                Some(Oriented::from_coords([
                    r[0] as f64 / s,
                    r[1] as f64 / s,
                    r[2] as f64 / s,
                    r[3] as f64 / s,
                ]))
            }
            Records::Float4(r) => Some(Oriented::from_coords(r[i])),
            Records::Float5(_) => None,
        }
    }

    pub fn sphere(&self, i: usize) -> Option<OrientedSphere> {
        match &self.records {
            Records::Float5(r) => Some(Oriented::from_coords(r[i])),
            _ => None,
        }
    }

    /// All records as float circles (empty for sphere stores).
    pub fn circles(&self) -> Vec<OrientedCircle> {
        match &self.records {
            Records::Float5(_) => Vec::new(),
            _ => (0..self.len()).filter_map(|i| self.circle(i)).collect(),
        }
    }

    /// Sorted positive curvatures of the store.
    pub fn positive_curvatures(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.len())
            .map(|i| self.curvature(i))
            .filter(|b| *b > 0.0)
            .collect();
        v.sort_unstable_by(f64::total_cmp);
        v
    }

    /// `#{S : 0 < b(S) <= x}`; `x` may not exceed the curvature cutoff.
    pub fn circle_count_by_curvature(&self, x: f64) -> Result<u64> {
        match self.max_curvature() {
            Some(t) if x <= t => {}
            Some(t) => {
                return Err(Error::OutOfCutoff {
                    requested: x,
                    cutoff: t,
                })
            }
            None => {
                return Err(Error::CutoffInsufficient(
                    "curvature counts need a store generated with a curvature cutoff".into(),
                ))
            }
        }
        let n = match &self.records {
            Records::Exact4 { scale, rows } => {
                let lim = x * *scale as f64;
                rows.iter()
                    .filter(|r| r[CURV] > 0 && (r[CURV] as f64) <= lim)
                    .count()
            }
            Records::Float4(r) => r.iter().filter(|r| r[CURV] > 0.0 && r[CURV] <= x).count(),
            Records::Float5(r) => r.iter().filter(|r| r[CURV] > 0.0 && r[CURV] <= x).count(),
        };
        Ok(n as u64)
    }

    /// Whether a float circle lies in the range this store claims complete.
    fn in_range(&self, v: &[f64; 4]) -> bool {
        let b = v[CURV];
        if let Some(t) = self.max_curvature() {
            if b.abs() > t * (1.0 + 1e-12) {
                return false;
            }
        }
        if let Some((y0, y1)) = self.strip_window() {
            if b != 0.0 {
                let y = v[3] / b;
                let margin = 1e-9;
                if y < y0 + margin || y > y1 - margin {
                    return false;
                }
            }
        }
        true
    }

    /// Checks that `m` maps every in-range circle onto a stored circle.
    pub fn verify_gamma_invariance(&self, m: &MobiusMap<4>) -> Result<InvarianceReport> {
        let mut report = InvarianceReport::default();
        if self.is_empty() {
            return Ok(report);
        }
        if self.dim() != 2 {
            return Err(Error::Domain("invariance check needs a circle store".into()));
        }
        match &self.records {
            Records::Exact4 { scale, rows } => {
                let mut idx = KeyIndex::<4>::new(1.0);
                let mut scratch = Vec::new();
                for (i, r) in rows.iter().enumerate() {
                    idx.get_or_insert(r, i as u32, &mut scratch)?;
                }
                let s = *scale as f64;
                for i in 0..rows.len() {
                    let img = m.apply(&self.circle(i).unwrap()).v;
                    let lifted = img.map(|x| x * s);
                    let rounded = lifted.map(|x| x.round());
                    if !self.in_range(&img) {
                        report.skipped_out_of_range += 1;
                        continue;
                    }
                    report.checked += 1;
                    let exact_ok = lifted
                        .iter()
                        .zip(rounded.iter())
                        .all(|(a, b)| (a - b).abs() < 1e-6 * (1.0 + a.abs()));
                    let key = rounded.map(|x| x as i128);
                    if !exact_ok || idx.find(&key, &mut scratch)?.is_none() {
                        report.violations.push(i);
                    }
                }
            }
            Records::Float4(rows) => {
                let mut idx = KeyIndex::<4>::new(key_step(&self.cutoff) * 1e3);
                let mut scratch = Vec::new();
                for (i, r) in rows.iter().enumerate() {
                    idx.get_or_insert(r, i as u32, &mut scratch)?;
                }
                for (i, r) in rows.iter().enumerate() {
                    let img = m.apply_raw(r);
                    if !self.in_range(&img) {
                        report.skipped_out_of_range += 1;
                        continue;
                    }
                    report.checked += 1;
                    if idx.find(&img, &mut scratch)?.is_none() {
                        report.violations.push(i);
                    }
                }
            }
            Records::Float5(_) => unreachable!(),
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bounded_examples() {
        let spec = PackingSpec::standard_bounded();
        let s3 = generate(&spec, GenerationCutoff::MaxCurvature(3.0)).unwrap();
        let mut b: Vec<f64> = (0..s3.len()).map(|i| s3.curvature(i)).collect();
        b.sort_by(f64::total_cmp);
        assert_eq!(b, vec![-1.0, 2.0, 2.0, 3.0, 3.0]);
        let s2 = generate(&spec, GenerationCutoff::MaxCurvature(2.0)).unwrap();
        assert_eq!(s2.len(), 3);
        assert_eq!(s3.circle_count_by_curvature(3.0).unwrap(), 4);
        assert_eq!(s3.circle_count_by_curvature(1.5).unwrap(), 0);
        assert!(s3.circle_count_by_curvature(4.0).is_err());
    }

    #[test]
    fn max_circles_gives_root() {
        let spec = PackingSpec::standard_bounded();
        let s = generate(&spec, GenerationCutoff::MaxCircles(4)).unwrap();
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn exact_width_guard() {
        let spec = PackingSpec::standard_bounded();
        assert!(matches!(
            generate(&spec, GenerationCutoff::MaxCurvature(1e30)),
            Err(Error::Overflow(_))
        ));
    }
}
