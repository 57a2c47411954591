use rayon::prelude::*;

use crate::conformal_metrics::Region;
use crate::error::{Error, Result};
use crate::inversive_geometry::{reflect_coords, twice_product, Coord, CURV};
use crate::packing_generator::PackingSpec;

/// Diameter threshold of cover level `level >= 1`; level 0 is the root's
/// own gaps.
pub fn level_scale(level: u32) -> f64 {
    if level == 0 {
        f64::INFINITY
    } else {
        0.5f64.powi(level as i32 - 1)
    }
}

const MAX_DEPTH: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverDisk {
    pub center: (f64, f64),
    /// Infinite for gaps that are not bounded by a disk.
    pub diameter: f64,
}

/// Disks covering `Res(P) ∩ E` at one refinement level.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCover {
    pub level: u32,
    pub scale: f64,
    pub region: String,
    pub disks: Vec<CoverDisk>,
}

impl GapCover {
    pub fn max_diameter(&self) -> f64 {
        self.disks.iter().map(|d| d.diameter).fold(0.0, f64::max)
    }

    /// Whether `p` lies in some disk of the cover (within `slack`).
    pub fn covers(&self, p: (f64, f64), slack: f64) -> bool {
        self.disks.iter().any(|d| {
            !d.diameter.is_finite() || (p.0 - d.center.0).hypot(p.1 - d.center.1) <= d.diameter / 2.0 + slack
        })
    }
}

/// The interior of a dual circle, which contains its gap.
#[derive(Clone, Copy, Debug)]
enum GapShape {
    Disk { center: (f64, f64), r: f64 },
    HalfPlane { n: (f64, f64), h: f64 },
    Outside { center: (f64, f64), r: f64 },
}

impl GapShape {
    fn of<S: Coord>(members: &[[S; 4]; 4], slot: usize) -> Result<Self> {
        let d = dual_raw(members, slot)?;
        let b = d[CURV];
        let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        Ok(if b.abs() <= 1e-12 * scale {
            let norm = d[2].hypot(d[3]);
            GapShape::HalfPlane {
                n: (d[2] / norm, d[3] / norm),
                h: d[1] / (2.0 * norm),
            }
        } else {
            let center = (d[2] / b, d[3] / b);
            let r = 1.0 / b.abs();
            if b > 0.0 {
                GapShape::Disk { center, r }
            } else {
                GapShape::Outside { center, r }
            }
        })
    }

    fn diameter(&self) -> f64 {
        match self {
            GapShape::Disk { r, .. } => 2.0 * r,
            _ => f64::INFINITY,
        }
    }

    fn center(&self) -> (f64, f64) {
        match *self {
            GapShape::Disk { center, .. } | GapShape::Outside { center, .. } => center,
            GapShape::HalfPlane { n, h } => (n.0 * h, n.1 * h),
        }
    }

    fn meets(&self, region: &Region) -> bool {
        match *self {
            GapShape::Disk { center, r } => region.meets_disk(center, r),
            GapShape::HalfPlane { n, h } => region.meets_half_plane(n, h),
            GapShape::Outside { center, r } => region.max_dist(center) >= r,
        }
    }
}

/// Unit-normalized dual of `slot`, with the sum and the form evaluated in `S`.
fn dual_raw<S: Coord>(members: &[[S; 4]; 4], slot: usize) -> Result<[f64; 4]> {
    let overflow = || Error::Overflow(format!("dual of slot {slot} overflows"));
    let mut w = [S::zero(); 4];
    for (c, o) in w.iter_mut().enumerate() {
        let mut sum = S::zero();
        for (j, m) in members.iter().enumerate() {
            if j != slot {
                sum = sum.add(m[c]).ok_or_else(overflow)?;
            }
        }
        *o = sum.sub(members[slot][c]).ok_or_else(overflow)?;
    }
    let norm2 = twice_product(&w, &w).ok_or_else(overflow)?.to_f64() / 2.0;
    if !(norm2 > 0.0) {
        return Err(Error::Degenerate(format!("dual of slot {slot} is not spacelike")));
    }
    let inv = 1.0 / norm2.sqrt();
    Ok(w.map(|x| x.to_f64() * inv))
}

/// A visited gap: its disk, and the smallest diameter among its ancestors.
#[derive(Clone, Copy, Debug)]
struct Entry {
    disk: CoverDisk,
    ancestor_min: f64,
    root: bool,
}

fn float_root(spec: &PackingSpec) -> Result<[[f64; 4]; 4]> {
    spec.circle_root()
        .map(|r| r.members)
        .ok_or_else(|| Error::Domain(format!("gap covers need a circle packing, got {}", spec.kind_name())))
}

/// Depth-first refinement of one gap until every descendant is at most
/// `finest` across or leaves the region.
fn refine<S: Coord>(start: ([[S; 4]; 4], usize, f64, bool), region: &Region, finest: f64) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    let mut stack = vec![(start.0, start.1, start.2, start.3, 0usize)];
    while let Some((members, slot, ancestor_min, root, depth)) = stack.pop() {
        let shape = GapShape::of(&members, slot)?;
        if !shape.meets(region) {
            continue;
        }
        let diameter = shape.diameter();
        out.push(Entry {
            disk: CoverDisk {
                center: shape.center(),
                diameter,
            },
            ancestor_min,
            root,
        });
        if diameter > finest {
            if depth >= MAX_DEPTH {
                return Err(Error::Invariant(format!("gap refinement exceeded depth {MAX_DEPTH}")));
            }
            let mut child = members;
            child[slot] = reflect_coords(&members, slot).ok_or_else(|| Error::Overflow("gap refinement overflows".into()))?;
            let anc = ancestor_min.min(diameter);
            for j in (0..4).rev().filter(|&j| j != slot) {
                stack.push((child, j, anc, false, depth + 1));
            }
        }
    }
    Ok(out)
}

/// Splits the root gaps into subtrees for parallel refinement.
fn seeds<S: Coord>(root: [[S; 4]; 4], region: &Region, finest: f64, split_depth: usize) -> Result<(Vec<Entry>, Vec<([[S; 4]; 4], usize, f64, bool)>)> {
    let mut done = Vec::new();
    let mut layer: Vec<([[S; 4]; 4], usize, f64, bool)> = (0..4).map(|s| (root, s, f64::INFINITY, true)).collect();
    for _ in 0..split_depth {
        let mut next = Vec::new();
        for (members, slot, anc, root) in layer {
            let shape = GapShape::of(&members, slot)?;
            if !shape.meets(region) {
                continue;
            }
            let diameter = shape.diameter();
            done.push(Entry {
                disk: CoverDisk {
                    center: shape.center(),
                    diameter,
                },
                ancestor_min: anc,
                root,
            });
            if diameter > finest {
                let mut child = members;
                child[slot] = reflect_coords(&members, slot).ok_or_else(|| Error::Overflow("gap refinement overflows".into()))?;
                for j in (0..4).filter(|&j| j != slot) {
                    next.push((child, j, anc.min(diameter), false));
                }
            }
        }
        layer = next;
    }
    Ok((done, layer))
}

fn entries<S: Coord>(root: [[S; 4]; 4], region: &Region, finest: f64) -> Result<Vec<Entry>> {
    let (mut done, layer) = seeds(root, region, finest, 4)?;
    let parts = layer
        .into_par_iter()
        .map(|seed| refine(seed, region, finest))
        .collect::<Result<Vec<_>>>()?;
    for p in parts {
        done.extend(p);
    }
    Ok(done)
}

fn select(entries: &[Entry], level: u32, region: &Region) -> GapCover {
    let scale = level_scale(level);
    let mut disks: Vec<CoverDisk> = entries
        .iter()
        .filter(|e| if level == 0 { e.root } else { e.disk.diameter <= scale && scale < e.ancestor_min })
        .map(|e| e.disk)
        .collect();
    disks.sort_unstable_by(|a, b| {
        a.diameter
            .total_cmp(&b.diameter)
            .then(a.center.0.total_cmp(&b.center.0))
            .then(a.center.1.total_cmp(&b.center.1))
    });
    GapCover {
        level,
        scale,
        region: region.to_string(),
        disks,
    }
}

/// Covers at several levels from a single refinement pass.
///
/// The cover at level `L >= 1` consists of the gaps of diameter at most
/// `level_scale(L)` all of whose ancestors are larger; each gap is covered by
/// its dual circle, which passes through the three tangency points bounding
/// it. Gaps whose dual disk misses the region are dropped.
pub fn gap_covers(spec: &PackingSpec, region: &Region, levels: &[u32]) -> Result<Vec<GapCover>> {
    region.validate()?;
    if !region.is_bounded() {
        return Err(Error::Domain(format!("gap covers need a bounded region, got {region}")));
    }
    let finest = levels.iter().map(|&l| level_scale(l)).fold(f64::INFINITY, f64::min);
    let all = match spec.exact_root() {
        Some(root) => entries(root.members, region, finest)?,
        None => entries(float_root(spec)?, region, finest)?,
    };
    Ok(levels.iter().map(|&l| select(&all, l, region)).collect())
}

pub fn gap_cover(spec: &PackingSpec, region: &Region, level: u32) -> Result<GapCover> {
    Ok(gap_covers(spec, region, &[level])?.remove(0))
}

/// `sum diam(D)^s` over the cover.
pub fn hausdorff_sum(cover: &GapCover, s: f64) -> f64 {
    cover.disks.iter().map(|d| d.diameter.powf(s)).sum()
}

/// Cover of the planar middle-thirds dust (four similarities of ratio 1/3)
/// by the circumdisks of its level-`level` squares.
pub fn cantor_dust_cover(level: u32) -> GapCover {
    let side = 3f64.powi(-(level as i32));
    let mut coords = vec![0.0f64];
    for k in 0..level {
        let step = 2.0 * 3f64.powi(-(k as i32 + 1));
        coords = coords.iter().flat_map(|&c| [c, c + step]).collect();
    }
    let disks = coords
        .iter()
        .flat_map(|&x| {
            coords.iter().map(move |&y| CoverDisk {
                center: (x + side / 2.0, y + side / 2.0),
                diameter: side * 2f64.sqrt(),
            })
        })
        .collect();
    GapCover {
        level,
        scale: side * 2f64.sqrt(),
        region: "cantor_dust".into(),
        disks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversive_geometry::standard_bounded_root;

    fn unit_disk() -> Region {
        Region::Disk {
            center: (0.0, 0.0),
            r: 1.0,
        }
    }

    #[test]
    fn level_zero_is_the_root_duals() {
        let cover = gap_cover(&PackingSpec::standard_bounded(), &unit_disk(), 0).unwrap();
        assert_eq!(cover.disks.len(), 4);
        let finite: Vec<f64> = cover.disks.iter().map(|d| d.diameter).filter(|d| d.is_finite()).collect();
        assert_eq!(finite.len(), 3);
        assert!(finite.iter().any(|d| (d - 0.5).abs() < 1e-12));
    }

    #[test]
    fn gaps_lie_on_the_unfilled_side() {
        let root = standard_bounded_root().to_float().members;
        let mut members = root;
        for step in [0usize, 1, 3, 2, 1, 0] {
            for slot in 0..4 {
                if let GapShape::Disk { center, r } = GapShape::of(&members, slot).unwrap() {
                    let old = members[slot];
                    let new = reflect_coords(&members, slot).unwrap();
                    let inside = |v: [f64; 4]| {
                        let (c, rr) = ((v[2] / v[0], v[3] / v[0]), 1.0 / v[0].abs());
                        (c.0 - center.0).hypot(c.1 - center.1) + rr <= r * (1.0 + 1e-9)
                    };
                    assert!(inside(new));
                    assert!(old[0] <= 0.0 || !inside(old));
                }
            }
            members[step] = reflect_coords(&members, step).unwrap();
        }
    }

    #[test]
    fn diameters_shrink_with_level() {
        let covers = gap_covers(&PackingSpec::standard_bounded(), &unit_disk(), &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        for w in covers.windows(2) {
            assert!(w[1].max_diameter() <= w[0].max_diameter());
        }
        assert!(hausdorff_sum(&covers[6], 2.0) < hausdorff_sum(&covers[3], 2.0));
        assert!(hausdorff_sum(&covers[6], 1.0) > hausdorff_sum(&covers[3], 1.0));
    }

    #[test]
    fn dust_cover_counts() {
        let c = cantor_dust_cover(3);
        assert_eq!(c.disks.len(), 64);
        assert!((hausdorff_sum(&cantor_dust_cover(0), 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }
}
