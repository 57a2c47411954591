use crate::error::{Error, Result};
use crate::inversive_geometry::OrientedCircle;
use crate::packing_generator::PackingStore;

const GRID: usize = 32;

/// Tests whether points lie within `eps` of the residual set.
///
/// The residual set is the complement of the open disks of the packing, so
/// a point is farther than `eps` from it exactly when it lies inside some
/// disk at depth more than `eps`; only disks of radius above `eps` can do
/// that. The strip packing is reduced modulo its period `2i`.
#[derive(Clone, Debug)]
pub struct ResidualProximity {
    eps: f64,
    period: Option<f64>,
    /// Lines and negatively oriented circles, tested for every point.
    always: Vec<OrientedCircle>,
    disks: Vec<(f64, f64, f64)>,
    bbox: (f64, f64, f64, f64),
    cells: Vec<Vec<u32>>,
}

impl ResidualProximity {
    pub fn new(store: &PackingStore, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("distance must be positive, got {eps}")));
        }
        if store.dim() != 2 {
            return Err(Error::Domain("residual proximity needs a circle store".into()));
        }
        let t = store
            .max_curvature()
            .ok_or_else(|| Error::CutoffInsufficient("residual proximity needs a curvature cutoff".into()))?;
        if t < 1.0 / eps {
            return Err(Error::CutoffInsufficient(format!(
                "disks of radius {eps} need curvature cutoff {}, store has {t}",
                1.0 / eps
            )));
        }
        let period = match store.strip_window() {
            Some((y0, y1)) => {
                if y0 > -3.0 || y1 < 3.0 {
                    return Err(Error::CutoffInsufficient(format!(
                        "strip window [{y0}, {y1}] must cover [-3, 3]"
                    )));
                }
                Some(2.0)
            }
            None => None,
        };
        let mut always = Vec::new();
        let mut disks = Vec::new();
        for c in store.circles() {
            let b = c.v[0];
            if b <= 0.0 {
                always.push(c);
            } else if 1.0 / b > eps {
                let (x, y) = c.center().unwrap();
                if period.is_none() || (-3.0..3.0).contains(&y) {
                    disks.push((x, y, 1.0 / b));
                }
            }
        }
        let bbox = match period {
            Some(p) => (-1.0, 1.0, -p / 2.0, p / 2.0),
            None => disks.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                |b, d| (b.0.min(d.0 - d.2), b.1.max(d.0 + d.2), b.2.min(d.1 - d.2), b.3.max(d.1 + d.2)),
            ),
        };
        let mut cells = vec![Vec::new(); GRID * GRID];
        if bbox.0 < bbox.1 {
            let (wx, wy) = ((bbox.1 - bbox.0) / GRID as f64, (bbox.3 - bbox.2) / GRID as f64);
            for (i, &(x, y, r)) in disks.iter().enumerate() {
                let reach = r - eps;
                let range = |lo: f64, w: f64, c: f64| {
                    let a = (((c - reach - lo) / w).floor().max(0.0) as usize).min(GRID);
                    let b = (((c + reach - lo) / w).floor().max(-1.0) + 1.0).min(GRID as f64) as usize;
                    a..b
                };
                for gx in range(bbox.0, wx, x) {
                    for gy in range(bbox.2, wy, y) {
                        cells[gy * GRID + gx].push(i as u32);
                    }
                }
            }
        }
        Ok(Self {
            eps,
            period,
            always,
            disks,
            bbox,
            cells,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Whether `p` is within `eps` of the residual set.
    pub fn is_near(&self, p: (f64, f64)) -> bool {
        let mut q = p;
        if let Some(per) = self.period {
            q.1 -= per * ((q.1 + per / 2.0) / per).floor();
        }
        for c in &self.always {
            if c.interior_contains(&[q.0, q.1]) && c.distance_to_point(&[q.0, q.1]) > self.eps {
                return false;
            }
        }
        let (x0, x1, y0, y1) = self.bbox;
        if !(q.0 >= x0 && q.0 < x1 && q.1 >= y0 && q.1 < y1) {
            return true;
        }
        let gx = (((q.0 - x0) / (x1 - x0) * GRID as f64) as usize).min(GRID - 1);
        let gy = (((q.1 - y0) / (y1 - y0) * GRID as f64) as usize).min(GRID - 1);
        !self.cells[gy * GRID + gx].iter().any(|&i| {
            let (x, y, r) = self.disks[i as usize];
            r - (q.0 - x).hypot(q.1 - y) > self.eps
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::{generate, GenerationCutoff, PackingSpec};

    #[test]
    fn bounded_packing_examples() {
        let store = generate(&PackingSpec::standard_bounded(), GenerationCutoff::MaxCurvature(40.0)).unwrap();
        let near = ResidualProximity::new(&store, 0.05).unwrap();
        assert!(!near.is_near((0.5, 0.0)));
        assert!(near.is_near((0.0, 0.0)));
        assert!(near.is_near((0.0, 0.999)));
        assert!(!near.is_near((0.0, 2.0)));
        assert!(near.is_near((0.96, 0.0)));
        assert!(ResidualProximity::new(&store, 0.01).is_err());
    }

    #[test]
    fn strip_is_periodic() {
        let spec = PackingSpec::StripP0 { window: (-4.0, 4.0) };
        let store = generate(&spec, GenerationCutoff::MaxCurvature(40.0)).unwrap();
        let near = ResidualProximity::new(&store, 0.05).unwrap();
        for k in [-3.0, 0.0, 5.0] {
            assert!(!near.is_near((0.0, 2.0 * k)));
            assert!(near.is_near((0.0, 2.0 * k + 1.0)));
            assert!(near.is_near((1.0, 2.0 * k + 0.3)));
        }
        assert!(!near.is_near((1.2, 0.0)));
        assert!(near.is_near((1.04, 7.7)));
    }

    #[test]
    fn brute_force_agrees() {
        let store = generate(&PackingSpec::standard_bounded(), GenerationCutoff::MaxCurvature(40.0)).unwrap();
        let near = ResidualProximity::new(&store, 0.05).unwrap();
        let circles = store.circles();
        for i in 0..400 {
            let p = (-1.1 + 2.2 * ((i * 37) % 400) as f64 / 400.0, -1.1 + 2.2 * i as f64 / 400.0);
            let far = circles
                .iter()
                .any(|c| c.interior_contains(&[p.0, p.1]) && c.distance_to_point(&[p.0, p.1]) > 0.05);
            assert_eq!(near.is_near(p), !far, "{p:?}");
        }
    }
}
