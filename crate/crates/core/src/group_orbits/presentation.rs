use crate::error::{Error, Result};
use crate::inversive_geometry::{bilinear, dual_of, MobiusMap, Oriented};
use crate::packing_generator::{ClusterRoot, InvarianceReport, PackingSpec, PackingStore};

/// A group generated by inversions, all of which are involutions.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPresentation<const D: usize = 4> {
    /// Mirror circles (or spheres) of the generators.
    pub mirrors: Vec<Oriented<D>>,
    pub generators: Vec<MobiusMap<D>>,
}

impl<const D: usize> GroupPresentation<D> {
    pub fn from_mirrors(mirrors: Vec<Oriented<D>>) -> Result<Self> {
        if mirrors.len() < 2 {
            return Err(Error::Domain("a presentation needs at least two generators".into()));
        }
        for (i, m) in mirrors.iter().enumerate() {
            let q = bilinear(&m.v, &m.v);
            if !((q - 1.0).abs() <= 1e-9) {
                return Err(Error::Domain(format!("mirror {i} is not normalized: |Q - 1| = {:e}", (q - 1.0).abs())));
            }
        }
        let generators: Vec<MobiusMap<D>> = mirrors.iter().map(MobiusMap::inversion).collect();
        let pres = Self { mirrors, generators };
        pres.check_involutions()?;
        Ok(pres)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn check_involutions(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if !g.is_involution() {
                return Err(Error::Invariant(format!("generator {i} does not square to the identity")));
            }
        }
        Ok(())
    }

    /// `u -> u - 2 <u, c> c` for generator `i`, without forming the matrix.
    #[inline]
    pub fn reflect(&self, i: usize, u: &[f64; D]) -> [f64; D] {
        let c = &self.mirrors[i].v;
        let k = 2.0 * bilinear(u, c);
        let mut out = *u;
        for (o, x) in out.iter_mut().zip(c) {
            *o -= k * x;
        }
        out
    }
}

impl GroupPresentation<4> {
    /// The symmetry group of a circle packing: inversions in the dual circles
    /// of the root for Apollonian packings, in the root circles for dual
    /// clusters.
    pub fn from_spec(spec: &PackingSpec) -> Result<Self> {
        let mirrors = match spec {
            PackingSpec::DualCluster {
                root: ClusterRoot::Circles(r),
            } => (0..4).map(|i| r.member_f64(i)).collect(),
            _ => {
                let root = spec.circle_root().ok_or_else(|| {
                    Error::Domain(format!("{} is not a circle packing", spec.kind_name()))
                })?;
                (0..4).map(|i| dual_of(&root.members, i)).collect::<Result<Vec<_>>>()?
            }
        };
        Self::from_mirrors(mirrors)
    }

    /// Checks that every generator maps the stored circles into the store.
    pub fn verify_on(&self, store: &PackingStore) -> Result<Vec<InvarianceReport>> {
        self.generators.iter().map(|g| store.verify_gamma_invariance(g)).collect()
    }
}

impl GroupPresentation<5> {
    pub fn from_sphere_spec(spec: &PackingSpec) -> Result<Self> {
        let mirrors = match spec {
            PackingSpec::Sphere3d { root } => (0..5).map(|i| dual_of(&root.members, i)).collect::<Result<Vec<_>>>()?,
            PackingSpec::DualCluster {
                root: ClusterRoot::Spheres(r),
            } => (0..5).map(|i| r.member_f64(i)).collect(),
            _ => return Err(Error::Domain(format!("{} is not a sphere packing", spec.kind_name()))),
        };
        Self::from_mirrors(mirrors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::{generate, GenerationCutoff};

    #[test]
    fn strip_generators_are_the_expected_mirrors() {
        let pres = GroupPresentation::from_spec(&PackingSpec::strip()).unwrap();
        let mut lines = Vec::new();
        let mut circles = Vec::new();
        for m in &pres.mirrors {
            match m.center() {
                Some(c) => circles.push((c, 1.0 / m.v[0].abs())),
                None => lines.push(m.v[1] / 2.0 * m.v[3].signum()),
            }
        }
        lines.sort_by(f64::total_cmp);
        assert_eq!(lines.len(), 2);
        assert!((lines[0] + 2.0).abs() < 1e-12 && lines[1].abs() < 1e-12, "{lines:?}");
        for (c, r) in circles {
            assert!((c.0.abs() - 1.0).abs() < 1e-12 && (c.1 + 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generators_preserve_the_packing() {
        let spec = PackingSpec::standard_bounded();
        let store = generate(&spec, GenerationCutoff::MaxCurvature(500.0)).unwrap();
        let pres = GroupPresentation::from_spec(&spec).unwrap();
        for r in pres.verify_on(&store).unwrap() {
            assert!(r.is_clean() && r.checked > 0, "{r:?}");
        }
    }

    #[test]
    fn sphere_presentation_is_involutive() {
        let spec = PackingSpec::Sphere3d {
            root: crate::inversive_geometry::standard_sphere_root(),
        };
        assert_eq!(GroupPresentation::from_sphere_spec(&spec).unwrap().rank(), 5);
        assert!(GroupPresentation::from_sphere_spec(&PackingSpec::strip()).is_err());
    }
}
