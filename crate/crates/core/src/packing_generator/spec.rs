use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inversive_geometry::{
    bilinear, strip_root, DescartesQuadruple, DescartesQuintuple, DescartesTuple,
};

/// Largest common denominator searched when making a root exact.
pub const MAX_EXACT_DENOMINATOR: i64 = 4096;

/// Root of a dual cluster: four circles or five spheres.
#[derive(Clone, Debug, PartialEq)]
pub enum ClusterRoot {
    Circles(DescartesQuadruple<f64>),
    Spheres(DescartesQuintuple<f64>),
}

/// Which packing to generate.
#[derive(Clone, Debug, PartialEq)]
pub enum PackingSpec {
    /// Integral packing generated by exact 128-bit arithmetic.
    BoundedIntegral { root: DescartesQuadruple<i128> },
    /// The strip packing bounded by `x = +-1`, periodic under `z -> z + 2i`.
    /// Only circles with center height in `window` are kept.
    StripP0 { window: (f64, f64) },
    CustomFloat { root: DescartesQuadruple<f64> },
    Sphere3d { root: DescartesQuintuple<f64> },
    /// Orbit of the root spheres under inversions in the root spheres.
    DualCluster { root: ClusterRoot },
}

/// When to stop generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenerationCutoff {
    MaxCurvature(f64),
    MaxWordLength(u32),
    MaxCircles(u64),
}

impl GenerationCutoff {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GenerationCutoff::MaxCurvature(t) => t > 0.0 && t.is_finite(),
            GenerationCutoff::MaxWordLength(l) => l > 0,
            GenerationCutoff::MaxCircles(n) => n > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("cutoff must be positive: {self:?}")))
        }
    }

    pub fn kind_code(&self) -> u8 {
        match self {
            GenerationCutoff::MaxCurvature(_) => 0,
            GenerationCutoff::MaxWordLength(_) => 1,
            GenerationCutoff::MaxCircles(_) => 2,
        }
    }

    pub fn value_f64(&self) -> f64 {
        match *self {
            GenerationCutoff::MaxCurvature(t) => t,
            GenerationCutoff::MaxWordLength(l) => l as f64,
            GenerationCutoff::MaxCircles(n) => n as f64,
        }
    }

    pub fn from_code(code: u8, value: f64) -> Option<Self> {
        match code {
            0 => Some(GenerationCutoff::MaxCurvature(value)),
            1 => Some(GenerationCutoff::MaxWordLength(value as u32)),
            2 => Some(GenerationCutoff::MaxCircles(value as u64)),
            _ => None,
        }
    }

    pub fn max_curvature(&self) -> Option<f64> {
        match *self {
            GenerationCutoff::MaxCurvature(t) => Some(t),
            _ => None,
        }
    }
}

impl PackingSpec {
    pub fn strip() -> Self {
        PackingSpec::StripP0 { window: (-2.0, 2.0) }
    }

    pub fn standard_bounded() -> Self {
        PackingSpec::BoundedIntegral {
            root: crate::inversive_geometry::standard_bounded_root(),
        }
    }

    /// Ambient dimension n of the boundary (2 for circles, 3 for spheres).
    pub fn dim(&self) -> usize {
        match self {
            PackingSpec::Sphere3d { .. } => 3,
            PackingSpec::DualCluster {
                root: ClusterRoot::Spheres(_),
            } => 3,
            _ => 2,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            PackingSpec::BoundedIntegral { .. } | PackingSpec::StripP0 { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PackingSpec::BoundedIntegral { .. } => "bounded_integral",
            PackingSpec::StripP0 { .. } => "strip_p0",
            PackingSpec::CustomFloat { .. } => "custom_float",
            PackingSpec::Sphere3d { .. } => "sphere3d",
            PackingSpec::DualCluster { .. } => "dual_cluster",
        }
    }

    /// The exact root of an exact spec.
    pub fn exact_root(&self) -> Option<DescartesQuadruple<i128>> {
        match self {
            PackingSpec::BoundedIntegral { root } => Some(root.clone()),
            PackingSpec::StripP0 { .. } => Some(strip_root()),
            _ => None,
        }
    }

    /// The root circles as floats, for circle packings.
    pub fn circle_root(&self) -> Option<DescartesQuadruple<f64>> {
        match self {
            PackingSpec::BoundedIntegral { root } => Some(root.to_float()),
            PackingSpec::StripP0 { .. } => Some(strip_root().to_float()),
            PackingSpec::CustomFloat { root } => Some(root.clone()),
            PackingSpec::DualCluster {
                root: ClusterRoot::Circles(r),
            } => Some(r.clone()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PackingSpec::BoundedIntegral { root } => root.validate(),
            PackingSpec::StripP0 { window } => {
                if window.0 < window.1 && window.0.is_finite() && window.1.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("invalid strip window {window:?}")))
                }
            }
            PackingSpec::CustomFloat { root } => root.validate(),
            PackingSpec::Sphere3d { root } => root.validate(),
            PackingSpec::DualCluster { root } => match root {
                ClusterRoot::Circles(r) => validate_cluster(r),
                ClusterRoot::Spheres(r) => validate_cluster(r),
            },
        }
    }

    /// Canonical text form; its SHA-256 is the store fingerprint.
    pub fn descriptor(&self) -> String {
        match self {
            PackingSpec::BoundedIntegral { root } => {
                format!(
                    "bounded_integral scale={} root={}",
                    root.scale,
                    join_rows(root.members.iter().map(|m| {
                        m.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                    }))
                )
            }
            PackingSpec::StripP0 { window } => {
                format!("strip_p0 window={:?},{:?}", window.0, window.1)
            }
            PackingSpec::CustomFloat { root } => format!("custom_float root={}", float_rows(root)),
            PackingSpec::Sphere3d { root } => format!("sphere3d root={}", float_rows(root)),
            PackingSpec::DualCluster { root } => match root {
                ClusterRoot::Circles(r) => format!("dual_cluster n=2 root={}", float_rows(r)),
                ClusterRoot::Spheres(r) => format!("dual_cluster n=3 root={}", float_rows(r)),
            },
        }
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.descriptor().as_bytes()).into()
    }

    /// Inverse of [`PackingSpec::descriptor`].
    pub fn from_descriptor(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unparseable packing descriptor: {text}"));
        let mut parts = text.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let mut fields = std::collections::BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(bad)?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(bad);
        let spec = match kind {
            "bounded_integral" => {
                let scale: i128 = get("scale")?.parse().map_err(|_| bad())?;
                let rows = parse_rows::<i128>(get("root")?)?;
                let members: [[i128; 4]; 4] = rows_to_array(&rows).ok_or_else(bad)?;
                PackingSpec::BoundedIntegral {
                    root: DescartesTuple::from_scaled(members, scale)?,
                }
            }
            "strip_p0" => {
                let w = parse_list::<f64>(get("window")?)?;
                if w.len() != 2 {
                    return Err(bad());
                }
                PackingSpec::StripP0 { window: (w[0], w[1]) }
            }
            "custom_float" => PackingSpec::CustomFloat {
                root: float_tuple(get("root")?)?,
            },
            "sphere3d" => PackingSpec::Sphere3d {
                root: float_tuple(get("root")?)?,
            },
            "dual_cluster" => match get("n")? {
                "2" => PackingSpec::DualCluster {
                    root: ClusterRoot::Circles(float_tuple(get("root")?)?),
                },
                "3" => PackingSpec::DualCluster {
                    root: ClusterRoot::Spheres(float_tuple(get("root")?)?),
                },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn validate_cluster<const D: usize>(r: &DescartesTuple<f64, D>) -> Result<()> {
    r.validate()?;
    if (0..D).any(|i| r.curvature(i) <= 0.0) {
        return Err(Error::Config(
            "dual cluster roots must consist of bounded, positively oriented spheres".into(),
        ));
    }
    // members must be mutually tangent; the tuple check above covers it
    debug_assert!((bilinear(&r.members[0], &r.members[1]) + 1.0).abs() < 1e-6);
    Ok(())
}

fn join_rows(rows: impl Iterator<Item = Vec<String>>) -> String {
    rows.map(|r| r.join(",")).collect::<Vec<_>>().join(";")
}

fn float_rows<const D: usize>(t: &DescartesTuple<f64, D>) -> String {
    join_rows(
        t.members
            .iter()
            .map(|m| m.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>()),
    )
}

pub(crate) fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("cannot parse number '{x}'")))
        })
        .collect()
}

pub(crate) fn parse_rows<T: std::str::FromStr>(s: &str) -> Result<Vec<Vec<T>>> {
    s.split(';').map(parse_list).collect()
}

fn rows_to_array<T: Copy + Default, const D: usize>(rows: &[Vec<T>]) -> Option<[[T; D]; D]> {
    if rows.len() != D || rows.iter().any(|r| r.len() != D) {
        return None;
    }
    let mut out = [[T::default(); D]; D];
    for (o, r) in out.iter_mut().zip(rows) {
        o.copy_from_slice(r);
    }
    Some(out)
}

pub(crate) fn float_tuple<const D: usize>(s: &str) -> Result<DescartesTuple<f64, D>> {
    let rows = parse_rows::<f64>(s)?;
    let members = rows_to_array(&rows)
        .ok_or_else(|| Error::Config(format!("root needs {D} rows of {D} numbers")))?;
    let t = DescartesTuple {
        members,
        scale: 1.0,
        incoming: None,
    };
    t.validate()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversive_geometry::standard_sphere_root;

    #[test]
    fn descriptor_round_trip() {
        let specs = [
            PackingSpec::standard_bounded(),
            PackingSpec::strip(),
            PackingSpec::CustomFloat {
                root: crate::inversive_geometry::place_curvatures([-2.0, 3.0, 6.0, 7.0]).unwrap(),
            },
            PackingSpec::Sphere3d {
                root: standard_sphere_root(),
            },
        ];
        for s in specs {
            let back = PackingSpec::from_descriptor(&s.descriptor()).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.fingerprint(), s.fingerprint());
        }
    }

    #[test]
    fn cluster_needs_positive_curvatures() {
        let spec = PackingSpec::DualCluster {
            root: ClusterRoot::Circles(crate::inversive_geometry::standard_bounded_root().to_float()),
        };
        assert!(spec.validate().is_err());
    }
}
