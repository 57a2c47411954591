use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::conformal_metrics::{ConformalMetric, Region};
use crate::counting_asymptotics::ALPHA;
use crate::error::{Error, Result};
use crate::inversive_geometry::{place_curvatures, standard_sphere_root, DescartesTuple};
use crate::packing_generator::{ClusterRoot, GenerationCutoff, PackingSpec, MAX_EXACT_DENOMINATOR};

/// Environment variable naming the packing cache directory.
pub const CACHE_DIR_ENV: &str = "APOLLONIAN_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Curve,
    IdealTriangle,
    Bands,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitSource {
    Curvature,
    Counts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimSet {
    Packing,
    CantorDust,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitMode {
    Poincare,
    Patterson,
    NormBall,
}

/// Every knob of every command, read from a flat `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub packing: String,
    pub arithmetic: Arithmetic,
    pub cutoff: GenerationCutoff,
    pub metric: ConformalMetric,
    pub region: Region,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: u32,
    pub fit_window: Option<(f64, f64)>,
    pub count_mode: CountMode,
    pub band_k: f64,
    pub band_t: f64,
    pub bands: (u32, u32),
    pub fit_source: FitSource,
    pub input: Option<PathBuf>,
    pub x_min: f64,
    pub x_max: f64,
    pub dim_set: DimSet,
    pub levels: (u32, u32),
    pub alpha: f64,
    pub cover_level: u32,
    pub orbit: OrbitMode,
    pub s_values: Vec<f64>,
    pub length: u32,
    pub observer: (f64, f64, f64),
    pub norm_t_min: f64,
    pub viewport: (f64, f64, f64, f64),
    pub width: u32,
    pub labels: bool,
    pub output: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub workers: usize,
}

/// Keys that locate a run rather than define it; they are left out of the
/// resolved config and its hash.
const RUN_KEYS: [&str; 3] = ["output", "cache_dir", "workers"];

const KEYS: [&str; 32] = [
    "packing",
    "arithmetic",
    "cutoff",
    "metric",
    "region",
    "t_min",
    "t_max",
    "per_decade",
    "fit_window",
    "count_mode",
    "band_k",
    "band_t",
    "bands",
    "fit_source",
    "input",
    "x_min",
    "x_max",
    "dim_set",
    "levels",
    "alpha",
    "cover_level",
    "orbit",
    "s",
    "length",
    "observer",
    "norm_t_min",
    "viewport",
    "width",
    "labels",
    "output",
    "cache_dir",
    "workers",
];

fn defaults() -> BTreeMap<&'static str, String> {
    let pairs = [
        ("packing", "bounded"),
        ("arithmetic", "exact"),
        ("cutoff", "curvature:1000"),
        ("metric", "euclidean"),
        ("region", "disk:0,0,1"),
        ("t_min", "1e-6"),
        ("t_max", "1e-1"),
        ("per_decade", "16"),
        ("fit_window", "auto"),
        ("count_mode", "curve"),
        ("band_k", "1"),
        ("band_t", "1e-4"),
        ("bands", "1..100"),
        ("fit_source", "curvature"),
        ("input", "none"),
        ("x_min", "100"),
        ("x_max", "1000"),
        ("dim_set", "packing"),
        ("levels", "4..12"),
        ("alpha", ""),
        ("cover_level", "14"),
        ("orbit", "poincare"),
        ("s", "1.35"),
        ("length", "10"),
        ("observer", "0,0,1"),
        ("norm_t_min", "2"),
        ("viewport", "-1,1,-1,1"),
        ("width", "800"),
        ("labels", "auto"),
        ("output", "results"),
        ("cache_dir", "auto"),
        ("workers", "0"),
    ];
    let mut m: BTreeMap<&'static str, String> = pairs.iter().map(|(k, v)| (*k, v.to_string())).collect();
    m.insert("alpha", format!("{ALPHA}"));
    m
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn floats(key: &str, v: &str, n: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = v.split(',').map(|x| num::<f64>(key, x)).collect::<Result<_>>()?;
    if xs.len() != n {
        return Err(Error::Config(format!("{key}: expected {n} comma-separated numbers, got '{v}'")));
    }
    Ok(xs)
}

fn range(key: &str, v: &str) -> Result<(u32, u32)> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| Error::Config(format!("{key}: expected 'lo..hi', got '{v}'")))?;
    let (a, b) = (num::<u32>(key, a)?, num::<u32>(key, b)?);
    if a > b {
        return Err(Error::Config(format!("{key}: empty range {v}")));
    }
    Ok((a, b))
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|(n, _)| *n == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        Error::Config(format!("{key}: '{v}' is not one of {}", names.join(", ")))
    })
}

fn parse_cutoff(v: &str) -> Result<GenerationCutoff> {
    let (kind, val) = v
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("cutoff: expected 'kind:value', got '{v}'")))?;
    let c = match kind {
        "curvature" => GenerationCutoff::MaxCurvature(num("cutoff", val)?),
        "word_length" => GenerationCutoff::MaxWordLength(num("cutoff", val)?),
        "circles" => GenerationCutoff::MaxCircles(num("cutoff", val)?),
        _ => return Err(Error::Config(format!("cutoff: unknown kind '{kind}'"))),
    };
    c.validate()?;
    Ok(c)
}

impl ExperimentConfig {
    /// Parses a config file's text; later `overrides` replace file values.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut given: BTreeMap<String, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            let k = k.trim().to_string();
            if given.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
        }
        for (k, v) in overrides {
            given.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut values = defaults();
        for (k, v) in given {
            let key = KEYS
                .iter()
                .find(|known| **known == k)
                .ok_or_else(|| Error::Config(format!("unknown key '{k}'")))?;
            values.insert(key, v);
        }
        Self::from_values(&values)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    fn from_values(v: &BTreeMap<&'static str, String>) -> Result<Self> {
        let g = |k: &str| v[k].as_str();
        let fit_window = match g("fit_window") {
            "auto" => None,
            w => {
                let xs = floats("fit_window", w, 2)?;
                Some((xs[0], xs[1]))
            }
        };
        let observer = floats("observer", g("observer"), 3)?;
        let viewport = floats("viewport", g("viewport"), 4)?;
        let s_values: Vec<f64> = g("s").split(',').map(|x| num("s", x)).collect::<Result<_>>()?;
        let cfg = Self {
            packing: g("packing").to_string(),
            arithmetic: choice("arithmetic", g("arithmetic"), &[("exact", Arithmetic::Exact), ("float", Arithmetic::Float)])?,
            cutoff: parse_cutoff(g("cutoff"))?,
            metric: g("metric").parse()?,
            region: g("region").parse()?,
            t_min: num("t_min", g("t_min"))?,
            t_max: num("t_max", g("t_max"))?,
            per_decade: num("per_decade", g("per_decade"))?,
            fit_window,
            count_mode: choice(
                "count_mode",
                g("count_mode"),
                &[
                    ("curve", CountMode::Curve),
                    ("ideal_triangle", CountMode::IdealTriangle),
                    ("bands", CountMode::Bands),
                ],
            )?,
            band_k: num("band_k", g("band_k"))?,
            band_t: num("band_t", g("band_t"))?,
            bands: range("bands", g("bands"))?,
            fit_source: choice(
                "fit_source",
                g("fit_source"),
                &[("curvature", FitSource::Curvature), ("counts", FitSource::Counts)],
            )?,
            input: match g("input") {
                "none" => None,
                p => Some(PathBuf::from(p)),
            },
            x_min: num("x_min", g("x_min"))?,
            x_max: num("x_max", g("x_max"))?,
            dim_set: choice(
                "dim_set",
                g("dim_set"),
                &[("packing", DimSet::Packing), ("cantor_dust", DimSet::CantorDust)],
            )?,
            levels: range("levels", g("levels"))?,
            alpha: num("alpha", g("alpha"))?,
            cover_level: num("cover_level", g("cover_level"))?,
            orbit: choice(
                "orbit",
                g("orbit"),
                &[
                    ("poincare", OrbitMode::Poincare),
                    ("patterson", OrbitMode::Patterson),
                    ("norm_ball", OrbitMode::NormBall),
                ],
            )?,
            s_values,
            length: num("length", g("length"))?,
            observer: (observer[0], observer[1], observer[2]),
            norm_t_min: num("norm_t_min", g("norm_t_min"))?,
            viewport: (viewport[0], viewport[1], viewport[2], viewport[3]),
            width: num("width", g("width"))?,
            labels: match g("labels") {
                "auto" => true,
                "off" => false,
                other => return Err(Error::Config(format!("labels: expected 'auto' or 'off', got '{other}'"))),
            },
            output: PathBuf::from(g("output")),
            cache_dir: match g("cache_dir") {
                "auto" => None,
                p => Some(PathBuf::from(p)),
            },
            workers: num("workers", g("workers"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = |k: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{k} must be positive and finite, got {x}")))
            }
        };
        positive("t_min", self.t_min)?;
        positive("t_max", self.t_max)?;
        positive("x_min", self.x_min)?;
        positive("x_max", self.x_max)?;
        positive("band_k", self.band_k)?;
        positive("band_t", self.band_t)?;
        positive("alpha", self.alpha)?;
        positive("norm_t_min", self.norm_t_min)?;
        for s in &self.s_values {
            positive("s", *s)?;
        }
        if self.t_min >= self.t_max || self.x_min >= self.x_max {
            return Err(Error::Config("threshold ranges must have min < max".into()));
        }
        if self.per_decade == 0 || self.width == 0 {
            return Err(Error::Config("per_decade and width must be positive".into()));
        }
        if self.observer.2 <= 0.0 {
            return Err(Error::Config("observer height must be positive".into()));
        }
        let (x0, x1, y0, y1) = self.viewport;
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Config("viewport must be 'x0,x1,y0,y1' with x0 < x1, y0 < y1".into()));
        }
        self.region.validate()?;
        self.spec()?;
        Ok(())
    }

    /// The packing named by `packing` in the requested arithmetic.
    ///
    /// Names: `bounded`, `strip`, `strip:y0,y1`, `sphere`,
    /// `curvatures:b1,b2,b3,b4` (a placed root), `dual_cluster:b1,b2,b3,b4`,
    /// `dual_cluster_sphere`, or a full descriptor.
    pub fn spec(&self) -> Result<PackingSpec> {
        let exact = self.arithmetic == Arithmetic::Exact;
        let p = self.packing.as_str();
        let (name, arg) = p.split_once(':').map_or((p, None), |(a, b)| (a, Some(b)));
        let float_only = |s: PackingSpec| {
            if exact {
                Err(Error::Config(format!("packing '{p}' has no exact mode; set arithmetic = float")))
            } else {
                Ok(s)
            }
        };
        match (name, arg) {
            ("bounded", None) => {
                let s = PackingSpec::standard_bounded();
                if exact {
                    Ok(s)
                } else {
                    Ok(PackingSpec::CustomFloat {
                        root: s.exact_root().unwrap().to_float(),
                    })
                }
            }
            ("strip", None) => Ok(PackingSpec::strip()),
            ("strip", Some(w)) => {
                let w = floats("packing", w, 2)?;
                let s = PackingSpec::StripP0 { window: (w[0], w[1]) };
                s.validate()?;
                Ok(s)
            }
            ("sphere", None) => float_only(PackingSpec::Sphere3d {
                root: standard_sphere_root(),
            }),
            ("curvatures", Some(b)) => {
                let b = floats("packing", b, 4)?;
                let root = place_curvatures([b[0], b[1], b[2], b[3]])?;
                if exact {
                    Ok(PackingSpec::BoundedIntegral {
                        root: DescartesTuple::exact_from_float(&root, MAX_EXACT_DENOMINATOR)?,
                    })
                } else {
                    Ok(PackingSpec::CustomFloat { root })
                }
            }
            ("dual_cluster", Some(b)) => {
                let b = floats("packing", b, 4)?;
                let s = PackingSpec::DualCluster {
                    root: ClusterRoot::Circles(place_curvatures([b[0], b[1], b[2], b[3]])?),
                };
                s.validate()?;
                float_only(s)
            }
            _ => {
                let s = PackingSpec::from_descriptor(p)
                    .map_err(|_| Error::Config(format!("packing: unknown packing '{p}'")))?;
                if exact && !s.is_exact() {
                    return float_only(s);
                }
                Ok(s)
            }
        }
    }

    /// Canonical `key = value` text of the experiment knobs.
    pub fn resolved(&self) -> String {
        let mut out = String::new();
        let opt = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let f = |x: f64| format!("{x:?}");
        let pairs: Vec<(&str, String)> = vec![
            ("packing", self.packing.clone()),
            (
                "arithmetic",
                match self.arithmetic {
                    Arithmetic::Exact => "exact".into(),
                    Arithmetic::Float => "float".into(),
                },
            ),
            (
                "cutoff",
                match self.cutoff {
                    GenerationCutoff::MaxCurvature(t) => format!("curvature:{}", f(t)),
                    GenerationCutoff::MaxWordLength(l) => format!("word_length:{l}"),
                    GenerationCutoff::MaxCircles(n) => format!("circles:{n}"),
                },
            ),
            ("metric", self.metric.to_string()),
            ("region", self.region.to_string()),
            ("t_min", f(self.t_min)),
            ("t_max", f(self.t_max)),
            ("per_decade", self.per_decade.to_string()),
            (
                "fit_window",
                self.fit_window.map_or("auto".into(), |(a, b)| format!("{},{}", f(a), f(b))),
            ),
            (
                "count_mode",
                match self.count_mode {
                    CountMode::Curve => "curve".into(),
                    CountMode::IdealTriangle => "ideal_triangle".into(),
                    CountMode::Bands => "bands".into(),
                },
            ),
            ("band_k", f(self.band_k)),
            ("band_t", f(self.band_t)),
            ("bands", format!("{}..{}", self.bands.0, self.bands.1)),
            (
                "fit_source",
                match self.fit_source {
                    FitSource::Curvature => "curvature".into(),
                    FitSource::Counts => "counts".into(),
                },
            ),
            ("input", opt(&self.input)),
            ("x_min", f(self.x_min)),
            ("x_max", f(self.x_max)),
            (
                "dim_set",
                match self.dim_set {
                    DimSet::Packing => "packing".into(),
                    DimSet::CantorDust => "cantor_dust".into(),
                },
            ),
            ("levels", format!("{}..{}", self.levels.0, self.levels.1)),
            ("alpha", f(self.alpha)),
            ("cover_level", self.cover_level.to_string()),
            (
                "orbit",
                match self.orbit {
                    OrbitMode::Poincare => "poincare".into(),
                    OrbitMode::Patterson => "patterson".into(),
                    OrbitMode::NormBall => "norm_ball".into(),
                },
            ),
            ("s", self.s_values.iter().map(|s| f(*s)).collect::<Vec<_>>().join(",")),
            ("length", self.length.to_string()),
            (
                "observer",
                format!("{},{},{}", f(self.observer.0), f(self.observer.1), f(self.observer.2)),
            ),
            ("norm_t_min", f(self.norm_t_min)),
            (
                "viewport",
                format!(
                    "{},{},{},{}",
                    f(self.viewport.0),
                    f(self.viewport.1),
                    f(self.viewport.2),
                    f(self.viewport.3)
                ),
            ),
            ("width", self.width.to_string()),
            ("labels", if self.labels { "auto".into() } else { "off".into() }),
        ];
        debug_assert_eq!(pairs.len() + RUN_KEYS.len(), KEYS.len());
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Cache directory: `cache_dir`, else the environment variable, else
    /// `.apollonian-cache`.
    pub fn cache_root(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".apollonian-cache"))
    }
}
