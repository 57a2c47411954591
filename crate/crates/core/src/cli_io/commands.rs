use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{Arithmetic, CountMode, DimSet, ExperimentConfig, FitSource, OrbitMode};
use super::output::{fmt_f64, sha256_hex, Csv, RunManifest, RunOutput};
use crate::counting_asymptotics::{
    band_tail_experiment, count_curve, estimate_ca, fit_curvature_growth, fit_exponent, geometric_grid,
    ideal_triangle_curve, CountCurve, FitResult,
};
use crate::error::{Error, Result};
use crate::group_orbits::{
    fit_norm_growth, norm_ball_data, patterson_truncated, poincare_series, GroupPresentation, HalfSpacePoint,
};
use crate::inversive_geometry::OrientedCircle;
use crate::packing_generator::{generate, load_expecting, save, GenerationCutoff, PackingSpec, PackingStore};
use crate::residual_set::{cantor_dust_dimension, estimate_dimension, estimate_weighted_measure, DimensionEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gen,
    Count,
    Fit,
    Dim,
    Ca,
    Orbit,
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Count => "count",
            Command::Fit => "fit",
            Command::Dim => "dim",
            Command::Ca => "ca",
            Command::Orbit => "orbit",
            Command::Render => "render",
        }
    }
}

fn cutoff_tag(c: &GenerationCutoff) -> String {
    match c {
        GenerationCutoff::MaxCurvature(t) => format!("curvature-{t:e}"),
        GenerationCutoff::MaxWordLength(l) => format!("words-{l}"),
        GenerationCutoff::MaxCircles(n) => format!("circles-{n}"),
    }
}

/// Cache file holding the store for `spec` truncated at `cutoff`.
pub fn cache_path(root: &Path, spec: &PackingSpec, cutoff: &GenerationCutoff) -> PathBuf {
    let fp = hex::encode(spec.fingerprint());
    root.join(format!("{}-{}.apkg", &fp[..16], cutoff_tag(cutoff)))
}

fn load_store(cfg: &ExperimentConfig, spec: &PackingSpec) -> Result<PackingStore> {
    let path = cache_path(&cfg.cache_root(), spec, &cfg.cutoff);
    if !path.exists() {
        return Err(Error::Config(format!(
            "no cached packing at {}; run `gen` with the same packing and cutoff first",
            path.display()
        )));
    }
    let store = load_expecting(&path, Some(spec), Some(cfg.arithmetic == Arithmetic::Exact))?;
    if store.cutoff != cfg.cutoff {
        return Err(Error::Config(format!(
            "cache {} holds cutoff {:?}, config asks for {:?}",
            path.display(),
            store.cutoff,
            cfg.cutoff
        )));
    }
    Ok(store)
}

fn fit_row(csv: &mut Csv, f: &FitResult) {
    csv.row(&[
        fmt_f64(f.exponent),
        fmt_f64(f.stderr),
        fmt_f64(f.log_constant.exp()),
        fmt_f64(f.window.0),
        fmt_f64(f.window.1),
        f.n_points.to_string(),
    ]);
}

const FIT_HEADER: [&str; 6] = ["exponent", "stderr", "const", "x_lo", "x_hi", "n_points"];

fn curve_csv(curve: &CountCurve) -> Csv {
    let mut csv = Csv::new(&["t", "count", "valid"]);
    let (lo, hi) = curve.validity;
    for &(t, n) in &curve.points {
        let valid = t >= lo && t <= hi;
        csv.row(&[fmt_f64(t), n.to_string(), u8::from(valid).to_string()]);
    }
    csv
}

/// Reads a `t,count[,valid]` table, dropping rows marked invalid.
pub fn read_count_csv(path: &Path) -> Result<CountCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read counts {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (ti, ni) = match (col("t"), col("count")) {
        (Some(t), Some(n)) => (t, n),
        _ => return Err(Error::Config(format!("{}: header needs 't' and 'count'", path.display()))),
    };
    let vi = col("valid");
    let mut points = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("{}: malformed row {}", path.display(), k + 2));
        let t: f64 = cells.get(ti).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let n: u64 = cells.get(ni).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if vi.map_or(true, |v| cells.get(v) == Some(&"1")) {
            points.push((t, n));
        }
    }
    CountCurve::from_points("input", &path.display().to_string(), points)
}

fn level_list(cfg: &ExperimentConfig) -> Vec<u32> {
    (cfg.levels.0..=cfg.levels.1).collect()
}

fn dimension_csv(est: &DimensionEstimate) -> (Csv, Csv) {
    let mut sums = Csv::new(&["level", "s", "sum", "disks"]);
    for (ls, (_, n)) in est.sums.iter().zip(&est.disks) {
        sums.row(&[ls.level.to_string(), fmt_f64(ls.s), fmt_f64(ls.sum), n.to_string()]);
    }
    let mut slopes = Csv::new(&["s", "slope"]);
    for (s, k) in &est.slope_curve {
        slopes.row(&[fmt_f64(*s), fmt_f64(*k)]);
    }
    (sums, slopes)
}

fn svg_circle(out: &mut String, c: &OrientedCircle, cfg: &ExperimentConfig, label: Option<String>) {
    let (x0, x1, y0, y1) = cfg.viewport;
    let scale = cfg.width as f64 / (x1 - x0);
    let px = |x: f64| fmt_px((x - x0) * scale);
    let py = |y: f64| fmt_px((y1 - y) * scale);
    match (c.center(), c.radius()) {
        (Some((x, y)), Some(r)) => {
            let d = (x.clamp(x0, x1) - x).hypot(y.clamp(y0, y1) - y);
            let corner = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
                .iter()
                .map(|(a, b)| (a - x).hypot(b - y))
                .fold(0.0, f64::max);
            if d > r || corner < r {
                return;
            }
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                px(x),
                py(y),
                fmt_px(r * scale)
            );
            if let Some(text) = label {
                if r * scale >= 8.0 {
                    let size = (r * scale * 0.6).min(48.0);
                    let _ = writeln!(
                        out,
                        "<text x=\"{}\" y=\"{}\" font-size=\"{}\">{text}</text>",
                        px(x),
                        py(y),
                        fmt_px(size)
                    );
                }
            }
        }
        _ => {
            let (nx, ny) = (c.v[2], c.v[3]);
            let h = c.v[1] / 2.0;
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            let half = (x1 - x0).hypot(y1 - y0) / 2.0;
            if (cx * nx + cy * ny - h).abs() > half {
                return;
            }
            let s = cx * -ny + cy * nx;
            let at = |t: f64| (h * nx - ny * t, h * ny + nx * t);
            let (a, b) = (at(s - half), at(s + half));
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                px(a.0),
                py(a.1),
                px(b.0),
                py(b.1)
            );
        }
    }
}

fn fmt_px(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn render_svg(store: &PackingStore, cfg: &ExperimentConfig) -> Result<String> {
    if store.dim() != 2 {
        return Err(Error::Domain("only circle packings can be rendered".into()));
    }
    let (x0, x1, y0, y1) = cfg.viewport;
    let w = cfg.width as f64;
    let h = w * (y1 - y0) / (x1 - x0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt_px(w),
        fmt_px(h),
        fmt_px(w),
        fmt_px(h)
    );
    out.push_str("<g fill=\"none\" stroke=\"black\" stroke-width=\"0.5\">\n");
    let labels = cfg.labels && store.is_exact();
    let mut text = String::new();
    for i in 0..store.len() {
        let c = store.circle(i).expect("circle store");
        let label = labels.then(|| format!("{}", store.curvature(i).round() as i64));
        let mut piece = String::new();
        svg_circle(&mut piece, &c, cfg, label);
        // text goes after the outlines so that it is drawn on top
        for line in piece.lines() {
            if line.starts_with("<text") {
                text.push_str(line);
                text.push('\n');
            } else {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out.push_str("</g>\n");
    if !text.is_empty() {
        out.push_str("<g font-family=\"sans-serif\" text-anchor=\"middle\" dominant-baseline=\"central\">\n");
        out.push_str(&text);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn orbit_presentation_4(spec: &PackingSpec) -> Result<GroupPresentation<4>> {
    if spec.dim() != 2 {
        return Err(Error::Domain("this orbit experiment needs a circle packing".into()));
    }
    GroupPresentation::from_spec(spec)
}

fn run_orbit(cfg: &ExperimentConfig, spec: &PackingSpec, out: &mut RunOutput) -> Result<()> {
    match cfg.orbit {
        OrbitMode::Poincare => {
            let mut csv = Csv::new(&["s", "L", "sum", "increment"]);
            for &s in &cfg.s_values {
                let series = if spec.dim() == 3 {
                    poincare_series(&GroupPresentation::<5>::from_sphere_spec(spec)?, s, cfg.length)?
                } else {
                    poincare_series(&GroupPresentation::<4>::from_spec(spec)?, s, cfg.length)?
                };
                for r in &series.rows {
                    csv.row(&[
                        fmt_f64(s),
                        r.length.to_string(),
                        fmt_f64(r.log_partial.exp()),
                        fmt_f64(r.log_increment.exp()),
                    ]);
                }
            }
            out.write_csv("poincare.csv", &csv)?;
        }
        OrbitMode::Patterson => {
            let pres = orbit_presentation_4(spec)?;
            let (x, y, h) = cfg.observer;
            let observer = HalfSpacePoint::new(vec![x, y], h)?;
            for &s in &cfg.s_values {
                let nu = patterson_truncated(&pres, &observer, s, cfg.length)?;
                let mut csv = Csv::new(&["x", "y", "height", "weight"]);
                for a in &nu.atoms {
                    csv.row(&[fmt_f64(a.x), fmt_f64(a.y), fmt_f64(a.height), fmt_f64(a.weight)]);
                }
                out.write_csv(&format!("patterson_s{}.csv", fmt_f64(s)), &csv)?;
                out.note(format!("s = {s}: total mass {}", fmt_f64(nu.total_mass())));
                if let Some(w) = nu.warning {
                    eprintln!("warning: {w}");
                    out.note(w);
                }
            }
        }
        OrbitMode::NormBall => {
            let pres = orbit_presentation_4(spec)?;
            let data = norm_ball_data(&pres, cfg.length)?;
            let mut csv = Csv::new(&["T", "count"]);
            if cfg.norm_t_min < data.saturation {
                let grid = geometric_grid(cfg.norm_t_min, data.saturation * (1.0 - 1e-9), cfg.per_decade)?;
                for &t in grid.iter().rev() {
                    csv.row(&[fmt_f64(t), data.count(t).to_string()]);
                }
            }
            out.write_csv("norm_ball.csv", &csv)?;
            out.note(format!(
                "counts exact below norm {}; bridge error {}",
                fmt_f64(data.saturation),
                fmt_f64(data.bridge_error)
            ));
            match fit_norm_growth(&data, cfg.norm_t_min, cfg.per_decade) {
                Ok(f) => {
                    let mut fit = Csv::new(&FIT_HEADER);
                    fit_row(&mut fit, &f);
                    out.write_csv("norm_ball_fit.csv", &fit)?;
                }
                Err(e) => out.note(format!("no growth fit: {e}")),
            }
        }
    }
    Ok(())
}

fn run_inner(cmd: Command, cfg: &ExperimentConfig) -> Result<RunManifest> {
    let spec = cfg.spec()?;
    let resolved = cfg.resolved();
    let mut out = RunOutput::new(&cfg.output, cmd.name(), &resolved, spec.descriptor());
    let write_fit = |out: &mut RunOutput, name: &str, f: &FitResult| -> Result<()> {
        let mut csv = Csv::new(&FIT_HEADER);
        fit_row(&mut csv, f);
        out.write_csv(name, &csv)?;
        Ok(())
    };
    match cmd {
        Command::Gen => {
            let store = generate(&spec, cfg.cutoff)?;
            let root = cfg.cache_root();
            std::fs::create_dir_all(&root)?;
            let path = cache_path(&root, &spec, &cfg.cutoff);
            save(&store, &path)?;
            out.set_fingerprint(store.fingerprint());
            let s = store.stats;
            let mut csv = Csv::new(&["circles", "levels", "peak_frontier", "nodes_expanded", "dedup_hits", "pruned"]);
            csv.row(&[
                store.len().to_string(),
                s.levels.to_string(),
                s.peak_frontier.to_string(),
                s.nodes_expanded.to_string(),
                s.dedup_hits.to_string(),
                s.pruned.to_string(),
            ]);
            out.write_csv("gen.csv", &csv)?;
            let bytes = std::fs::read(&path)?;
            out.note(format!("cache file sha256 {}", sha256_hex(&bytes)));
        }
        Command::Count => {
            let store = load_store(cfg, &spec)?;
            out.set_fingerprint(store.fingerprint());
            match cfg.count_mode {
                CountMode::Bands => {
                    let table = band_tail_experiment(&store, cfg.band_k, cfg.band_t, cfg.bands.0..=cfg.bands.1)?;
                    let mut csv = Csv::new(&["n", "count", "cumulative", "comparison"]);
                    for r in &table.rows {
                        csv.row(&[
                            r.n.to_string(),
                            r.count.to_string(),
                            r.cumulative.to_string(),
                            r.comparison.to_string(),
                        ]);
                    }
                    out.write_csv("bands.csv", &csv)?;
                    let bad = table.injection_violations();
                    if !bad.is_empty() {
                        out.note(format!("bands exceeding the comparison count: {bad:?}"));
                    }
                }
                mode => {
                    let grid = geometric_grid(cfg.t_min, cfg.t_max, cfg.per_decade)?;
                    let curve = if mode == CountMode::IdealTriangle {
                        ideal_triangle_curve(&store, &cfg.metric, &grid)?
                    } else {
                        count_curve(&store, &cfg.metric, &cfg.region, &grid)?
                    };
                    out.write_csv("count.csv", &curve_csv(&curve))?;
                    out.note(format!(
                        "counts exact for t in [{}, {}]",
                        fmt_f64(curve.validity.0),
                        fmt_f64(curve.validity.1)
                    ));
                    match fit_exponent(&curve, cfg.fit_window) {
                        Ok(f) => write_fit(&mut out, "count_fit.csv", &f)?,
                        Err(e) => out.note(format!("no fit: {e}")),
                    }
                }
            }
        }
        Command::Fit => {
            let f = match cfg.fit_source {
                FitSource::Curvature => {
                    let store = load_store(cfg, &spec)?;
                    out.set_fingerprint(store.fingerprint());
                    fit_curvature_growth(&store, cfg.x_min, cfg.x_max, cfg.per_decade)?
                }
                FitSource::Counts => {
                    let path = cfg
                        .input
                        .as_ref()
                        .ok_or_else(|| Error::Config("fit_source = counts needs input = <csv>".into()))?;
                    fit_exponent(&read_count_csv(path)?, cfg.fit_window)?
                }
            };
            write_fit(&mut out, "fit.csv", &f)?;
        }
        Command::Dim => {
            let levels = level_list(cfg);
            let est = match cfg.dim_set {
                DimSet::Packing => estimate_dimension(&spec, &cfg.region, &levels)?,
                DimSet::CantorDust => cantor_dust_dimension(&levels)?,
            };
            let (sums, slopes) = dimension_csv(&est);
            out.write_csv("dim_levels.csv", &sums)?;
            out.write_csv("dim_slopes.csv", &slopes)?;
            let mut csv = Csv::new(&["dimension"]);
            csv.row(&[fmt_f64(est.dimension)]);
            out.write_csv("dim.csv", &csv)?;
        }
        Command::Ca => {
            let store = load_store(cfg, &spec)?;
            out.set_fingerprint(store.fingerprint());
            let grid = geometric_grid(cfg.t_min, cfg.t_max, cfg.per_decade)?;
            let curve = count_curve(&store, &cfg.metric, &cfg.region, &grid)?;
            let h = estimate_weighted_measure(&spec, &cfg.region, &cfg.metric, cfg.alpha, cfg.cover_level)?;
            let est = estimate_ca(&curve, h, cfg.alpha)?;
            let mut csv = Csv::new(&["c_a", "uncertainty", "hausdorff", "alpha", "plateau_level", "relative_slope"]);
            csv.row(&[
                fmt_f64(est.value),
                fmt_f64(est.uncertainty),
                fmt_f64(est.hausdorff),
                fmt_f64(est.alpha),
                fmt_f64(est.plateau_level),
                fmt_f64(est.relative_slope),
            ]);
            out.write_csv("ca.csv", &csv)?;
            let mut plateau = Csv::new(&["t", "scaled_count"]);
            for (t, y) in &est.plateau {
                plateau.row(&[fmt_f64(*t), fmt_f64(*y)]);
            }
            out.write_csv("ca_plateau.csv", &plateau)?;
        }
        Command::Orbit => run_orbit(cfg, &spec, &mut out)?,
        Command::Render => {
            let store = load_store(cfg, &spec)?;
            out.set_fingerprint(store.fingerprint());
            if cfg.labels && !store.is_exact() {
                out.note("labels are drawn only for exact stores");
            }
            let svg = render_svg(&store, cfg)?;
            out.write("render.svg", svg.as_bytes())?;
        }
    }
    out.finish()
}

/// Runs one command with `cfg.workers` threads (0 for the default).
pub fn run_command(cmd: Command, cfg: &ExperimentConfig) -> Result<RunManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| run_inner(cmd, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path, text: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::parse(text, &[]).unwrap();
        c.cache_dir = Some(dir.join("cache"));
        c.output = dir.join("out");
        c
    }

    #[test]
    fn count_needs_a_cache() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "cutoff = curvature:50");
        let e = run_command(Command::Count, &c).unwrap_err();
        assert_eq!(e.category().exit_code(), 1);
        run_command(Command::Gen, &c).unwrap();
        let m = run_command(Command::Count, &c).unwrap();
        assert!(m.results.iter().any(|r| r.file == "count.csv"));
    }

    #[test]
    fn render_labels_exact_curvatures() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "cutoff = curvature:20\nviewport = -1.1,1.1,-1.1,1.1");
        run_command(Command::Gen, &c).unwrap();
        run_command(Command::Render, &c).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("out/render.svg")).unwrap();
        assert!(svg.contains(">2</text>") && svg.contains(">3</text>") && svg.contains(">-1</text>"));
        let n = svg.matches("<circle").count();
        let store = generate(&PackingSpec::standard_bounded(), GenerationCutoff::MaxCurvature(20.0)).unwrap();
        assert_eq!(n, store.len());
    }

    #[test]
    fn strip_render_draws_lines() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            dir.path(),
            "packing = strip\ncutoff = curvature:10\nviewport = -1.5,1.5,-1,1\nlabels = off",
        );
        run_command(Command::Gen, &c).unwrap();
        run_command(Command::Render, &c).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("out/render.svg")).unwrap();
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(!svg.contains("<text"));
    }

    #[test]
    fn counts_csv_round_trips_into_fit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let mut csv = Csv::new(&["t", "count", "valid"]);
        for k in 0..20 {
            let t = 10f64.powf(-(k as f64) / 4.0);
            csv.row(&[fmt_f64(t), ((100.0 * t.powf(-0.6)).round() as u64).to_string(), "1".into()]);
        }
        csv.row(&[fmt_f64(1e-9), "1".into(), "0".into()]);
        std::fs::write(&path, csv.as_str()).unwrap();
        let curve = read_count_csv(&path).unwrap();
        assert_eq!(curve.points.len(), 20);
        let f = fit_exponent(&curve, None).unwrap();
        assert!((f.exponent - 0.6).abs() < 0.01, "{f:?}");
    }
}
