use super::curve::{curve_for, selected_volumes, validity_floor, CountCurve, Prepared, Selector};
use super::fit::fit_power_law;
use crate::conformal_metrics::{ConformalMetric, Region};
use crate::error::{Error, Result};
use crate::packing_generator::PackingStore;

/// Circles of the ideal-triangle packing counted by hyperbolic area.
///
/// Members are the circles of the strip packing whose disks lie in
/// `{|x| <= 1, |z| >= 1, y > 0}`, together with the two vertical sides and the
/// unit circle, which have infinite area and are counted at every `t`.
pub fn ideal_triangle_count(store: &PackingStore, t_grid: &[f64]) -> Result<CountCurve> {
    ideal_triangle_curve(store, &ConformalMetric::Hyperbolic, t_grid)
}

/// As [`ideal_triangle_count`] for any decaying power-law metric.
pub fn ideal_triangle_curve(store: &PackingStore, metric: &ConformalMetric, t_grid: &[f64]) -> Result<CountCurve> {
    if store.strip_window().is_none() {
        return Err(Error::Domain("ideal-triangle counts need the strip packing".into()));
    }
    curve_for(store, metric, &Selector::IdealTriangle, t_grid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandRow {
    pub n: u32,
    /// `#F_t(E_n)`.
    pub count: u64,
    pub cumulative: u64,
    /// `#F_{t n^-2k}(E_1)`.
    pub comparison: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandTable {
    pub k: f64,
    pub t: f64,
    pub rows: Vec<BandRow>,
}

impl BandTable {
    pub fn cumulative_at(&self, n: u32) -> Option<u64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.cumulative)
    }

    /// Share of the last cumulative sum contributed by bands above `n`.
    pub fn tail_fraction_beyond(&self, n: u32) -> Option<f64> {
        let total = self.rows.last()?.cumulative as f64;
        let upto = self.cumulative_at(n)? as f64;
        (total > 0.0).then(|| (total - upto) / total)
    }

    /// Bands where `#F_t(E_n) > #F_{t n^-2k}(E_1)`.
    pub fn injection_violations(&self) -> Vec<u32> {
        self.rows.iter().filter(|r| r.count > r.comparison).map(|r| r.n).collect()
    }
}

fn band_metric(k: f64) -> ConformalMetric {
    if k == 1.0 {
        ConformalMetric::Hyperbolic
    } else {
        ConformalMetric::PowerLaw { k }
    }
}

/// Counts `#F_t(E_n)` of circles meeting the bands `E_n = {|x| <= 1,
/// n <= y <= n + 1}` under `f = y^-k`, with the comparison counts
/// `#F_{t n^-2k}(E_1)`.
///
/// The two vertical sides meet every band with infinite area; they are left
/// out so that sums over bands stay finite.
pub fn band_tail_experiment(store: &PackingStore, k: f64, t: f64, bands: std::ops::RangeInclusive<u32>) -> Result<BandTable> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Config(format!("band experiments need k > 0, got {k}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("threshold must be positive, got {t}")));
    }
    if *bands.start() < 1 || bands.is_empty() {
        return Err(Error::Config("bands start at n = 1".into()));
    }
    if store.strip_window().is_none() {
        return Err(Error::Domain("band experiments need the strip packing".into()));
    }
    let metric = band_metric(k);
    let n_max = *bands.end();
    let first = Selector::Meets(Region::Band { n: 1 });
    let t_comp_min = t * (n_max as f64).powf(-2.0 * k);
    let floor1 = validity_floor(store, &metric, &first)?;
    if t_comp_min < floor1 {
        return Err(Error::CutoffInsufficient(format!(
            "comparison threshold {t_comp_min:e} for band {n_max} is below the exactness floor {floor1:e}"
        )));
    }
    let finite = |v: Vec<f64>| v.into_iter().filter(|x| x.is_finite()).collect::<Vec<f64>>();
    let prep = Prepared::new(store)?;
    let e1 = finite(selected_volumes(&prep, &metric, &first, t_comp_min)?);
    let mut rows = Vec::new();
    let mut cumulative = 0;
    for n in bands {
        let sel = Selector::Meets(Region::Band { n });
        let floor = validity_floor(store, &metric, &sel)?;
        if t < floor {
            return Err(Error::CutoffInsufficient(format!(
                "threshold {t:e} is below the exactness floor {floor:e} of band {n}"
            )));
        }
        let count = finite(selected_volumes(&prep, &metric, &sel, t)?).len() as u64;
        cumulative += count;
        let tn = t * (n as f64).powf(-2.0 * k);
        let comparison = e1.partition_point(|v| *v > tn) as u64;
        rows.push(BandRow {
            n,
            count,
            cumulative,
            comparison,
        });
    }
    Ok(BandTable { k, t, rows })
}

/// Estimate of the Apollonian constant from a count curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CAEstimate {
    pub value: f64,
    /// `(t, N_t t^(alpha/2))` over the last valid decade.
    pub plateau: Vec<(f64, f64)>,
    pub plateau_level: f64,
    /// `d ln(N_t t^(alpha/2)) / d log10 t` over the plateau.
    pub relative_slope: f64,
    pub hausdorff: f64,
    pub alpha: f64,
    pub uncertainty: f64,
}

pub const PLATEAU_MIN_POINTS: usize = 4;

/// `c_A = lim N_t t^(alpha/2) / H_f^alpha(Res ∩ E)`, read off the last valid
/// decade of `curve`.
pub fn estimate_ca(curve: &CountCurve, hausdorff: f64, alpha: f64) -> Result<CAEstimate> {
    if !(hausdorff > 0.0 && hausdorff.is_finite()) {
        return Err(Error::Config(format!("Hausdorff estimate must be positive, got {hausdorff}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    let lo = curve.valid_points().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return Err(Error::CutoffInsufficient("no threshold inside the validity window".into()));
    }
    let plateau: Vec<(f64, f64)> = curve
        .valid_points()
        .filter(|p| p.0 <= lo * 10.0 * (1.0 + 1e-9))
        .map(|(t, n)| (t, n as f64 * t.powf(alpha / 2.0)))
        .collect();
    if plateau.len() < PLATEAU_MIN_POINTS || plateau.iter().any(|p| p.1 <= 0.0) {
        return Err(Error::NotConverged(format!(
            "{} usable points in the last decade, need {PLATEAU_MIN_POINTS}",
            plateau.len()
        )));
    }
    let xs: Vec<f64> = plateau.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = plateau.iter().map(|p| p.1).collect();
    // slope in ln-ln units, converted to per decade of t
    let (s, _, _) = fit_power_law(&xs, &ys)?;
    let relative_slope = s * std::f64::consts::LN_10;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let spread = (ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / ys.len() as f64).sqrt();
    if relative_slope.abs() >= crate::tolerance::TOL.plateau_slope {
        return Err(Error::NotConverged(format!(
            "no plateau: N_t t^(alpha/2) drifts by {relative_slope:.4} per decade (mean {mean:.6e}, spread {spread:.3e})"
        )));
    }
    let value = mean / hausdorff;
    let uncertainty = value * (spread / mean).max(relative_slope.abs());
    Ok(CAEstimate {
        value,
        plateau,
        plateau_level: mean,
        relative_slope,
        hausdorff,
        alpha,
        uncertainty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting_asymptotics::geometric_grid;
    use crate::packing_generator::{generate, GenerationCutoff, PackingSpec};

    #[test]
    fn synthetic_plateau_gives_exact_quotient() {
        let alpha = crate::counting_asymptotics::ALPHA;
        let grid = geometric_grid(1e-8, 1e-4, 16).unwrap();
        let pts = grid.iter().map(|&t| (t, (7.0 * t.powf(-alpha / 2.0)).round() as u64)).collect();
        let curve = CountCurve::from_points("synthetic", "none", pts).unwrap();
        let ca = estimate_ca(&curve, 2.0, alpha).unwrap();
        assert!((ca.value - 3.5).abs() < 1e-4, "{ca:?}");
    }

    #[test]
    fn drifting_curve_has_no_plateau() {
        let grid = geometric_grid(1e-8, 1e-4, 16).unwrap();
        let pts = grid.iter().map(|&t| (t, (7.0 * t.powf(-0.8)).round() as u64)).collect();
        let curve = CountCurve::from_points("synthetic", "none", pts).unwrap();
        assert!(matches!(estimate_ca(&curve, 1.0, 1.3), Err(Error::NotConverged(_))));
    }

    #[test]
    fn triangle_limit_is_the_three_sides() {
        let store = generate(&PackingSpec::strip(), GenerationCutoff::MaxCurvature(50.0)).unwrap();
        let curve = ideal_triangle_count(&store, &[1e3, 0.5]).unwrap();
        assert_eq!(curve.points[0].1, 3);
        // the next largest are the unit circles at heights 2 and 4
        let at2 = 2.0 * std::f64::consts::PI * (2.0 / 3f64.sqrt() - 1.0);
        assert!(at2 > 0.5);
        assert!(curve.points[1].1 >= 4);
    }

    #[test]
    fn band_table_is_consistent() {
        let store = generate(&PackingSpec::strip(), GenerationCutoff::MaxCurvature(200.0)).unwrap();
        let table = band_tail_experiment(&store, 1.0, 1e-2, 1..=6).unwrap();
        assert_eq!(table.rows.len(), 6);
        let total: u64 = table.rows.iter().map(|r| r.count).sum();
        assert_eq!(table.rows.last().unwrap().cumulative, total);
        assert_eq!(table.rows[0].count, table.rows[0].comparison);
    }
}
