use super::curve::CountCurve;
use crate::error::{Error, Result};
use crate::packing_generator::PackingStore;

/// Least-squares power law `N ~ C x^exponent` on a log-log window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub exponent: f64,
    /// `ln C`.
    pub log_constant: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

pub const MIN_FIT_POINTS: usize = 8;

/// Fits `ln y = c + s ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::Fit(format!("need at least 3 paired points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit("power-law fits need positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate window: all abscissae equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let stderr = (ssr / (n as f64 - 2.0) / sxx).sqrt();
    Ok((slope, intercept, stderr))
}

/// Default fit window: the two decades of valid thresholds closest to zero.
pub fn default_window(curve: &CountCurve) -> Result<(f64, f64)> {
    let lo = curve
        .valid_points()
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return Err(Error::CutoffInsufficient("no threshold inside the validity window".into()));
    }
    Ok((lo, lo * 100.0 * (1.0 + 1e-9)))
}

/// Exponent `s` in `N_t ~ C t^-s`, fitted over `window` (default: the two
/// smallest valid decades).
pub fn fit_exponent(curve: &CountCurve, window: Option<(f64, f64)>) -> Result<FitResult> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => default_window(curve)?,
    };
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Fit(format!("degenerate window [{lo}, {hi}]")));
    }
    if lo < curve.validity.0 || hi > curve.validity.1 {
        return Err(Error::Fit(format!(
            "window [{lo:e}, {hi:e}] leaves the validity window [{:e}, {:e}]",
            curve.validity.0, curve.validity.1
        )));
    }
    let pts: Vec<(f64, u64)> = curve.points.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} points in window, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    if pts.iter().any(|p| p.1 == 0) {
        return Err(Error::Fit("zero counts in window".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|p| 1.0 / p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
    let (exponent, log_constant, stderr) = fit_power_law(&xs, &ys)?;
    Ok(FitResult {
        exponent,
        log_constant,
        stderr,
        window: (lo, hi),
        n_points: pts.len(),
    })
}

/// `(x, #{S : 0 < b(S) <= x})` on a geometric grid of `x`.
pub fn curvature_counts(store: &PackingStore, x_lo: f64, x_hi: f64, per_decade: u32) -> Result<Vec<(f64, u64)>> {
    let t = store.max_curvature().ok_or_else(|| {
        Error::CutoffInsufficient("curvature counts need a curvature cutoff".into())
    })?;
    if x_hi > t {
        return Err(Error::OutOfCutoff {
            requested: x_hi,
            cutoff: t,
        });
    }
    let curv = store.positive_curvatures();
    let mut grid = super::curve::geometric_grid(x_lo, x_hi, per_decade)?;
    grid.reverse();
    Ok(grid
        .into_iter()
        .map(|x| (x, curv.partition_point(|b| *b <= x) as u64))
        .collect())
}

/// Growth exponent of `#{b <= x}` over `[x_lo, x_hi]`.
pub fn fit_curvature_growth(store: &PackingStore, x_lo: f64, x_hi: f64, per_decade: u32) -> Result<FitResult> {
    let pts = curvature_counts(store, x_lo, x_hi, per_decade)?;
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{} points in window, need {MIN_FIT_POINTS}", pts.len())));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
    let (exponent, log_constant, stderr) = fit_power_law(&xs, &ys)?;
    Ok(FitResult {
        exponent,
        log_constant,
        stderr,
        window: (x_lo, x_hi),
        n_points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting_asymptotics::geometric_grid;

    #[test]
    fn synthetic_power_law_is_recovered() {
        let grid = geometric_grid(1e-6, 1e-2, 16).unwrap();
        let pts: Vec<(f64, u64)> = grid.iter().map(|&t| (t, (3.0 * t.powf(-0.75)).round() as u64)).collect();
        let curve = CountCurve::from_points("synthetic", "none", pts).unwrap();
        let fit = fit_exponent(&curve, None).unwrap();
        assert!((fit.exponent - 0.75).abs() < 1e-4, "{fit:?}");
        assert_eq!(fit.n_points, 33);
    }

    #[test]
    fn exact_data_gives_exact_slope() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powf(1.3)).collect();
        let (s, c, e) = fit_power_law(&xs, &ys).unwrap();
        assert!((s - 1.3).abs() < 1e-12);
        assert!((c - 2.5f64.ln()).abs() < 1e-12);
        assert!(e < 1e-12);
    }

    #[test]
    fn short_windows_are_rejected() {
        let curve = CountCurve::from_points("s", "r", vec![(1.0, 1), (0.5, 2), (0.25, 4)]).unwrap();
        assert!(matches!(fit_exponent(&curve, None), Err(Error::Fit(_))));
    }
}
