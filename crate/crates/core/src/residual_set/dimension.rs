use super::cover::{cantor_dust_cover, gap_covers, hausdorff_sum, GapCover};
use crate::conformal_metrics::{ConformalMetric, Region};
use crate::error::{Error, Result};
use crate::packing_generator::PackingSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSum {
    pub level: u32,
    pub s: f64,
    pub sum: f64,
}

/// Covering-sum dimension estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub dimension: f64,
    /// `sum diam^s` per level at `s = dimension`.
    pub sums: Vec<LevelSum>,
    /// `(s, slope of ln S_L(s) against L)` on a coarse grid of `s`.
    pub slope_curve: Vec<(f64, f64)>,
    /// Disk counts per level.
    pub disks: Vec<(u32, usize)>,
}

pub const MIN_LEVELS: usize = 4;
const S_BRACKET: (f64, f64) = (0.5, 2.5);

fn slope(covers: &[GapCover], s: f64) -> Result<f64> {
    let xs: Vec<f64> = covers.iter().map(|c| c.level as f64).collect();
    let ys: Vec<f64> = covers.iter().map(|c| hausdorff_sum(c, s).ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Domain("covering sums must be finite and positive".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Locates the `s` at which `ln S_L(s)` has zero slope in `L`.
pub fn dimension_from_covers(covers: &[GapCover]) -> Result<DimensionEstimate> {
    if covers.len() < MIN_LEVELS {
        return Err(Error::Config(format!(
            "need at least {MIN_LEVELS} levels, got {}",
            covers.len()
        )));
    }
    let mut levels: Vec<u32> = covers.iter().map(|c| c.level).collect();
    levels.dedup();
    if levels.len() != covers.len() {
        return Err(Error::Config("levels must be distinct".into()));
    }
    let (mut lo, mut hi) = S_BRACKET;
    let (f_lo, f_hi) = (slope(covers, lo)?, slope(covers, hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket(format!(
            "slope does not change sign on [{lo}, {hi}]: {f_lo:.4} .. {f_hi:.4}"
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if slope(covers, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dimension = 0.5 * (lo + hi);
    let slope_curve = (0..=20)
        .map(|k| {
            let s = S_BRACKET.0 + (S_BRACKET.1 - S_BRACKET.0) * k as f64 / 20.0;
            slope(covers, s).map(|v| (s, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DimensionEstimate {
        dimension,
        sums: covers
            .iter()
            .map(|c| LevelSum {
                level: c.level,
                s: dimension,
                sum: hausdorff_sum(c, dimension),
            })
            .collect(),
        slope_curve,
        disks: covers.iter().map(|c| (c.level, c.disks.len())).collect(),
    })
}

/// Dimension of `Res(P) ∩ E` from gap covers at the given levels (all >= 1).
pub fn estimate_dimension(spec: &PackingSpec, region: &Region, levels: &[u32]) -> Result<DimensionEstimate> {
    if levels.contains(&0) {
        return Err(Error::Config("level 0 contains unbounded gaps; use levels >= 1".into()));
    }
    dimension_from_covers(&gap_covers(spec, region, levels)?)
}

/// Control: the planar middle-thirds dust, of dimension `log 4 / log 3`.
pub fn cantor_dust_dimension(levels: &[u32]) -> Result<DimensionEstimate> {
    let covers: Vec<GapCover> = levels.iter().map(|&l| cantor_dust_cover(l)).collect();
    dimension_from_covers(&covers)
}

/// `sum f(center)^s diam^s`: a Riemann-sum estimate (from above) of
/// `H_f^s(Res ∩ E)`.
pub fn weighted_sum(cover: &GapCover, metric: &ConformalMetric, s: f64) -> Result<f64> {
    cover
        .disks
        .iter()
        .map(|d| Ok((metric.density(&[d.center.0, d.center.1])? * d.diameter).powf(s)))
        .sum()
}

/// Hurwitz zeta `sum_{m >= 0} (q + m)^-sigma` for `sigma > 1`, `q > 0`,
/// by Euler-Maclaurin summation.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    const N: usize = 12;
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    if !(sigma > 1.0) {
        return f64::INFINITY;
    }
    let mut sum: f64 = (0..N).map(|n| (q + n as f64).powf(-sigma)).sum();
    let a = q + N as f64;
    sum += a.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * a.powf(-sigma);
    let mut rising = sigma;
    let mut pow = a.powf(-sigma - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * rising * pow;
        let k = 2 * j as u32 + 1;
        rising *= (sigma + k as f64) * (sigma + k as f64 + 1.0);
        pow /= a * a;
    }
    sum
}

/// Estimate of `H_f^s(Res(P) ∩ E)` from the gap cover at `level`.
///
/// On the strip packing, regions unbounded above are handled through the
/// translation `z -> z + 2i`: a fundamental cover is summed over translates,
/// with the far translates of each disk summed in closed form for
/// `f = y^-k`. The result is infinite when `k s <= 1`.
pub fn estimate_weighted_measure(
    spec: &PackingSpec,
    region: &Region,
    metric: &ConformalMetric,
    s: f64,
    level: u32,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Config(format!("s must be positive, got {s}")));
    }
    if level == 0 {
        return Err(Error::Config("level 0 contains unbounded gaps; use levels >= 1".into()));
    }
    region.validate()?;
    if region.is_bounded() {
        let cover = gap_covers(spec, region, &[level])?.remove(0);
        return weighted_sum(&cover, metric, s);
    }
    if !matches!(spec, PackingSpec::StripP0 { .. }) {
        return Err(Error::Domain(format!("region {region} is unbounded")));
    }
    let k = match metric.height_exponent() {
        Some(k) if k > 0.0 => k,
        _ => return Err(Error::Domain(format!("{metric} has no closed-form tail on {region}"))),
    };
    let (x0, x1, y0, y1) = region.bounding_box();
    if !(x0.is_finite() && x1.is_finite() && y0 > 0.0 && y1 == f64::INFINITY) {
        return Err(Error::Domain(format!("unsupported unbounded region {region}")));
    }
    let period = Region::Rectangle {
        x0: -1.0,
        x1: 1.0,
        y0: -1.0,
        y1: 1.0,
    };
    let cover = gap_covers(spec, &period, &[level])?.remove(0);
    let fundamental: Vec<_> = cover.disks.iter().filter(|d| (-1.0..1.0).contains(&d.center.1)).collect();
    let sigma = k * s;
    if sigma <= 1.0 {
        return Ok(f64::INFINITY);
    }
    // past this height every translate of a fundamental disk meets the region
    let m_far = ((y0 + 4.0) / 2.0).ceil() as i64;
    let m_near = ((y0 - 4.0) / 2.0).floor() as i64;
    let mut total = 0.0;
    for d in fundamental {
        let r = d.diameter / 2.0;
        for m in m_near..m_far {
            let c = (d.center.0, d.center.1 + 2.0 * m as f64);
            if c.1 > 0.0 && region.meets_disk(c, r) {
                total += (metric.density(&[c.0, c.1])? * d.diameter).powf(s);
            }
        }
        let q = (d.center.1 + 2.0 * m_far as f64) / 2.0;
        total += d.diameter.powf(s) * 2f64.powf(-sigma) * hurwitz_zeta(sigma, q);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dust_dimension_is_exact() {
        let d = cantor_dust_dimension(&[2, 3, 4, 5, 6]).unwrap();
        assert!((d.dimension - 4f64.ln() / 3f64.ln()).abs() < 1e-9, "{d:?}");
    }

    #[test]
    fn hurwitz_matches_direct_sums() {
        let direct: f64 = (0..2_000_000).rev().map(|m| (0.3 + m as f64).powf(-3.0)).sum();
        assert!((hurwitz_zeta(3.0, 0.3) - direct).abs() < 1e-12);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((hurwitz_zeta(2.0, 1.0) - zeta2).abs() < 1e-14);
        assert!((hurwitz_zeta(1.3, 2.5) - hurwitz_zeta(1.3, 3.5) - 2.5f64.powf(-1.3)).abs() < 1e-14);
    }

    #[test]
    fn euclidean_weight_is_the_plain_sum() {
        let spec = PackingSpec::standard_bounded();
        let region = Region::Rectangle {
            x0: -0.5,
            x1: 0.5,
            y0: -0.5,
            y1: 0.5,
        };
        let cover = gap_covers(&spec, &region, &[6]).unwrap().remove(0);
        let w = weighted_sum(&cover, &ConformalMetric::Euclidean, 1.3).unwrap();
        assert_eq!(w, hausdorff_sum(&cover, 1.3));
    }
}
