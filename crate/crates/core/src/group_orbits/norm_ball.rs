use num_complex::Complex64;

use super::hyperbolic::{base_vector, vector_distance};
use super::presentation::GroupPresentation;
use super::words::{reduced_word_count, walk};
use crate::counting_asymptotics::{fit_power_law, FitResult, MIN_FIT_POINTS};
use crate::error::{Error, Result};
use crate::inversive_geometry::{Oriented, CURV};
use crate::tolerance::TOL;

type Mat2 = [[Complex64; 2]; 2];

/// Matrix `M` of the inversion `z -> M . conj(z)`, with `det M = -1`.
fn inversion_matrix(c: &Oriented<4>) -> Mat2 {
    let b = c.v[CURV];
    let one = Complex64::new(1.0, 0.0);
    if b.abs() > 1e-12 {
        let (x, y) = (c.v[2] / b, c.v[3] / b);
        let r = 1.0 / b.abs();
        let z = Complex64::new(x, y);
        let k = 1.0 / r;
        [[z * k, Complex64::new((r * r - x * x - y * y) * k, 0.0)], [one * k, -z.conj() * k]]
    } else {
        // line {p . n = h}: z -> -n^2 conj(z) + 2 h n, scaled by 1/n
        let n = Complex64::new(c.v[2], c.v[3]);
        let h = c.v[1] / 2.0;
        [[-n, Complex64::new(2.0 * h, 0.0)], [Complex64::new(0.0, 0.0), n.conj()]]
    }
}

fn mul_conj(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j].conj() + a[i][1] * b[1][j].conj();
        }
    }
    c
}

fn frobenius2(m: &Mat2) -> f64 {
    m.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// Frobenius norms of the orientation-preserving elements of word length
/// at most `max_len`, with the bridge identity checked on each.
#[derive(Clone, Debug, PartialEq)]
pub struct NormBallData {
    pub max_len: u32,
    /// Sorted ascending.
    pub norms: Vec<f64>,
    /// Counts are exact below this norm: the smallest norm among the
    /// longest enumerated even words.
    pub saturation: f64,
    /// Largest `|‖g‖_F^2 - 2 cosh d(j, g j)| / ‖g‖_F^2` seen.
    pub bridge_error: f64,
}

impl NormBallData {
    /// `#{g : ‖g‖_F <= t}`.
    pub fn count(&self, t: f64) -> u64 {
        self.norms.partition_point(|n| *n <= t) as u64
    }
}

/// Even reduced words up to `max_len` as 2x2 complex matrices.
pub fn norm_ball_data(pres: &GroupPresentation<4>, max_len: u32) -> Result<NormBallData> {
    if max_len < 2 {
        return Err(Error::Config("norm balls need words of length at least 2".into()));
    }
    let max_len = max_len - max_len % 2;
    let n = reduced_word_count(pres.rank(), max_len);
    if n > 40_000_000 {
        return Err(Error::Config(format!("{n} words is too many")));
    }
    let mats: Vec<Mat2> = pres.mirrors.iter().map(inversion_matrix).collect();
    let id = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let j = base_vector::<4>();
    struct Acc {
        norms: Vec<f64>,
        frontier_min: f64,
        err: f64,
    }
    let parts = walk(
        pres.rank(),
        max_len,
        (id, j),
        |k, (m, v)| (mul_conj(&mats[k], m), pres.reflect(k, v)),
        || Acc {
            norms: Vec::new(),
            frontier_min: f64::INFINITY,
            err: 0.0,
        },
        |acc: &mut Acc, buf, (m, v)| {
            if buf.len() % 2 != 0 {
                return;
            }
            let f2 = frobenius2(m);
            let d = vector_distance(&j, v);
            acc.err = acc.err.max((f2 - 2.0 * d.cosh()).abs() / f2);
            let f = f2.sqrt();
            acc.norms.push(f);
            if buf.len() as u32 == max_len {
                acc.frontier_min = acc.frontier_min.min(f);
            }
        },
    );
    let mut norms = Vec::new();
    let mut saturation = f64::INFINITY;
    let mut bridge_error = 0.0f64;
    for p in parts {
        norms.extend(p.norms);
        saturation = saturation.min(p.frontier_min);
        bridge_error = bridge_error.max(p.err);
    }
    if !(bridge_error <= TOL.bridge) {
        return Err(Error::Invariant(format!(
            "Frobenius norm and displacement disagree: relative error {bridge_error:e}"
        )));
    }
    norms.sort_by(f64::total_cmp);
    Ok(NormBallData {
        max_len,
        norms,
        saturation,
        bridge_error,
    })
}

/// `#{g even, |g| <= max_len : ‖g‖_F <= t}`; errors when `t` is past the
/// saturation norm.
pub fn norm_ball_count(pres: &GroupPresentation<4>, t: f64, max_len: u32) -> Result<u64> {
    let data = norm_ball_data(pres, max_len)?;
    if t >= data.saturation {
        return Err(Error::CutoffInsufficient(format!(
            "norm {t} is past the reach {} of words of length {}",
            data.saturation, data.max_len
        )));
    }
    Ok(data.count(t))
}

/// Exponent of `#{‖g‖_F <= T} ~ C T^e` over `[t_lo, saturation)`.
pub fn fit_norm_growth(data: &NormBallData, t_lo: f64, per_decade: u32) -> Result<FitResult> {
    let t_hi = data.saturation * (1.0 - 1e-9);
    if !(t_lo > 0.0 && t_lo < t_hi) {
        return Err(Error::Fit(format!("empty window [{t_lo}, {t_hi}]")));
    }
    let grid = crate::counting_asymptotics::geometric_grid(t_lo, t_hi, per_decade)?;
    let xs: Vec<f64> = grid.iter().rev().copied().collect();
    let ys: Vec<f64> = xs.iter().map(|&t| data.count(t) as f64).collect();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{} points in window, need {MIN_FIT_POINTS}", xs.len())));
    }
    let (exponent, log_constant, stderr) = fit_power_law(&xs, &ys)?;
    Ok(FitResult {
        exponent,
        log_constant,
        stderr,
        window: (t_lo, t_hi),
        n_points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::PackingSpec;

    fn det(m: &Mat2) -> Complex64 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[test]
    fn inversion_matrices_act_as_inversions() {
        let pres = GroupPresentation::from_spec(&PackingSpec::strip()).unwrap();
        for (c, m) in pres.mirrors.iter().zip(pres.mirrors.iter().map(inversion_matrix)) {
            assert!((det(&m) + 1.0).norm() < 1e-14);
            // points of the mirror are fixed
            let p = match c.center() {
                Some((x, y)) => Complex64::new(x + 1.0 / c.v[0].abs(), y),
                None => Complex64::new(c.v[2], c.v[3]) * (c.v[1] / 2.0) + Complex64::new(-c.v[3], c.v[2]) * 0.7,
            };
            let z = p.conj();
            let img = (m[0][0] * z + m[0][1]) / (m[1][0] * z + m[1][1]);
            assert!((img - p).norm() < 1e-13, "{c:?}");
        }
    }

    #[test]
    fn identity_and_monotone_counts() {
        let pres = GroupPresentation::from_spec(&PackingSpec::strip()).unwrap();
        let data = norm_ball_data(&pres, 6).unwrap();
        assert_eq!(data.count(2f64.sqrt() * (1.0 + 1e-9)), 1);
        assert!(data.bridge_error < 1e-12);
        let mut last = 0;
        for k in 0..50 {
            let c = data.count(1.0 + 0.2 * k as f64);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(data.norms.len() as u64, 1 + 12 + 12 * 9 + 12 * 81);
        assert!(norm_ball_count(&pres, data.saturation * 2.0, 6).is_err());
    }
}
