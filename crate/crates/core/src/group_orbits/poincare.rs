use super::hyperbolic::{base_vector, vector_distance};
use super::presentation::GroupPresentation;
use super::words::walk;
use crate::error::{Error, Result};

/// A sum of exponentials held as `max + ln(sum of exp(x - max))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    pub(crate) const EMPTY: LogSum = LogSum {
        max: f64::NEG_INFINITY,
        scaled: 0.0,
    };

    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub(crate) fn merge(&mut self, o: &LogSum) {
        if o.scaled == 0.0 {
            return;
        }
        if o.max <= self.max {
            self.scaled += o.scaled * (o.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - o.max).exp() + o.scaled;
            self.max = o.max;
        }
    }

    pub(crate) fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareRow {
    pub length: u32,
    /// `ln` of the sum over words of exactly this length.
    pub log_increment: f64,
    /// `ln` of the sum over words of length at most this.
    pub log_partial: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareSeries {
    pub s: f64,
    pub rows: Vec<PoincareRow>,
}

impl PoincareSeries {
    pub fn partial(&self, length: u32) -> Option<f64> {
        self.rows.get(length as usize).map(|r| r.log_partial.exp())
    }

    /// `increment(L) / increment(L - 1)` for `L >= 2`.
    pub fn increment_ratios(&self) -> Vec<(u32, f64)> {
        self.rows
            .windows(2)
            .filter(|w| w[0].length >= 1)
            .map(|w| (w[1].length, (w[1].log_increment - w[0].log_increment).exp()))
            .collect()
    }
}

/// Partial sums of `sum exp(-s d(j, g j))` over reduced words, by length.
pub fn poincare_series<const D: usize>(pres: &GroupPresentation<D>, s: f64, max_len: u32) -> Result<PoincareSeries> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Config(format!("exponent s must be positive, got {s}")));
    }
    let j = base_vector::<D>();
    let n = max_len as usize + 1;
    let parts = walk(
        pres.rank(),
        max_len,
        j,
        |k, v| pres.reflect(k, v),
        || vec![LogSum::EMPTY; n],
        |acc: &mut Vec<LogSum>, buf, v| acc[buf.len()].add(-s * vector_distance(&j, v)),
    );
    let mut per_len = vec![LogSum::EMPTY; n];
    for p in &parts {
        for (a, b) in per_len.iter_mut().zip(p) {
            a.merge(b);
        }
    }
    let mut total = LogSum::EMPTY;
    let rows = per_len
        .iter()
        .enumerate()
        .map(|(l, inc)| {
            total.merge(inc);
            PoincareRow {
                length: l as u32,
                log_increment: inc.ln(),
                log_partial: total.ln(),
            }
        })
        .collect();
    Ok(PoincareSeries { s, rows })
}

/// `sum_{|w| <= L} exp(-s d(j, w j))`.
pub fn poincare_partial<const D: usize>(pres: &GroupPresentation<D>, s: f64, max_len: u32) -> Result<f64> {
    let series = poincare_series(pres, s, max_len)?;
    Ok(series.rows.last().map_or(1.0, |r| r.log_partial.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::PackingSpec;

    #[test]
    fn log_sum_matches_direct_sum() {
        let xs = [-3.0, 2.5, -0.5, 700.0, 1.0];
        let mut a = LogSum::EMPTY;
        let mut b = LogSum::EMPTY;
        for (i, x) in xs.iter().enumerate() {
            if i % 2 == 0 { a.add(*x) } else { b.add(*x) }
        }
        a.merge(&b);
        let direct = 700.0 + xs.iter().map(|x| (x - 700.0).exp()).sum::<f64>().ln();
        assert!((a.ln() - direct).abs() < 1e-12);
        assert_eq!(LogSum::EMPTY.ln(), f64::NEG_INFINITY);
    }

    #[test]
    fn partials_start_at_one_and_increase() {
        let pres = GroupPresentation::from_spec(&PackingSpec::strip()).unwrap();
        assert_eq!(poincare_partial(&pres, 1.5, 0).unwrap(), 1.0);
        let series = poincare_series(&pres, 1.5, 6).unwrap();
        for w in series.rows.windows(2) {
            assert!(w[1].log_partial > w[0].log_partial);
        }
        // the mirror y = 0 passes through j
        assert!(series.rows[1].log_increment > 0.0);
    }
}
