use super::hyperbolic::{base_vector, vector_distance, HalfSpacePoint};
use super::poincare::LogSum;
use super::presentation::GroupPresentation;
use super::words::{reduced_word_count, walk};
use crate::counting_asymptotics::ALPHA;
use crate::error::{Error, Result};
use crate::residual_set::ResidualProximity;

/// Atom of a truncated Patterson measure at the orbit point `g o`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
    pub height: f64,
    pub weight: f64,
}

/// `nu_{x,s} = sum_g exp(-s d(x, g o)) delta_{g o} / sum_g exp(-s d(o, g o))`
/// over reduced words of length at most `length`, with `o = j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPattersonMeasure {
    pub s: f64,
    pub length: u32,
    pub base: HalfSpacePoint,
    pub observer: HalfSpacePoint,
    /// `ln sum_g exp(-s d(o, g o))`.
    pub log_normalizer: f64,
    /// Set when `s` does not exceed the critical exponent, where the
    /// truncation is dominated by the longest words.
    pub warning: Option<String>,
    /// Atoms in canonical word order.
    pub atoms: Vec<Atom>,
}

pub const MAX_ATOMS: u64 = 40_000_000;

impl TruncatedPattersonMeasure {
    /// Compensated sum of the weights.
    pub fn total_mass(&self) -> f64 {
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for a in &self.atoms {
            let t = sum + a.weight;
            c += if sum.abs() >= a.weight.abs() { (sum - t) + a.weight } else { (a.weight - t) + sum };
            sum = t;
        }
        sum + c
    }

    /// Mass of atoms whose boundary projection lies in the closed disk.
    pub fn ball_mass(&self, center: (f64, f64), r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.x - center.0).hypot(a.y - center.1) <= r)
            .map(|a| a.weight)
            .sum()
    }

    /// Mass of atoms whose boundary projection is within the proximity's
    /// distance of the residual set.
    pub fn mass_near(&self, near: &ResidualProximity) -> f64 {
        self.atoms.iter().filter(|a| near.is_near((a.x, a.y))).map(|a| a.weight).sum()
    }
}

pub fn patterson_truncated(
    pres: &GroupPresentation<4>,
    observer: &HalfSpacePoint,
    s: f64,
    length: u32,
) -> Result<TruncatedPattersonMeasure> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Config(format!("exponent s must be positive, got {s}")));
    }
    let n = reduced_word_count(pres.rank(), length);
    if n > MAX_ATOMS {
        return Err(Error::Config(format!("{n} atoms exceed the limit {MAX_ATOMS}")));
    }
    let o = base_vector::<4>();
    let xv = observer.to_vector::<4>()?;
    let same = *observer == HalfSpacePoint::base(2);
    // atoms carry -s d(x, g o) in `weight` until normalized
    let parts = walk(
        pres.rank(),
        length,
        o,
        |k, v| pres.reflect(k, v),
        || (Vec::new(), LogSum::EMPTY),
        |acc: &mut (Vec<Atom>, LogSum), _, v| {
            let h = 1.0 / v[0];
            let lo = -s * vector_distance(&o, v);
            acc.1.add(lo);
            acc.0.push(Atom {
                x: v[2] * h,
                y: v[3] * h,
                height: h,
                weight: if same { lo } else { -s * vector_distance(&xv, v) },
            });
        },
    );
    let mut z = LogSum::EMPTY;
    let mut atoms = Vec::with_capacity(n as usize);
    for (a, l) in parts {
        z.merge(&l);
        atoms.extend(a);
    }
    let log_normalizer = z.ln();
    for a in atoms.iter_mut() {
        a.weight = (a.weight - log_normalizer).exp();
    }
    let warning = (s <= ALPHA).then(|| {
        format!("s = {s} does not exceed the critical exponent {ALPHA}; mass is dominated by the truncation frontier")
    });
    Ok(TruncatedPattersonMeasure {
        s,
        length,
        base: HalfSpacePoint::base(2),
        observer: observer.clone(),
        log_normalizer,
        warning,
        atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing_generator::PackingSpec;

    #[test]
    fn base_point_mass_is_one() {
        let pres = GroupPresentation::from_spec(&PackingSpec::strip()).unwrap();
        let nu = patterson_truncated(&pres, &HalfSpacePoint::base(2), 1.35, 6).unwrap();
        assert!((nu.total_mass() - 1.0).abs() < 1e-13);
        assert!(nu.warning.is_none());
        assert_eq!(nu.atoms.len() as u64, reduced_word_count(4, 6));
        assert!(nu.atoms.iter().all(|a| a.weight > 0.0 && a.height > 0.0));
        assert!(patterson_truncated(&pres, &HalfSpacePoint::base(2), 1.2, 2).unwrap().warning.is_some());
    }

    #[test]
    fn moving_the_observer_rescales_atoms() {
        let pres = GroupPresentation::from_spec(&PackingSpec::standard_bounded()).unwrap();
        let x = HalfSpacePoint::new(vec![0.1, 0.2], 0.5).unwrap();
        let nu = patterson_truncated(&pres, &HalfSpacePoint::base(2), 1.4, 4).unwrap();
        let mu = patterson_truncated(&pres, &x, 1.4, 4).unwrap();
        let d = crate::group_orbits::hyperbolic_distance(&x, &HalfSpacePoint::base(2));
        for (a, b) in nu.atoms.iter().zip(&mu.atoms) {
            let r = b.weight / a.weight;
            // exp(-s d(x, p)) / exp(-s d(o, p)) lies within exp(+-s d(o, x))
            assert!(r <= (1.4 * d).exp() * (1.0 + 1e-12) && r >= (-1.4 * d).exp() * (1.0 - 1e-12));
        }
    }
}
