use std::collections::HashMap;

use rayon::prelude::*;

use super::hyperbolic::{base_vector, vector_distance, HalfSpacePoint};
use super::presentation::GroupPresentation;
use crate::error::{Error, Result};
use crate::inversive_geometry::MobiusMap;

/// Generator indices with no two consecutive letters equal; the word
/// `[i1, ..., iL]` is the map `s_i1 ∘ ... ∘ s_iL`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(Vec<u8>);

impl ReducedWord {
    pub fn new(letters: Vec<u8>, rank: usize) -> Result<Self> {
        if letters.iter().any(|&l| l as usize >= rank) {
            return Err(Error::Domain(format!("letter out of range for {rank} generators: {letters:?}")));
        }
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("word is not reduced: {letters:?}")));
        }
        Ok(Self(letters))
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn to_map<const D: usize>(&self, pres: &GroupPresentation<D>) -> MobiusMap<D> {
        self.0
            .iter()
            .fold(MobiusMap::identity(), |acc, &l| acc.compose(&pres.generators[l as usize]))
    }
}

impl std::fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Number of reduced words of length at most `max_len` on `rank` letters.
pub fn reduced_word_count(rank: usize, max_len: u32) -> u64 {
    let mut total = 1u64;
    let mut layer = 1u64;
    for l in 1..=max_len {
        layer *= if l == 1 { rank as u64 } else { rank as u64 - 1 };
        total += layer;
    }
    total
}

const SPLIT_DEPTH: u32 = 3;

/// Depth-first walk over all reduced words of length `<= max_len`, built by
/// prepending letters: the state of `k . w` is `step(k, state(w))`.
///
/// Words shorter than the split depth are visited into the first
/// accumulator; each subtree below is visited into its own, in a fixed order
/// independent of the thread count.
pub(crate) fn walk<S, A, Step, Init, Visit>(
    rank: usize,
    max_len: u32,
    root: S,
    step: Step,
    init: Init,
    visit: Visit,
) -> Vec<A>
where
    S: Copy + Send + Sync,
    A: Send,
    Step: Fn(usize, &S) -> S + Sync,
    Init: Fn() -> A + Sync,
    Visit: Fn(&mut A, &[u8], &S) + Sync,
{
    // buffers hold the word reversed: last pushed letter is the leftmost
    fn rec<S: Copy, A>(
        rank: usize,
        remaining: u32,
        state: &S,
        buf: &mut Vec<u8>,
        acc: &mut A,
        step: &(impl Fn(usize, &S) -> S + ?Sized),
        visit: &(impl Fn(&mut A, &[u8], &S) + ?Sized),
    ) {
        visit(acc, buf, state);
        if remaining == 0 {
            return;
        }
        let first = buf.last().copied();
        for k in 0..rank {
            if Some(k as u8) == first {
                continue;
            }
            let next = step(k, state);
            buf.push(k as u8);
            rec(rank, remaining - 1, &next, buf, acc, step, visit);
            buf.pop();
        }
    }

    let split = SPLIT_DEPTH.min(max_len);
    let mut head = init();
    let mut frontier: Vec<(Vec<u8>, S)> = vec![(Vec::new(), root)];
    for _ in 0..split {
        let mut next = Vec::new();
        for (buf, state) in &frontier {
            visit(&mut head, buf, state);
            for k in 0..rank {
                if buf.last() == Some(&(k as u8)) {
                    continue;
                }
                let mut b = buf.clone();
                b.push(k as u8);
                next.push((b, step(k, state)));
            }
        }
        frontier = next;
    }
    let rest: Vec<A> = frontier
        .into_par_iter()
        .map(|(mut buf, state)| {
            let mut acc = init();
            rec(rank, max_len - split, &state, &mut buf, &mut acc, &step, &visit);
            acc
        })
        .collect();
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.push(head);
    out.extend(rest);
    out
}

/// All reduced words of length `<= max_len` with their maps, shortest first
/// and lexicographic within a length, together with the number of distinct
/// group elements among them (matrices compared after rounding).
#[derive(Clone, Debug)]
pub struct WordEnumeration<const D: usize> {
    pub words: Vec<(ReducedWord, MobiusMap<D>)>,
    pub distinct_elements: usize,
}

impl<const D: usize> WordEnumeration<D> {
    pub fn collisions(&self) -> usize {
        self.words.len() - self.distinct_elements
    }
}

/// Rounding grid, relative to the largest matrix entry, for element dedup.
const DEDUP_RELATIVE: f64 = 1e-7;

pub fn enumerate_words<const D: usize>(pres: &GroupPresentation<D>, max_len: u32) -> Result<WordEnumeration<D>> {
    let total = reduced_word_count(pres.rank(), max_len);
    if total > 20_000_000 {
        return Err(Error::Config(format!("{total} words is too many to materialize")));
    }
    let gens = &pres.generators;
    let parts = walk(
        pres.rank(),
        max_len,
        MobiusMap::<D>::identity(),
        |k, m| gens[k].compose(m),
        Vec::new,
        |acc: &mut Vec<(ReducedWord, MobiusMap<D>)>, buf, m| {
            acc.push((ReducedWord(buf.iter().rev().copied().collect()), *m));
        },
    );
    let mut words: Vec<(ReducedWord, MobiusMap<D>)> = parts.into_iter().flatten().collect();
    words.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::with_capacity(words.len());
    for (i, (_, m)) in words.iter().enumerate() {
        let scale = m.m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        let step = scale * DEDUP_RELATIVE;
        let mut key: Vec<i64> = m.m.iter().flatten().map(|x| (x / step).round() as i64).collect();
        key.push(m.anticonformal as i64);
        seen.entry(key).or_insert(i);
    }
    Ok(WordEnumeration {
        distinct_elements: seen.len(),
        words,
    })
}

/// An orbit point `g j` with its word and `d(j, g j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub point: HalfSpacePoint,
    pub word: ReducedWord,
    pub displacement: f64,
}

/// The orbit of `j` under all reduced words of length `<= max_len`, shortest
/// words first.
pub fn orbit_points<const D: usize>(pres: &GroupPresentation<D>, max_len: u32) -> Result<Vec<OrbitPoint>> {
    let total = reduced_word_count(pres.rank(), max_len);
    if total > 20_000_000 {
        return Err(Error::Config(format!("{total} orbit points is too many to materialize")));
    }
    let j = base_vector::<D>();
    let parts = walk(
        pres.rank(),
        max_len,
        j,
        |k, v| pres.reflect(k, v),
        Vec::new,
        |acc: &mut Vec<OrbitPoint>, buf, v| {
            acc.push(OrbitPoint {
                point: HalfSpacePoint::from_vector(v),
                word: ReducedWord(buf.iter().rev().copied().collect()),
                displacement: vector_distance(&j, v),
            })
        },
    );
    let mut pts: Vec<OrbitPoint> = parts.into_iter().flatten().collect();
    pts.sort_by(|a, b| a.word.len().cmp(&b.word.len()).then_with(|| a.word.cmp(&b.word)));
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_orbits::displacement;
    use crate::packing_generator::PackingSpec;

    fn strip() -> GroupPresentation<4> {
        GroupPresentation::from_spec(&PackingSpec::strip()).unwrap()
    }

    #[test]
    fn word_counts() {
        let pres = strip();
        assert_eq!(enumerate_words(&pres, 0).unwrap().words.len(), 1);
        let one = enumerate_words(&pres, 1).unwrap();
        assert_eq!(one.words.iter().filter(|w| w.0.len() == 1).count(), 4);
        let two = enumerate_words(&pres, 2).unwrap();
        assert_eq!(two.words.iter().filter(|w| w.0.len() >= 1).count(), 16);
        assert_eq!(reduced_word_count(4, 2), 17);
    }

    #[test]
    fn no_collisions_up_to_eight() {
        for pres in [strip(), GroupPresentation::from_spec(&PackingSpec::standard_bounded()).unwrap()] {
            let e = enumerate_words(&pres, 8).unwrap();
            assert_eq!(e.words.len() as u64, reduced_word_count(4, 8));
            assert_eq!(e.collisions(), 0);
        }
    }

    #[test]
    fn orbit_points_match_composed_maps() {
        let pres = GroupPresentation::from_spec(&PackingSpec::standard_bounded()).unwrap();
        let words = enumerate_words(&pres, 5).unwrap().words;
        let pts = orbit_points(&pres, 5).unwrap();
        assert_eq!(words.len(), pts.len());
        for ((w, m), p) in words.iter().zip(&pts) {
            assert_eq!(w, &p.word);
            assert!((displacement(m) - p.displacement).abs() < 1e-10 * (1.0 + p.displacement));
            assert!((displacement(&m.inverse()) - p.displacement).abs() < 1e-10 * (1.0 + p.displacement));
            assert!(p.point.height > 0.0);
        }
        assert_eq!(pts[0].displacement, 0.0);
    }

    #[test]
    fn word_validation() {
        assert!(ReducedWord::new(vec![0, 1, 1], 4).is_err());
        assert!(ReducedWord::new(vec![0, 4], 4).is_err());
        let w = ReducedWord::new(vec![0, 2, 1], 4).unwrap();
        assert_eq!(w.inverse().letters(), &[1, 2, 0]);
        assert_eq!(w.to_string(), "0.2.1");
        let pres = strip();
        assert!(w.to_map(&pres).compose(&w.inverse().to_map(&pres)).distance_from_identity() < 1e-12);
    }
}
