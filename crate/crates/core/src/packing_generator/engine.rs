//! Breadth-first growth of Descartes-tuple trees and dual-cluster trees.

use rayon::prelude::*;

use super::fxhash::{FxHashMap, FxHashSet};
use crate::error::{Error, Result};
use crate::inversive_geometry::{bilinear, reflect_coords, Coord, CURV};

/// Frontier nodes expanded per parallel batch; bounds transient memory.
const BATCH: usize = 1 << 16;

/// Counters collected during generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenerationStats {
    pub levels: u32,
    pub peak_frontier: u64,
    pub nodes_expanded: u64,
    pub dedup_hits: u64,
    pub pruned: u64,
}

/// Dedup index from quantized coordinates to record ids.
pub(crate) struct KeyIndex<const D: usize> {
    map: FxHashMap<[i64; D], u32>,
    step: f64,
}

/// Key computation for a coordinate scalar.
pub(crate) trait Keyed: Coord {
    /// Candidate keys, primary first; exact scalars have a single key.
    fn keys<const D: usize>(v: &[Self; D], step: f64, out: &mut Vec<[i64; D]>) -> Result<()>;
}

impl Keyed for i128 {
    fn keys<const D: usize>(v: &[Self; D], _step: f64, out: &mut Vec<[i64; D]>) -> Result<()> {
        let mut k = [0i64; D];
        for (o, x) in k.iter_mut().zip(v) {
            *o = i64::try_from(*x)
                .map_err(|_| Error::Overflow("coordinate exceeds the 64-bit key width".into()))?;
        }
        out.push(k);
        Ok(())
    }
}

impl Keyed for f64 {
    fn keys<const D: usize>(v: &[Self; D], step: f64, out: &mut Vec<[i64; D]>) -> Result<()> {
        let mut base = [0i64; D];
        let mut alt = [0i64; D];
        let mut ambiguous = 0u32;
        for c in 0..D {
            let q = v[c] / step;
            if !q.is_finite() || q.abs() > 9.0e18 {
                return Err(Error::Overflow("coordinate exceeds the float key range".into()));
            }
            let r = q.round();
            base[c] = r as i64;
            let frac = q - r;
            if frac.abs() > 0.35 {
                ambiguous |= 1 << c;
                alt[c] = if frac > 0.0 { base[c] + 1 } else { base[c] - 1 };
            }
        }
        out.push(base);
        let mut mask = ambiguous;
        // enumerate nonempty submasks of the ambiguous coordinates
        while mask != 0 {
            let mut k = base;
            for c in 0..D {
                if mask & (1 << c) != 0 {
                    k[c] = alt[c];
                }
            }
            out.push(k);
            mask = (mask - 1) & ambiguous;
        }
        Ok(())
    }
}

impl<const D: usize> KeyIndex<D> {
    pub(crate) fn new(step: f64) -> Self {
        Self {
            map: FxHashMap::default(),
            step,
        }
    }

    pub(crate) fn find<S: Keyed>(&self, v: &[S; D], scratch: &mut Vec<[i64; D]>) -> Result<Option<u32>> {
        scratch.clear();
        S::keys(v, self.step, scratch)?;
        Ok(scratch.iter().find_map(|k| self.map.get(k).copied()))
    }

    /// Returns the id of `v`, inserting `fresh_id` if it is new.
    pub(crate) fn get_or_insert<S: Keyed>(
        &mut self,
        v: &[S; D],
        fresh_id: u32,
        scratch: &mut Vec<[i64; D]>,
    ) -> Result<(u32, bool)> {
        if let Some(id) = self.find(v, scratch)? {
            return Ok((id, false));
        }
        self.map.insert(scratch[0], fresh_id);
        Ok((fresh_id, true))
    }
}

/// Which monotonicity property is asserted during growth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Monotone {
    /// The newborn curvature is at least the previous newborn's.
    Chain,
    /// A newborn smaller than the curvature it replaces must land on an
    /// already visited tuple (relations of the sphere group close such loops).
    Replaced,
}

pub(crate) type BranchFilter<'a, const D: usize> = &'a (dyn Fn(&[[f64; D]; D], usize) -> bool + Sync);

pub(crate) struct TreeParams<'a, const D: usize> {
    /// Prune newborns with curvature above this (in real units).
    pub max_curvature: Option<f64>,
    pub max_depth: Option<u32>,
    pub max_records: Option<u64>,
    pub tuple_dedup: bool,
    pub monotone: Monotone,
    pub branch_filter: Option<BranchFilter<'a, D>>,
    pub key_step: f64,
}

#[derive(Clone, Copy)]
struct Node<const D: usize> {
    ids: [u32; D],
    incoming: u8,
}

const ROOT: u8 = u8::MAX;

enum Outcome<S, const D: usize> {
    Child {
        slot: u8,
        coords: [S; D],
        descending: bool,
    },
    Pruned,
}

fn to_f64_rows<S: Coord, const D: usize>(rows: &[[S; D]], ids: &[u32; D], scale: f64) -> [[f64; D]; D] {
    let mut out = [[0.0; D]; D];
    for (o, id) in out.iter_mut().zip(ids) {
        for (x, y) in o.iter_mut().zip(rows[*id as usize].iter()) {
            *x = y.to_f64() / scale;
        }
    }
    out
}

/// Grows the tree of Descartes tuples from `root`, returning every distinct
/// member met, in breadth-first discovery order.
pub(crate) fn grow_tuples<S: Keyed, const D: usize>(
    root: &[[S; D]; D],
    scale: S,
    params: &TreeParams<'_, D>,
) -> Result<(Vec<[S; D]>, GenerationStats)> {
    let scale_f = scale.to_f64();
    let limit = params.max_curvature.map(|t| t * scale_f);
    let mono_tol = if S::EXACT { 0.0 } else { 1e-9 };
    let mut stats = GenerationStats::default();
    let mut index = KeyIndex::<D>::new(params.key_step);
    let mut scratch = Vec::new();
    let mut rows: Vec<[S; D]> = Vec::new();
    let mut ids = [0u32; D];
    for (i, m) in root.iter().enumerate() {
        let (id, fresh) = index.get_or_insert(m, rows.len() as u32, &mut scratch)?;
        if fresh {
            rows.push(*m);
        }
        ids[i] = id;
    }
    if let Some(n) = params.max_records {
        if rows.len() as u64 >= n {
            rows.truncate(n as usize);
            return Ok((rows, stats));
        }
    }
    let mut visited: FxHashSet<[u32; D]> = FxHashSet::default();
    if params.tuple_dedup {
        let mut k = ids;
        k.sort_unstable();
        visited.insert(k);
    }
    let mut frontier = vec![Node { ids, incoming: ROOT }];
    let mut level = 0u32;
    'levels: while !frontier.is_empty() {
        if params.max_depth.is_some_and(|l| level >= l) {
            break;
        }
        stats.peak_frontier = stats.peak_frontier.max(frontier.len() as u64);
        let mut next = Vec::new();
        for batch in frontier.chunks(BATCH) {
            let rows_ref = &rows;
            let expanded: Vec<Vec<Outcome<S, D>>> = batch
                .par_iter()
                .map(|node| expand(node, rows_ref, scale_f, limit, mono_tol, params))
                .collect::<Result<_>>()?;
            stats.nodes_expanded += batch.len() as u64;
            for (node, outs) in batch.iter().zip(expanded) {
                for out in outs {
                    let (slot, coords, descending) = match out {
                        Outcome::Pruned => {
                            stats.pruned += 1;
                            continue;
                        }
                        Outcome::Child {
                            slot,
                            coords,
                            descending,
                        } => (slot, coords, descending),
                    };
                    let fresh_id = rows.len() as u32;
                    let (id, fresh) = match index.find(&coords, &mut scratch)? {
                        Some(id) => (id, false),
                        None => {
                            if params.max_records.is_some_and(|n| rows.len() as u64 >= n) {
                                stats.levels = level + 1;
                                break 'levels;
                            }
                            index.map.insert(scratch[0], fresh_id);
                            (fresh_id, true)
                        }
                    };
                    if fresh {
                        if rows.len() >= u32::MAX as usize {
                            return Err(Error::Overflow("more than 2^32 records".into()));
                        }
                        rows.push(coords);
                    } else {
                        stats.dedup_hits += 1;
                    }
                    let mut child = node.ids;
                    child[slot as usize] = id;
                    if params.tuple_dedup {
                        let mut k = child;
                        k.sort_unstable();
                        if !visited.insert(k) {
                            continue;
                        }
                    }
                    if descending {
                        return Err(Error::Invariant(
                            "a curvature-decreasing reflection reached an unvisited tuple; \
                             cutoff pruning would be unsound"
                                .into(),
                        ));
                    }
                    next.push(Node {
                        ids: child,
                        incoming: slot,
                    });
                }
            }
        }
        frontier = next;
        level += 1;
        stats.levels = level;
    }
    Ok((rows, stats))
}

fn expand<S: Coord, const D: usize>(
    node: &Node<D>,
    rows: &[[S; D]],
    scale_f: f64,
    limit: Option<f64>,
    mono_tol: f64,
    params: &TreeParams<'_, D>,
) -> Result<Vec<Outcome<S, D>>> {
    let mut members = [[S::zero(); D]; D];
    for (m, id) in members.iter_mut().zip(node.ids.iter()) {
        *m = rows[*id as usize];
    }
    let floats = params
        .branch_filter
        .map(|_| to_f64_rows(rows, &node.ids, scale_f));
    let mut out = Vec::with_capacity(D - 1);
    for slot in 0..D {
        if slot as u8 == node.incoming {
            continue;
        }
        let coords = reflect_coords(&members, slot)
            .ok_or_else(|| Error::Overflow(format!("reflecting slot {slot} (exact width exceeded)")))?;
        let b = coords[CURV].to_f64();
        let mut descending = false;
        if node.incoming != ROOT {
            let reference = match params.monotone {
                Monotone::Chain => members[node.incoming as usize][CURV].to_f64(),
                Monotone::Replaced => members[slot][CURV].to_f64(),
            };
            if b < reference - mono_tol * (1.0 + reference.abs()) {
                if params.monotone == Monotone::Chain {
                    return Err(Error::Invariant(format!(
                        "curvature decreased along a reflection ({} -> {}); cutoff pruning would be unsound",
                        reference / scale_f,
                        b / scale_f
                    )));
                }
                descending = true;
            }
        }
        if limit.is_some_and(|t| b > t) {
            out.push(Outcome::Pruned);
            continue;
        }
        if let (Some(f), Some(fl)) = (params.branch_filter, floats.as_ref()) {
            if !f(fl, slot) {
                out.push(Outcome::Pruned);
                continue;
            }
        }
        out.push(Outcome::Child {
            slot: slot as u8,
            coords,
            descending,
        });
    }
    Ok(out)
}

/// Grows the orbit of the root spheres under inversions in the root spheres.
pub(crate) fn grow_cluster<const D: usize>(
    root: &[[f64; D]; D],
    max_curvature: Option<f64>,
    max_depth: Option<u32>,
    max_records: Option<u64>,
    key_step: f64,
) -> Result<(Vec<[f64; D]>, GenerationStats)> {
    let mut stats = GenerationStats::default();
    let mut index = KeyIndex::<D>::new(key_step);
    let mut scratch = Vec::new();
    let mut rows: Vec<[f64; D]> = Vec::new();
    let mut frontier: Vec<(u32, u8)> = Vec::new();
    for (i, m) in root.iter().enumerate() {
        let (id, fresh) = index.get_or_insert(m, rows.len() as u32, &mut scratch)?;
        if fresh {
            rows.push(*m);
            frontier.push((id, i as u8));
        }
    }
    if let Some(n) = max_records {
        if rows.len() as u64 >= n {
            rows.truncate(n as usize);
            return Ok((rows, stats));
        }
    }
    let mut level = 0u32;
    'levels: while !frontier.is_empty() {
        if max_depth.is_some_and(|l| level >= l) {
            break;
        }
        stats.peak_frontier = stats.peak_frontier.max(frontier.len() as u64);
        let mut next = Vec::new();
        for batch in frontier.chunks(BATCH) {
            let rows_ref = &rows;
            let expanded: Vec<Vec<Option<(u8, [f64; D])>>> = batch
                .par_iter()
                .map(|&(id, last)| {
                    let x = rows_ref[id as usize];
                    let mut out = Vec::with_capacity(D - 1);
                    for (k, r) in root.iter().enumerate() {
                        if k as u8 == last {
                            continue;
                        }
                        let p = bilinear(&x, r);
                        let mut y = x;
                        for (a, b) in y.iter_mut().zip(r) {
                            *a -= 2.0 * p * b;
                        }
                        if y[CURV] < x[CURV] - 1e-9 * (1.0 + x[CURV].abs()) {
                            return Err(Error::Invariant(format!(
                                "cluster curvature decreased ({} -> {})",
                                x[CURV], y[CURV]
                            )));
                        }
                        if max_curvature.is_some_and(|t| y[CURV] > t) {
                            out.push(None);
                        } else {
                            out.push(Some((k as u8, y)));
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            stats.nodes_expanded += batch.len() as u64;
            for outs in expanded {
                for o in outs {
                    let Some((k, y)) = o else {
                        stats.pruned += 1;
                        continue;
                    };
                    match index.find(&y, &mut scratch)? {
                        Some(_) => stats.dedup_hits += 1,
                        None => {
                            if max_records.is_some_and(|n| rows.len() as u64 >= n) {
                                stats.levels = level + 1;
                                break 'levels;
                            }
                            let id = rows.len() as u32;
                            index.map.insert(scratch[0], id);
                            rows.push(y);
                            next.push((id, k));
                        }
                    }
                }
            }
        }
        frontier = next;
        level += 1;
        stats.levels = level;
    }
    Ok((rows, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_keys_probe_boundaries() {
        let mut out = Vec::new();
        <f64 as Keyed>::keys(&[0.5e-9 + 1e-20, 0.0, 0.0, 0.0], 1e-9, &mut out).unwrap();
        assert_eq!(out.len(), 2);
        out.clear();
        <f64 as Keyed>::keys(&[0.1e-9, 0.0, 0.0, 0.0], 1e-9, &mut out).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn near_duplicates_collapse() {
        let mut idx = KeyIndex::<4>::new(1e-9);
        let mut s = Vec::new();
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0 + 1e-13, 2.0, 3.0 - 1e-13, 4.0];
        assert_eq!(idx.get_or_insert(&a, 0, &mut s).unwrap(), (0, true));
        assert_eq!(idx.get_or_insert(&b, 1, &mut s).unwrap(), (0, false));
    }
}
