//! Detection and cardinality classification of k-delay conflicts.

use crate::grid::Cell;
use crate::mdd::Mdd;
use crate::path::Path;

/// How resolving a conflict affects the sum of costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cardinality {
    /// Replanning either agent must increase its cost.
    Cardinal,
    /// Replanning one particular agent must increase its cost.
    SemiCardinal,
    NonCardinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    Vertex,
    /// Opposite-direction swap; only reported for k = 0. `first_from` is the
    /// first agent's cell before the swap.
    EdgeSwap { first_from: Cell },
}

/// A k-delay conflict: `first` occupies `cell` at `time`, `second` occupies
/// it at `time + delay`, with `0 <= delay <= k`. Occupancy is goal-extended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conflict {
    pub first: usize,
    pub second: usize,
    pub cell: Cell,
    pub time: i32,
    pub delay: i32,
    pub kind: ConflictKind,
}

/// Horizon beyond which both occupancies are constant and no new conflicts
/// can appear.
pub fn detection_horizon(paths: &[Path], k: i32) -> i32 {
    paths.iter().map(|p| p.cost()).max().unwrap_or(0) + k
}

fn pair_hits(a: usize, b: usize, pa: &Path, pb: &Path, k: i32, horizon: i32, out: &mut Vec<Conflict>) {
    for ta in 0..=horizon {
        let cell = pa.at(ta);
        for tb in ta..=(ta + k).min(horizon) {
            if pb.at(tb) == cell {
                out.push(Conflict {
                    first: a,
                    second: b,
                    cell,
                    time: ta,
                    delay: tb - ta,
                    kind: ConflictKind::Vertex,
                });
            }
        }
    }
}

/// Every pairwise k-delay vertex hit (and edge swap when k = 0), without
/// duplicate suppression. Used by the oracle cross-checks.
pub fn detect_conflicts_raw(paths: &[Path], k: i32) -> Vec<Conflict> {
    let horizon = detection_horizon(paths, k);
    let mut out = Vec::new();
    for a in 0..paths.len() {
        for b in (a + 1)..paths.len() {
            // Earlier visitor first; delay 0 keeps the lower id first.
            pair_hits(a, b, &paths[a], &paths[b], k, horizon, &mut out);
            let mut swapped = Vec::new();
            pair_hits(b, a, &paths[b], &paths[a], k, horizon, &mut swapped);
            out.extend(swapped.into_iter().filter(|c| c.delay > 0));
            if k == 0 {
                for t in 1..=horizon {
                    let (pa, pb) = (&paths[a], &paths[b]);
                    if pa.at(t) == pb.at(t - 1) && pb.at(t) == pa.at(t - 1) && pa.at(t) != pb.at(t)
                    {
                        // Swaps only happen while both still move.
                        if t <= pa.cost() && t <= pb.cost() {
                            out.push(Conflict {
                                first: a,
                                second: b,
                                cell: pa.at(t),
                                time: t,
                                delay: 0,
                                kind: ConflictKind::EdgeSwap { first_from: pa.at(t - 1) },
                            });
                        }
                    }
                }
            }
        }
    }
    sort_conflicts(&mut out);
    out
}

fn sort_conflicts(out: &mut [Conflict]) {
    out.sort_unstable_by_key(|c| {
        (c.time, c.first.min(c.second), c.first.max(c.second), c.delay, c.cell, c.kind)
    });
}

/// All pairwise k-delay conflicts of a plan, ordered by earliest time then
/// agent ids. A contiguous run of hits between the same agents at the same
/// cell (agents sitting next to each other in time) is reported once, at its
/// earliest time with its smallest delay.
pub fn detect_conflicts(paths: &[Path], k: i32) -> Vec<Conflict> {
    use std::collections::HashMap;
    let raw = detect_conflicts_raw(paths, k);
    let mut out: Vec<Conflict> = Vec::new();
    // Track per (pair, cell) the end of the absorbed run; raw hits arrive
    // time-sorted.
    let mut span_end: HashMap<(usize, usize, Cell), i32> = HashMap::new();
    for c in raw {
        if c.kind != ConflictKind::Vertex {
            out.push(c);
            continue;
        }
        let key = (c.first.min(c.second), c.first.max(c.second), c.cell);
        let end = c.time + c.delay;
        match span_end.get_mut(&key) {
            Some(e) if c.time <= *e + 1 => {
                *e = (*e).max(end);
            }
            Some(e) => {
                *e = end;
                out.push(c);
            }
            None => {
                span_end.insert(key, end);
                out.push(c);
            }
        }
    }
    sort_conflicts(&mut out);
    out
}

/// Cardinality of a plain conflict from the agents' optimal-path diagrams
/// (slack 0), built under the constraint-tree node's constraint sets.
pub fn classify_conflict(conflict: &Conflict, mdd_first: &Mdd, mdd_second: &Mdd) -> Cardinality {
    let (s1, s2) = match conflict.kind {
        ConflictKind::Vertex => (
            mdd_first.is_singleton(conflict.cell, conflict.time),
            mdd_second.is_singleton(conflict.cell, conflict.time + conflict.delay),
        ),
        ConflictKind::EdgeSwap { first_from } => {
            let t = conflict.time;
            (
                mdd_first.is_singleton(first_from, t - 1) && mdd_first.is_singleton(conflict.cell, t),
                mdd_second.is_singleton(conflict.cell, t - 1)
                    && mdd_second.is_singleton(first_from, t),
            )
        }
    };
    match (s1, s2) {
        (true, true) => Cardinality::Cardinal,
        (true, false) | (false, true) => Cardinality::SemiCardinal,
        (false, false) => Cardinality::NonCardinal,
    }
}
