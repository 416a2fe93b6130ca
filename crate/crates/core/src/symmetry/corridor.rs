//! Corridor conflicts: two agents crossing a width-1 passage in opposite
//! directions.

use std::collections::{HashMap, HashSet};

use crate::conflict::{Conflict, ConflictKind};
use crate::constraint::Constraint;
use crate::grid::{AgentTask, Cell, GridMap};
use crate::lowlevel::earliest_arrival;
use crate::path::Path;

use super::RangeConstraint;

const UNREACHABLE: i64 = i64::MAX / 4;

/// A corridor finding. `toward_exit` travels from `entry` to `exit`,
/// `toward_entry` the other way. The branch constraints keep one agent out
/// of the far endpoint until the other has cleared the passage.
#[derive(Debug, Clone)]
pub struct CorridorFinding {
    pub toward_exit: usize,
    pub toward_entry: usize,
    pub entry: Cell,
    pub exit: Cell,
    /// Corridor length in edges.
    pub length: i32,
    /// Earliest constrained arrivals: `toward_exit` at `exit`, `toward_entry`
    /// at `entry`.
    pub arrival_exit: i32,
    pub arrival_entry: i32,
    /// Earliest arrivals avoiding the corridor interior; `None` when no
    /// bypass exists.
    pub bypass_exit: Option<i32>,
    pub bypass_entry: Option<i32>,
    /// Unrestricted earliest arrivals at the near endpoints.
    pub near_entry: Option<i32>,
    pub near_exit: Option<i32>,
    /// Upper ends of the branch prohibitions.
    pub bound_exit: i32,
    pub bound_entry: i32,
}

fn opt(v: Option<i32>) -> i64 {
    v.map_or(UNREACHABLE, |x| x as i64)
}

/// Expand the degree-2 chain containing `anchor`. Returns the ordered chain
/// including both endpoints, or `None` for cycles.
fn expand_chain(map: &GridMap, anchor: Cell) -> Option<Vec<Cell>> {
    if map.degree(anchor) != 2 {
        return None;
    }
    let walk = |mut prev: Cell, mut cur: Cell| -> Option<Vec<Cell>> {
        let mut out = Vec::new();
        loop {
            out.push(cur);
            if map.degree(cur) != 2 {
                return Some(out);
            }
            let next = map.neighbors(cur).into_iter().find(|&n| n != prev)?;
            if next == anchor {
                // Closed loop of degree-2 cells.
                return None;
            }
            prev = cur;
            cur = next;
        }
    };
    let nbrs = map.neighbors(anchor);
    debug_assert_eq!(nbrs.len(), 2);
    let left = walk(anchor, nbrs[0])?;
    let right = walk(anchor, nbrs[1])?;
    let mut chain: Vec<Cell> = left.into_iter().rev().collect();
    chain.push(anchor);
    chain.extend(right);
    // Canonical orientation keeps detection independent of neighbor order.
    if chain.last() < chain.first() {
        chain.reverse();
    }
    Some(chain)
}

/// The agent's direction of travel along the chain around timestep `t`:
/// `+1` for increasing chain index. `None` when the agent does not move
/// through the corridor there.
fn travel_direction(path: &Path, index: &HashMap<Cell, usize>, t: i32) -> Option<i32> {
    let here = *index.get(&path.at(t))?;
    // Last distinct cell before t.
    let mut tau = t - 1;
    while tau >= 0 && path.at(tau) == path.at(t) {
        tau -= 1;
    }
    if tau >= 0 {
        if let Some(&prev) = index.get(&path.at(tau)) {
            if prev != here {
                return Some(if here > prev { 1 } else { -1 });
            }
        }
    }
    // Agent starts here (or entered from outside the chain): use its next
    // distinct cell.
    let mut tau = t + 1;
    while tau <= path.cost() && path.at(tau) == path.at(t) {
        tau += 1;
    }
    if tau <= path.cost() {
        if let Some(&next) = index.get(&path.at(tau)) {
            if next != here {
                return Some(if next > here { 1 } else { -1 });
            }
        }
    }
    None
}

/// Detect a corridor conflict: the conflict cell lies strictly inside a
/// degree-2 chain and the agents traverse it in opposite directions.
/// Arrival times honor the node's constraint set; bypass times additionally
/// block the corridor interior; near-endpoint times are unrestricted.
pub fn detect_corridor(
    conflict: &Conflict,
    map: &GridMap,
    tasks: &[AgentTask],
    paths: &[Path],
    constraints: &[Constraint],
    k: i32,
) -> Option<CorridorFinding> {
    let anchor = match conflict.kind {
        ConflictKind::Vertex => conflict.cell,
        ConflictKind::EdgeSwap { first_from } => {
            if map.degree(conflict.cell) == 2 {
                conflict.cell
            } else {
                first_from
            }
        }
    };
    let chain = expand_chain(map, anchor)?;
    if chain.len() < 3 {
        return None;
    }
    let index: HashMap<Cell, usize> = chain.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let dir_first = travel_direction(&paths[conflict.first], &index, conflict.time)?;
    let dir_second =
        travel_direction(&paths[conflict.second], &index, conflict.time + conflict.delay)?;
    if dir_first == dir_second {
        return None;
    }

    // The first agent moves toward the chain end in its direction; call that
    // endpoint the exit.
    let (exit, entry) = if dir_first > 0 {
        (*chain.last().unwrap(), chain[0])
    } else {
        (chain[0], *chain.last().unwrap())
    };
    let a1 = conflict.first;
    let a2 = conflict.second;
    let length = chain.len() as i32 - 1;

    let interior: HashSet<Cell> = chain[1..chain.len() - 1].iter().copied().collect();
    let start = |agent: usize| (tasks[agent].start, 0);
    let without = |agent: usize| -> HashSet<Cell> {
        let mut b = interior.clone();
        b.remove(&tasks[agent].start);
        b
    };

    let arrival_exit = earliest_arrival(map, a1, start(a1), exit, constraints, &HashSet::new())?;
    let arrival_entry = earliest_arrival(map, a2, start(a2), entry, constraints, &HashSet::new())?;
    let bypass_exit = earliest_arrival(map, a1, start(a1), exit, constraints, &without(a1));
    let bypass_entry = earliest_arrival(map, a2, start(a2), entry, constraints, &without(a2));
    let near_entry = earliest_arrival(map, a1, start(a1), entry, &[], &HashSet::new());
    let near_exit = earliest_arrival(map, a2, start(a2), exit, &[], &HashSet::new());

    let k = k as i64;
    let bound_exit = (opt(near_exit) + k)
        .max(opt(bypass_exit) - 1)
        .min(arrival_entry as i64 + length as i64 + k);
    let bound_entry = (opt(near_entry) + k)
        .max(opt(bypass_entry) - 1)
        .min(arrival_exit as i64 + length as i64 + k);
    if bound_exit >= UNREACHABLE || bound_entry >= UNREACHABLE {
        return None;
    }
    let (bound_exit, bound_entry) = (bound_exit as i32, bound_entry as i32);

    let finding = CorridorFinding {
        toward_exit: a1,
        toward_entry: a2,
        entry,
        exit,
        length,
        arrival_exit,
        arrival_entry,
        bypass_exit,
        bypass_entry,
        near_entry,
        near_exit,
        bound_exit,
        bound_entry,
    };
    // Both children must invalidate the current paths.
    let (c1, c2) = corridor_ranges(&finding);
    if !c1.violated_by(&paths[a1]) || !c2.violated_by(&paths[a2]) {
        return None;
    }
    Some(finding)
}

fn corridor_ranges(f: &CorridorFinding) -> (RangeConstraint, RangeConstraint) {
    (
        RangeConstraint { cell: f.exit, from: 0, until: f.bound_exit },
        RangeConstraint { cell: f.entry, from: 0, until: f.bound_entry },
    )
}

/// One range prohibition per child: the exit endpoint for the agent heading
/// there, the entry endpoint for the other.
pub fn corridor_branches(f: &CorridorFinding) -> (Vec<Constraint>, Vec<Constraint>) {
    let (c1, c2) = corridor_ranges(f);
    (vec![c1.for_agent(f.toward_exit)], vec![c2.for_agent(f.toward_entry)])
}
