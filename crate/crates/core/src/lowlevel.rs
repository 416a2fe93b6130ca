//! Single-agent space-time shortest paths under a constraint set.

use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use crate::constraint::{AgentConstraints, Constraint};
use crate::grid::{AgentTask, Cell, GridMap, MOVES};
use crate::path::Path;

/// Exact distance-to-goal table from a backward BFS, computed once per
/// agent and shared by every low-level call. Admissible and consistent.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    goal: Cell,
    width: i32,
    dist: Vec<Option<i32>>,
}

impl DistanceTable {
    pub fn build(map: &GridMap, goal: Cell) -> Self {
        DistanceTable { goal, width: map.width(), dist: map.bfs_distances(goal) }
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn get(&self, c: Cell) -> Option<i32> {
        self.dist[(c.y * self.width + c.x) as usize]
    }
}

/// Counters shared across the low-level calls of one solver run.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchStats {
    pub expansions: u64,
    /// Searches that ran into the safety horizon; should stay zero on valid
    /// constraint-tree children at this scale.
    pub horizon_hits: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    cell: Cell,
    t: i32,
    /// True when this state may complete the path: the agent just moved in
    /// (or sits on its start at t=0). Waiting at the goal keeps the agent
    /// expandable, but a completion must be a true final arrival.
    arrival: bool,
}

#[derive(PartialEq, Eq)]
struct QueueEntry {
    f: i32,
    g: i32,
    seq: u64,
    state: State,
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on f, then larger g, then insertion order; successors are
        // pushed in up/right/down/left/wait order.
        other
            .f
            .cmp(&self.f)
            .then(self.g.cmp(&other.g))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path for one agent under `constraints`, or `None` when the
/// constrained problem is infeasible within the search horizon.
///
/// Goal acceptance requires reaching the goal, a completion time within
/// every min/max-length bound, and no vertex prohibition on the goal cell at
/// any timestep at or after completion (the agent holds its goal forever).
pub fn plan_path(
    map: &GridMap,
    task: &AgentTask,
    constraints: &[Constraint],
    horizon_hint: i32,
    dist: &DistanceTable,
    stats: &mut SearchStats,
) -> Option<Path> {
    debug_assert_eq!(dist.goal(), task.goal);
    let cons = AgentConstraints::build(constraints, task.id);
    let goal_hold = cons.goal_hold_earliest(task.goal)?;
    let h0 = dist.get(task.start)?;
    if cons.blocks_vertex(task.start, 0) {
        return None;
    }

    let completion_floor = cons.min_length.max(goal_hold);
    let lower_bound = h0.max(completion_floor).max(horizon_hint);
    let horizon = lower_bound
        .max(cons.latest_time.min(i32::MAX / 2))
        .saturating_add(map.cells())
        .min(i32::MAX / 2);
    let f_of = |t: i32, h: i32| (t + h).max(completion_floor);

    let start = State { cell: task.start, t: 0, arrival: true };
    let mut open = BinaryHeap::new();
    let mut parents: HashMap<State, State> = HashMap::new();
    let mut closed: HashSet<State> = HashSet::new();
    let mut seq = 0u64;
    if f_of(0, h0) <= cons.max_length {
        open.push(QueueEntry { f: f_of(0, h0), g: 0, seq, state: start });
    }

    while let Some(QueueEntry { state, .. }) = open.pop() {
        if !closed.insert(state) {
            continue;
        }
        stats.expansions += 1;

        if state.arrival
            && state.cell == task.goal
            && state.t >= completion_floor
            && state.t <= cons.max_length
        {
            let mut cells = vec![state.cell];
            let mut cur = state;
            while let Some(&p) = parents.get(&cur) {
                cells.push(p.cell);
                cur = p;
            }
            cells.reverse();
            return Some(Path::new(cells));
        }

        let t = state.t + 1;
        if t > horizon {
            stats.horizon_hits += 1;
            continue;
        }
        let steps = MOVES.iter().copied().chain(std::iter::once((0, 0)));
        for (dx, dy) in steps {
            let next = Cell::new(state.cell.x + dx, state.cell.y + dy);
            let waiting = next == state.cell;
            if !waiting && !map.is_passable(next) {
                continue;
            }
            if cons.blocks_move(state.cell, next, t) {
                continue;
            }
            let Some(h) = dist.get(next) else { continue };
            if f_of(t, h) > cons.max_length {
                continue;
            }
            let succ = State { cell: next, t, arrival: !waiting && next == task.goal };
            if closed.contains(&succ) || parents.contains_key(&succ) {
                continue;
            }
            parents.insert(succ, state);
            seq += 1;
            open.push(QueueEntry { f: f_of(t, h), g: t, seq, state: succ });
        }
    }

    None
}

/// Earliest timestep `t >= from.1` at which the agent can occupy `target`,
/// avoiding `blocked` cells and honoring the vertex prohibitions in
/// `constraints`. Returns `None` when unreachable within the horizon.
pub fn earliest_arrival(
    map: &GridMap,
    agent: usize,
    from: (Cell, i32),
    target: Cell,
    constraints: &[Constraint],
    blocked: &HashSet<Cell>,
) -> Option<i32> {
    let (origin, t0) = from;
    debug_assert!(map.is_passable(origin) && !blocked.contains(&origin));
    if !map.is_passable(target) || blocked.contains(&target) {
        return None;
    }
    let cons = AgentConstraints::build(constraints, agent);
    if cons.blocks_vertex(origin, t0) {
        return None;
    }
    if origin == target {
        return Some(t0);
    }
    let horizon = t0
        .max(cons.latest_time.min(i32::MAX / 2))
        .saturating_add(map.cells())
        .min(i32::MAX / 2);

    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((origin, t0));
    queue.push_back((origin, t0));
    while let Some((cell, t)) = queue.pop_front() {
        let nt = t + 1;
        if nt > horizon {
            continue;
        }
        let steps = MOVES.iter().copied().chain(std::iter::once((0, 0)));
        for (dx, dy) in steps {
            let next = Cell::new(cell.x + dx, cell.y + dy);
            if !map.is_passable(next) || blocked.contains(&next) {
                continue;
            }
            if cons.blocks_move(cell, next, nt) {
                continue;
            }
            if next == target {
                return Some(nt);
            }
            if seen.insert((next, nt)) {
                queue.push_back((next, nt));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::Scope;

    fn c(x: i32, y: i32) -> Cell {
        Cell::new(x, y)
    }

    fn plan(map: &GridMap, task: &AgentTask, constraints: &[Constraint]) -> Option<Path> {
        let dist = DistanceTable::build(map, task.goal);
        let mut stats = SearchStats::default();
        plan_path(map, task, constraints, 0, &dist, &mut stats)
    }

    #[test]
    fn unconstrained_is_manhattan() {
        let map = GridMap::open(8, 8);
        let task = AgentTask { id: 0, start: c(1, 2), goal: c(5, 2) };
        let path = plan(&map, &task, &[]).unwrap();
        assert_eq!(path.cost(), 4);
    }

    #[test]
    fn range_forces_detour() {
        // Blocking (3,2) over [2,4] makes waiting cost 7; the detour above or
        // below costs 6 (frozen from exhaustive enumeration of paths <= 8 in
        // the lowlevel property suite).
        let map = GridMap::open(8, 8);
        let task = AgentTask { id: 0, start: c(1, 2), goal: c(5, 2) };
        let cons = [Constraint::VertexRange { agent: 0, cell: c(3, 2), from: 2, until: 4 }];
        let path = plan(&map, &task, &cons).unwrap();
        assert_eq!(path.cost(), 6);
    }

    #[test]
    fn goal_hold_pushes_completion_past_window() {
        // 3x1 corridor; goal blocked over [5,6] means completion at 7, not 2.
        let map = GridMap::open(3, 1);
        let task = AgentTask { id: 0, start: c(0, 0), goal: c(2, 0) };
        let cons = [Constraint::VertexRange { agent: 0, cell: c(2, 0), from: 5, until: 6 }];
        let path = plan(&map, &task, &cons).unwrap();
        assert_eq!(path.cost(), 7);
        assert_ne!(path.at(5), c(2, 0));
        assert_ne!(path.at(6), c(2, 0));
    }

    #[test]
    fn max_length_below_shortest_is_infeasible() {
        let map = GridMap::open(8, 8);
        let task = AgentTask { id: 0, start: c(1, 2), goal: c(5, 2) };
        let cons = [Constraint::MaxLength { agent: 0, limit: 3 }];
        assert!(plan(&map, &task, &cons).is_none());
    }

    #[test]
    fn min_length_forces_leave_and_return() {
        let map = GridMap::open(4, 4);
        let task = AgentTask { id: 0, start: c(0, 0), goal: c(1, 0) };
        let cons = [Constraint::MinLength { agent: 0, limit: 4 }];
        let path = plan(&map, &task, &cons).unwrap();
        assert_eq!(path.cost(), 4);
        // Final arrival is a move, not a trailing wait.
        assert_ne!(path.at(3), c(1, 0));
    }

    #[test]
    fn from_on_goal_is_infeasible() {
        let map = GridMap::open(4, 4);
        let task = AgentTask { id: 0, start: c(0, 0), goal: c(1, 0) };
        let cons = [Constraint::VertexFromOn { scope: Scope::Only(0), cell: c(1, 0), from: 9 }];
        assert!(plan(&map, &task, &cons).is_none());
    }

    #[test]
    fn earliest_arrival_open_and_disconnected() {
        let map = GridMap::open(8, 8);
        assert_eq!(
            earliest_arrival(&map, 0, (c(0, 0), 0), c(3, 0), &[], &HashSet::new()),
            Some(3)
        );
        // Interior of the only passage blocked: unreachable.
        let corridor = GridMap::from_ascii(&["...@...", "...@...", ".......", "...@...", "...@..."]);
        let blocked: HashSet<Cell> = [c(3, 2)].into_iter().collect();
        assert_eq!(
            earliest_arrival(&corridor, 0, (c(0, 2), 0), c(6, 2), &[], &blocked),
            None
        );
    }

    #[test]
    fn earliest_arrival_bypass_costs_extra_two() {
        // A corridor with a one-row bypass: blocking the corridor interior
        // makes the arrival exactly two steps later than the direct route.
        let map = GridMap::from_ascii(&[
            "......",
            "......",
            "@@@@@@",
            "@@@@@@",
            "@@@@@@",
        ]);
        let direct =
            earliest_arrival(&map, 0, (c(0, 1), 0), c(5, 1), &[], &HashSet::new()).unwrap();
        let blocked: HashSet<Cell> = (1..5).map(|x| c(x, 1)).collect();
        let bypass = earliest_arrival(&map, 0, (c(0, 1), 0), c(5, 1), &[], &blocked).unwrap();
        assert_eq!(direct, 5);
        assert_eq!(bypass, direct + 2);
    }

    #[test]
    fn deterministic_tie_breaking() {
        let map = GridMap::open(6, 6);
        let task = AgentTask { id: 0, start: c(0, 0), goal: c(3, 3) };
        let a = plan(&map, &task, &[]).unwrap();
        let b = plan(&map, &task, &[]).unwrap();
        assert_eq!(a, b);
    }
}
