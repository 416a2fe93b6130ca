//! Layered diagrams of all constrained paths within a cost bound.

use std::collections::HashSet;

use crate::constraint::{AgentConstraints, Constraint};
use crate::grid::{AgentTask, Cell, GridMap, MOVES};

/// All `(cell, timestep)` pairs on some start-to-goal walk of length exactly
/// `base_cost + slack` that satisfies the agent's constraints. Shorter paths
/// appear through trailing goal-waits, so slack `k` covers every path of
/// cost up to `base_cost + k`. Slack 0 is the classic optimal-paths diagram.
#[derive(Debug, Clone)]
pub struct Mdd {
    pub agent: usize,
    pub base_cost: i32,
    pub slack: i32,
    goal: Cell,
    /// Level `t` holds the sorted cells reachable at `t` on some admissible
    /// walk.
    levels: Vec<Vec<Cell>>,
    cells_anywhere: HashSet<Cell>,
    cons: AgentConstraints,
}

impl Mdd {
    pub fn depth(&self) -> i32 {
        self.base_cost + self.slack
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn level(&self, t: i32) -> &[Cell] {
        &self.levels[t as usize]
    }

    pub fn levels(&self) -> &[Vec<Cell>] {
        &self.levels
    }

    /// Goal-extended membership: beyond the last level only the goal exists.
    pub fn contains(&self, cell: Cell, t: i32) -> bool {
        if t < 0 {
            return false;
        }
        if t > self.depth() {
            return cell == self.goal;
        }
        self.levels[t as usize].binary_search(&cell).is_ok()
    }

    /// Whether `cell` appears at any level.
    pub fn contains_cell(&self, cell: Cell) -> bool {
        self.cells_anywhere.contains(&cell)
    }

    /// A node is a singleton when its level holds exactly one cell. Levels
    /// beyond the diagram depth count as the singleton `{goal}`.
    pub fn is_singleton(&self, cell: Cell, t: i32) -> bool {
        if t > self.depth() {
            return cell == self.goal;
        }
        t >= 0 && self.levels[t as usize] == [cell]
    }

    /// Legal diagram edge between consecutive levels.
    pub fn has_edge(&self, from: Cell, t: i32, to: Cell) -> bool {
        let step = from.manhattan(to);
        (step == 0 || step == 1)
            && self.contains(from, t)
            && self.contains(to, t + 1)
            && !self.cons.blocks_move(from, to, t + 1)
    }

    /// Cells of level `t + 1` reachable in one step from `(from, t)`.
    pub fn successors(&self, from: Cell, t: i32) -> Vec<Cell> {
        let mut out = Vec::new();
        for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
            let to = Cell::new(from.x + dx, from.y + dy);
            if self.contains(to, t + 1) && !self.cons.blocks_move(from, to, t + 1) {
                out.push(to);
            }
        }
        out
    }

    /// Nodes reachable from the start level while skipping every node for
    /// which `removed` returns true.
    pub fn reachable_nodes(&self, removed: &dyn Fn(Cell, i32) -> bool) -> Vec<HashSet<Cell>> {
        let depth = self.depth() as usize;
        let mut reach: Vec<HashSet<Cell>> = vec![HashSet::new(); depth + 1];
        let start = self.levels[0][0];
        if self.levels[0].len() == 1 && !removed(start, 0) {
            reach[0].insert(start);
        }
        for t in 0..depth {
            let frontier: Vec<Cell> = reach[t].iter().copied().collect();
            for from in frontier {
                for to in self.successors(from, t as i32) {
                    if !removed(to, t as i32 + 1) {
                        reach[t + 1].insert(to);
                    }
                }
            }
        }
        reach
    }

    /// True when a full start-to-goal traversal survives after deleting the
    /// nodes for which `removed` returns true.
    pub fn goal_reachable_without(&self, removed: &dyn Fn(Cell, i32) -> bool) -> bool {
        let reach = self.reachable_nodes(removed);
        reach[self.depth() as usize].contains(&self.goal)
    }
}

/// Build the slack-`k'` diagram for an agent under its constraint set.
/// `base_cost` must be the agent's optimal constrained cost (the caller has
/// already planned a path). Returns `None` if the levels collapse, which
/// indicates a caller bug.
pub fn build_mdd(
    map: &GridMap,
    task: &AgentTask,
    constraints: &[Constraint],
    base_cost: i32,
    slack: i32,
) -> Option<Mdd> {
    debug_assert!(slack >= 0);
    let cons = AgentConstraints::build(constraints, task.id);
    let depth = base_cost + slack;

    // Forward reachable cells per level.
    let mut forward: Vec<HashSet<Cell>> = Vec::with_capacity(depth as usize + 1);
    if cons.blocks_vertex(task.start, 0) {
        return None;
    }
    forward.push([task.start].into_iter().collect());
    for t in 1..=depth {
        let mut level = HashSet::new();
        for &cell in &forward[t as usize - 1] {
            for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
                let next = Cell::new(cell.x + dx, cell.y + dy);
                if !map.is_passable(next) || cons.blocks_move(cell, next, t) {
                    continue;
                }
                // A completion by max_length means holding the goal from
                // there on.
                if t > cons.max_length && next != task.goal {
                    continue;
                }
                level.insert(next);
            }
        }
        forward.push(level);
    }

    // Backward viability: can reach (goal, depth) from (cell, t).
    let mut backward: Vec<HashSet<Cell>> = vec![HashSet::new(); depth as usize + 1];
    if !forward[depth as usize].contains(&task.goal) {
        return None;
    }
    backward[depth as usize].insert(task.goal);
    for t in (0..depth).rev() {
        let mut level = HashSet::new();
        for &cell in &forward[t as usize] {
            for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
                let next = Cell::new(cell.x + dx, cell.y + dy);
                if backward[t as usize + 1].contains(&next) && !cons.blocks_move(cell, next, t + 1)
                {
                    level.insert(cell);
                    break;
                }
            }
        }
        backward[t as usize] = level;
    }
    if !backward[0].contains(&task.start) {
        return None;
    }

    let mut levels = Vec::with_capacity(depth as usize + 1);
    let mut cells_anywhere = HashSet::new();
    for t in 0..=depth {
        let mut level: Vec<Cell> =
            forward[t as usize].intersection(&backward[t as usize]).copied().collect();
        level.sort_unstable();
        cells_anywhere.extend(level.iter().copied());
        levels.push(level);
    }
    debug_assert_eq!(levels[0], [task.start]);

    Some(Mdd {
        agent: task.id,
        base_cost,
        slack,
        goal: task.goal,
        levels,
        cells_anywhere,
        cons,
    })
}
