//! Constraints imposed on the low-level search by the constraint tree.

use std::collections::{HashMap, HashSet};

use crate::grid::Cell;
use crate::path::Path;

/// Which agents a constraint applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Only(usize),
    AllExcept(usize),
}

impl Scope {
    pub fn covers(&self, agent: usize) -> bool {
        match *self {
            Scope::Only(a) => a == agent,
            Scope::AllExcept(a) => a != agent,
        }
    }
}

/// The constraint kinds honored by the low level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// The agent may not occupy `cell` at any `t` in `[from, until]`.
    VertexRange { agent: usize, cell: Cell, from: i32, until: i32 },
    /// Covered agents may not occupy `cell` at any `t >= from`.
    VertexFromOn { scope: Scope, cell: Cell, from: i32 },
    /// The agent's completion time must satisfy `et <= limit`.
    MaxLength { agent: usize, limit: i32 },
    /// The agent's completion time must satisfy `et >= limit`.
    MinLength { agent: usize, limit: i32 },
    /// The agent may not move `from_cell -> to_cell` arriving at `at`.
    /// Only produced for k = 0 instances.
    Edge { agent: usize, from_cell: Cell, to_cell: Cell, at: i32 },
}

impl Constraint {
    pub fn applies_to(&self, agent: usize) -> bool {
        match *self {
            Constraint::VertexRange { agent: a, .. }
            | Constraint::MaxLength { agent: a, .. }
            | Constraint::MinLength { agent: a, .. }
            | Constraint::Edge { agent: a, .. } => a == agent,
            Constraint::VertexFromOn { scope, .. } => scope.covers(agent),
        }
    }

    /// Declarative check against a finished path (goal-extended occupancy).
    pub fn violated_by(&self, agent: usize, path: &Path) -> bool {
        if !self.applies_to(agent) {
            return false;
        }
        match *self {
            Constraint::VertexRange { cell, from, until, .. } => {
                let hi = until.min(path.cost());
                if (from..=hi).any(|t| path.at(t) == cell) {
                    return true;
                }
                // Goal occupancy is forever; a window at or beyond completion
                // hits the goal cell.
                path.goal() == cell && until >= path.cost()
            }
            Constraint::VertexFromOn { cell, from, .. } => {
                if path.goal() == cell {
                    return true;
                }
                (from..=path.cost()).any(|t| path.at(t) == cell)
            }
            Constraint::MaxLength { limit, .. } => path.cost() > limit,
            Constraint::MinLength { limit, .. } => path.cost() < limit,
            Constraint::Edge { from_cell, to_cell, at, .. } => {
                at >= 1
                    && path.at_exact(at - 1) == Some(from_cell)
                    && path.at_exact(at) == Some(to_cell)
            }
        }
    }
}

/// Per-agent digest of a constraint set, prepared once per low-level call.
#[derive(Debug, Clone, Default)]
pub struct AgentConstraints {
    /// Closed forbidden windows per cell; `until = i32::MAX` encodes
    /// from-some-time-onwards prohibitions.
    windows: HashMap<Cell, Vec<(i32, i32)>>,
    edges: HashSet<(Cell, Cell, i32)>,
    pub min_length: i32,
    pub max_length: i32,
    /// Latest finite timestep named by any applicable constraint.
    pub latest_time: i32,
}

impl AgentConstraints {
    pub fn build(constraints: &[Constraint], agent: usize) -> Self {
        let mut out = AgentConstraints {
            windows: HashMap::new(),
            edges: HashSet::new(),
            min_length: 0,
            max_length: i32::MAX,
            latest_time: 0,
        };
        for c in constraints.iter().filter(|c| c.applies_to(agent)) {
            match *c {
                Constraint::VertexRange { cell, from, until, .. } => {
                    debug_assert!(from <= until && from >= 0);
                    out.windows.entry(cell).or_default().push((from, until));
                    out.latest_time = out.latest_time.max(until);
                }
                Constraint::VertexFromOn { cell, from, .. } => {
                    out.windows.entry(cell).or_default().push((from, i32::MAX));
                    out.latest_time = out.latest_time.max(from);
                }
                Constraint::MaxLength { limit, .. } => {
                    out.max_length = out.max_length.min(limit);
                    out.latest_time = out.latest_time.max(limit);
                }
                Constraint::MinLength { limit, .. } => {
                    out.min_length = out.min_length.max(limit);
                    out.latest_time = out.latest_time.max(limit);
                }
                Constraint::Edge { from_cell, to_cell, at, .. } => {
                    out.edges.insert((from_cell, to_cell, at));
                    out.latest_time = out.latest_time.max(at);
                }
            }
        }
        out
    }

    pub fn blocks_vertex(&self, cell: Cell, t: i32) -> bool {
        self.windows
            .get(&cell)
            .is_some_and(|ws| ws.iter().any(|&(lo, hi)| t >= lo && t <= hi))
    }

    pub fn blocks_move(&self, from: Cell, to: Cell, arrive: i32) -> bool {
        self.blocks_vertex(to, arrive)
            || (!self.edges.is_empty() && self.edges.contains(&(from, to, arrive)))
    }

    /// Earliest completion time at `goal` compatible with holding the goal
    /// forever afterwards; `None` when no completion can ever be legal.
    pub fn goal_hold_earliest(&self, goal: Cell) -> Option<i32> {
        let mut earliest = 0;
        if let Some(ws) = self.windows.get(&goal) {
            for &(_, hi) in ws {
                if hi == i32::MAX {
                    return None;
                }
                earliest = earliest.max(hi + 1);
            }
        }
        Some(earliest)
    }
}
