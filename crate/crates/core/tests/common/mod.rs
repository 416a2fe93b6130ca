//! Shared verification machinery for the property and acceptance suites.
//!
//! The centerpiece is an exact counterexample search over path pairs: one
//! side is enumerated, the other searched with a constrained space-time
//! sweep, so universally quantified pair properties can be decided without
//! materializing the full cross product.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use kcbs_core::constraint::{AgentConstraints, Constraint};
use kcbs_core::grid::{AgentTask, Cell, GridMap, MOVES};
use kcbs_core::path::Path;
use kcbs_core::symmetry::RangeConstraint;

/// One per-agent violation obligation.
#[derive(Debug, Clone)]
pub enum Violate {
    /// The path must hit at least one window of the set (goal-extended).
    HitAny(Vec<RangeConstraint>),
    /// The path must complete no later than this timestep.
    CompleteBy(i32),
}

impl Violate {
    pub fn satisfied_by(&self, path: &Path) -> bool {
        match self {
            Violate::HitAny(set) => set.iter().any(|r| r.violated_by(path)),
            Violate::CompleteBy(limit) => path.cost() <= *limit,
        }
    }
}

/// What one side of a counterexample pair must look like.
#[derive(Debug, Clone)]
pub struct SideSpec {
    pub task: AgentTask,
    /// Constraint set the path must satisfy (the parent node's).
    pub parent: Vec<Constraint>,
    /// Violation obligations (all must hold).
    pub must: Vec<Violate>,
    pub cost_cap: i32,
}

fn parent_ok(spec: &SideSpec, path: &Path) -> bool {
    spec.parent.iter().all(|c| !c.violated_by(spec.task.id, path))
}

fn obligations_ok(spec: &SideSpec, path: &Path) -> bool {
    spec.must.iter().all(|v| v.satisfied_by(path))
}

/// All canonical paths within the cost cap that satisfy the parent
/// constraints and every violation obligation. The search prunes branches
/// that can no longer hit a pending window. `None` when more than `cap`
/// candidates exist.
pub fn violating_paths(map: &GridMap, spec: &SideSpec, cap: usize) -> Option<Vec<Path>> {
    let dist = map.bfs_distances(spec.task.goal);
    let d = |c: Cell| dist[(c.y * map.width() + c.x) as usize];
    d(spec.task.start)?;
    let hit_groups: Vec<&Vec<RangeConstraint>> = spec
        .must
        .iter()
        .filter_map(|v| match v {
            Violate::HitAny(set) => Some(set),
            Violate::CompleteBy(_) => None,
        })
        .collect();
    let deadlines: Vec<i32> = hit_groups
        .iter()
        .map(|set| set.iter().map(|r| r.until).max().unwrap_or(-1))
        .collect();
    let cons = AgentConstraints::build(&spec.parent, spec.task.id);

    struct Dfs<'a> {
        map: &'a GridMap,
        spec: &'a SideSpec,
        dist: Box<dyn Fn(Cell) -> Option<i32> + 'a>,
        hit_groups: Vec<&'a Vec<RangeConstraint>>,
        deadlines: Vec<i32>,
        cons: AgentConstraints,
        out: Vec<Path>,
        cap: usize,
    }

    impl Dfs<'_> {
        fn run(&mut self, stack: &mut Vec<Cell>, mask: u32) -> bool {
            let t = stack.len() as i32 - 1;
            let here = *stack.last().unwrap();
            if here == self.spec.task.goal && (t == 0 || stack[stack.len() - 2] != here) {
                let path = Path::new(stack.clone());
                if parent_ok(self.spec, &path) && obligations_ok(self.spec, &path) {
                    if self.out.len() == self.cap {
                        return false;
                    }
                    self.out.push(path);
                }
            }
            if t == self.spec.cost_cap {
                return true;
            }
            for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
                let next = Cell::new(here.x + dx, here.y + dy);
                if !self.map.is_passable(next) {
                    continue;
                }
                let nt = t + 1;
                match (self.dist)(next) {
                    Some(h) if nt + h <= self.spec.cost_cap => {}
                    _ => continue,
                }
                if self.cons.blocks_move(here, next, nt) {
                    continue;
                }
                let mut mask = mask;
                for (g, set) in self.hit_groups.iter().enumerate() {
                    if mask & (1 << g) == 0 && set.iter().any(|r| r.hits(next, nt)) {
                        mask |= 1 << g;
                    }
                }
                // A pending window that can never be hit again (not even by
                // sitting on the goal) kills the branch.
                let dead = self.deadlines.iter().enumerate().any(|(g, &dl)| {
                    mask & (1 << g) == 0
                        && nt > dl
                        && !self.hit_groups[g]
                            .iter()
                            .any(|r| r.cell == self.spec.task.goal && r.until >= nt)
                });
                if dead {
                    continue;
                }
                stack.push(next);
                let ok = self.run(stack, mask);
                stack.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut dfs = Dfs {
        map,
        spec,
        dist: Box::new(d),
        hit_groups,
        deadlines,
        cons,
        out: Vec::new(),
        cap,
    };
    if cons_blocks_start(&dfs.cons, spec.task.start) {
        return Some(Vec::new());
    }
    let mut stack = vec![spec.task.start];
    let mut mask = 0u32;
    for (g, set) in dfs.hit_groups.iter().enumerate() {
        if set.iter().any(|r| r.hits(spec.task.start, 0)) {
            mask |= 1 << g;
        }
    }
    if dfs.run(&mut stack, mask) {
        Some(dfs.out)
    } else {
        None
    }
}

fn cons_blocks_start(cons: &AgentConstraints, start: Cell) -> bool {
    cons.blocks_vertex(start, 0)
}

/// Occupancy of the fixed partner path inflated by the robustness window,
/// plus its forever occupancy of its goal.
struct PartnerOccupancy {
    windows: HashMap<Cell, Vec<(i32, i32)>>,
    goal: Cell,
    goal_forbidden_from: i32,
    swap_edges: HashSet<(Cell, Cell, i32)>,
}

impl PartnerOccupancy {
    fn new(partner: &Path, k: i32) -> Self {
        let mut windows: HashMap<Cell, Vec<(i32, i32)>> = HashMap::new();
        for (t, &cell) in partner.cells().iter().enumerate() {
            windows.entry(cell).or_default().push(((t as i32 - k).max(0), t as i32 + k));
        }
        let mut swap_edges = HashSet::new();
        if k == 0 {
            for t in 1..=partner.cost() {
                let (from, to) = (partner.at(t - 1), partner.at(t));
                if from != to {
                    // The other agent may not traverse the reverse edge.
                    swap_edges.insert((to, from, t));
                }
            }
        }
        PartnerOccupancy {
            windows,
            goal: partner.goal(),
            goal_forbidden_from: (partner.cost() - k).max(0),
            swap_edges,
        }
    }

    fn blocks_vertex(&self, cell: Cell, t: i32) -> bool {
        if cell == self.goal && t >= self.goal_forbidden_from {
            return true;
        }
        self.windows
            .get(&cell)
            .is_some_and(|ws| ws.iter().any(|&(lo, hi)| t >= lo && t <= hi))
    }

    fn blocks_move(&self, from: Cell, to: Cell, t: i32) -> bool {
        self.blocks_vertex(to, t) || self.swap_edges.contains(&(from, to, t))
    }

    /// Latest time the partner ever occupies `cell` through plain travel
    /// (the forever goal occupancy is handled separately).
    fn last_visit(&self, cell: Cell) -> Option<i32> {
        self.windows.get(&cell).map(|ws| ws.iter().map(|&(_, hi)| hi).max().unwrap())
    }
}

/// Search for a path of `spec` that is conflict-free against the fixed
/// `partner` path under robustness `k`. Exact over the capped cost range.
pub fn dodger_search(
    map: &GridMap,
    spec: &SideSpec,
    partner: &Path,
    k: i32,
) -> Option<Path> {
    let occupancy = PartnerOccupancy::new(partner, k);
    let dist = map.bfs_distances(spec.task.goal);
    let d = |c: Cell| dist[(c.y * map.width() + c.x) as usize];
    d(spec.task.start)?;
    let cons = AgentConstraints::build(&spec.parent, spec.task.id);
    if cons.blocks_vertex(spec.task.start, 0) || occupancy.blocks_vertex(spec.task.start, 0) {
        return None;
    }

    let hit_groups: Vec<&Vec<RangeConstraint>> = spec
        .must
        .iter()
        .filter_map(|v| match v {
            Violate::HitAny(set) => Some(set),
            Violate::CompleteBy(_) => None,
        })
        .collect();
    let complete_by: i32 =
        spec.must
            .iter()
            .filter_map(|v| match v {
                Violate::CompleteBy(limit) => Some(*limit),
                Violate::HitAny(_) => None,
            })
            .min()
            .unwrap_or(i32::MAX);
    let full_mask: u32 = (1 << hit_groups.len()) - 1;

    // Completion legality: the dodger holds its goal forever afterwards.
    let goal = spec.task.goal;
    let goal_hold_vs_partner = if occupancy.goal == goal {
        // Distinct goals in every instance we test.
        return None;
    } else {
        occupancy.last_visit(goal).map_or(0, |t| t + 1)
    };
    let goal_hold_vs_parent = cons.goal_hold_earliest(goal)?;
    let min_completion = goal_hold_vs_partner.max(goal_hold_vs_parent).max(cons.min_length);
    let max_completion = complete_by.min(cons.max_length);

    // Goal-extension can still satisfy HitAny obligations: a window on the
    // goal cell at or beyond completion counts.
    let mask_after_completion = |mask: u32, et: i32| -> u32 {
        let mut mask = mask;
        for (g, set) in hit_groups.iter().enumerate() {
            if mask & (1 << g) == 0
                && set.iter().any(|r| r.cell == goal && r.until >= et)
            {
                mask |= 1 << g;
            }
        }
        mask
    };

    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    struct State {
        cell: Cell,
        t: i32,
        mask: u32,
        arrival: bool,
    }

    let start = State {
        cell: spec.task.start,
        t: 0,
        mask: {
            let mut mask = 0;
            for (g, set) in hit_groups.iter().enumerate() {
                if set.iter().any(|r| r.hits(spec.task.start, 0)) {
                    mask |= 1 << g;
                }
            }
            mask
        },
        arrival: true,
    };
    let mut queue = VecDeque::new();
    let mut parents: HashMap<State, State> = HashMap::new();
    let mut seen = HashSet::new();
    queue.push_back(start);
    seen.insert(start);

    while let Some(state) = queue.pop_front() {
        if state.arrival
            && state.cell == goal
            && state.t >= min_completion
            && state.t <= max_completion
            && mask_after_completion(state.mask, state.t) == full_mask
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
        let nt = state.t + 1;
        if nt > spec.cost_cap {
            continue;
        }
        for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
            let next = Cell::new(state.cell.x + dx, state.cell.y + dy);
            let waiting = next == state.cell;
            if !waiting && !map.is_passable(next) {
                continue;
            }
            match d(next) {
                Some(h) if nt + h <= spec.cost_cap => {}
                _ => continue,
            }
            if cons.blocks_move(state.cell, next, nt) {
                continue;
            }
            if occupancy.blocks_move(state.cell, next, nt) {
                continue;
            }
            let mut mask = state.mask;
            for (g, set) in hit_groups.iter().enumerate() {
                if mask & (1 << g) == 0 && set.iter().any(|r| r.hits(next, nt)) {
                    mask |= 1 << g;
                }
            }
            let succ = State { cell: next, t: nt, mask, arrival: !waiting && next == goal };
            if seen.insert(succ) {
                parents.insert(succ, state);
                queue.push_back(succ);
            }
        }
    }
    None
}

/// Decide whether a valid pair exists with both sides meeting their specs:
/// enumerate the side expected to be smaller, dodge with the other.
/// `Ok(None)` when no pair exists; `Err` if enumeration blew the cap.
pub fn find_compatible_pair(
    map: &GridMap,
    enumerate: &SideSpec,
    search: &SideSpec,
    k: i32,
    cap: usize,
) -> Result<Option<(Path, Path)>, String> {
    let fixed =
        violating_paths(map, enumerate, cap).ok_or_else(|| format!("enumeration blew cap {cap}"))?;
    for candidate in fixed {
        if let Some(answer) = dodger_search(map, search, &candidate, k) {
            return Ok(Some((candidate, answer)));
        }
    }
    Ok(None)
}
