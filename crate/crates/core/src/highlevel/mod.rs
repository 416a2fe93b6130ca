//! The constraint-tree search: best-first expansion over complete plans,
//! conflict selection by cardinality, and branching through symmetry
//! findings or plain range constraints.

mod heuristic;

pub use heuristic::min_vertex_cover;

use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::conflict::{classify_conflict, detect_conflicts, Cardinality, Conflict, ConflictKind};
use crate::constraint::Constraint;
use crate::grid::{AgentTask, GridMap, Instance};
use crate::lowlevel::{plan_path, DistanceTable, SearchStats};
use crate::mdd::{build_mdd, Mdd};
use crate::path::{sic, Path};
use crate::symmetry::{
    detect_corridor, detect_rectangle, detect_target, Finding,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicMode {
    None,
    CardinalGraph,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub k: i32,
    pub time_limit: Duration,
    pub rectangle_reasoning: bool,
    pub corridor_reasoning: bool,
    pub target_reasoning: bool,
    pub heuristic: HeuristicMode,
    pub seed: u64,
}

impl SolverConfig {
    /// Everything on: the strongest configuration.
    pub fn full(k: i32) -> Self {
        SolverConfig {
            k,
            time_limit: Duration::from_secs(60),
            rectangle_reasoning: true,
            corridor_reasoning: true,
            target_reasoning: true,
            heuristic: HeuristicMode::CardinalGraph,
            seed: 0,
        }
    }

    /// The plain baseline: no heuristic, no symmetry reasoning.
    pub fn baseline(k: i32) -> Self {
        SolverConfig {
            k,
            time_limit: Duration::from_secs(60),
            rectangle_reasoning: false,
            corridor_reasoning: false,
            target_reasoning: false,
            heuristic: HeuristicMode::None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ConflictCounts {
    pub plain: u64,
    pub rectangle: u64,
    pub corridor: u64,
    pub target: u64,
}

impl ConflictCounts {
    pub fn total(&self) -> u64 {
        self.plain + self.rectangle + self.corridor + self.target
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SolveStats {
    pub ct_expanded: u64,
    pub ct_generated: u64,
    pub lowlevel_expansions: u64,
    /// Conflicts resolved while searching, by the mechanism that split them.
    pub conflicts_by_type: ConflictCounts,
    pub rectangle_conflict_ratio: f64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub paths: Vec<Path>,
    pub sic: i32,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(Solution),
    Timeout(SolveStats),
    Infeasible(SolveStats),
}

impl SolveOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Solved(_) => "solved",
            SolveOutcome::Timeout(_) => "timeout",
            SolveOutcome::Infeasible(_) => "infeasible",
        }
    }

    pub fn stats(&self) -> &SolveStats {
        match self {
            SolveOutcome::Solved(s) => &s.stats,
            SolveOutcome::Timeout(st) | SolveOutcome::Infeasible(st) => st,
        }
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

/// How a chosen conflict will be split.
#[derive(Debug, Clone)]
enum Action {
    Plain,
    Symmetry(Finding),
}

#[derive(Debug, Clone)]
struct Resolution {
    conflict: Conflict,
    class: Cardinality,
    action: Action,
}

impl Resolution {
    fn kind_rank(&self) -> u8 {
        match &self.action {
            Action::Symmetry(Finding::Rectangle(_)) => 0,
            Action::Symmetry(Finding::Corridor(_)) => 1,
            Action::Symmetry(Finding::Target(_)) => 2,
            Action::Plain => 3,
        }
    }

    fn rank(&self) -> (Cardinality, u8, i32, usize, usize, i32) {
        let c = &self.conflict;
        (self.class, self.kind_rank(), c.time, c.first.min(c.second), c.first.max(c.second), c.delay)
    }

    fn kind_name(&self) -> &'static str {
        match &self.action {
            Action::Plain => "plain",
            Action::Symmetry(f) => f.kind_name(),
        }
    }
}

/// A branching event, reported to observers before the children are
/// evaluated.
pub struct BranchEvent<'a> {
    pub parent_constraints: &'a [Constraint],
    pub parent_paths: &'a [Path],
    pub conflict: &'a Conflict,
    pub kind: &'static str,
    /// Added constraint sets, one per prospective child.
    pub children: &'a [Vec<Constraint>],
}

/// Hook into the constraint-tree search; used by the verification suites.
pub trait SearchObserver {
    fn on_branch(&mut self, _event: &BranchEvent<'_>) {}
}

struct NoopObserver;

impl SearchObserver for NoopObserver {}

struct CtNode {
    constraints: Vec<Constraint>,
    paths: Vec<Path>,
    g: i32,
    h: u32,
    f: i32,
    resolutions: Vec<Resolution>,
}

#[derive(PartialEq, Eq)]
struct OpenEntry {
    f: i32,
    h: u32,
    conflicts: usize,
    seq: u64,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap: lowest f, then fewer conflicts, then lowest h, then
        // generation order. Ties on f form large plateaus; diving toward
        // conflict-free nodes first keeps the tree small.
        other
            .f
            .cmp(&self.f)
            .then(other.conflicts.cmp(&self.conflicts))
            .then(other.h.cmp(&self.h))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

type MddKey = (usize, Vec<Constraint>, i32);
// Detection is a pure function of the conflict and the two agents'
// constraint sets (paths and diagrams derive from them), so findings are
// shared across constraint-tree nodes.
type FindingKey = (Conflict, Vec<Constraint>, Vec<Constraint>);

struct Solver<'a> {
    map: &'a GridMap,
    tasks: &'a [AgentTask],
    config: &'a SolverConfig,
    dist: Vec<DistanceTable>,
    mdd_cache: HashMap<MddKey, Rc<Mdd>>,
    finding_cache: HashMap<FindingKey, Option<(Finding, Cardinality)>>,
    search: SearchStats,
    stats: SolveStats,
}

impl<'a> Solver<'a> {
    fn new(instance: &'a Instance, config: &'a SolverConfig) -> Self {
        let dist =
            instance.tasks.iter().map(|t| DistanceTable::build(&instance.map, t.goal)).collect();
        Solver {
            map: &instance.map,
            tasks: &instance.tasks,
            config,
            dist,
            mdd_cache: HashMap::new(),
            finding_cache: HashMap::new(),
            search: SearchStats::default(),
            stats: SolveStats::default(),
        }
    }

    fn agent_constraints(&self, constraints: &[Constraint], agent: usize) -> Vec<Constraint> {
        constraints.iter().copied().filter(|c| c.applies_to(agent)).collect()
    }

    fn mdd(&mut self, constraints: &[Constraint], agent: usize, base_cost: i32, slack: i32) -> Rc<Mdd> {
        let key: MddKey = (agent, self.agent_constraints(constraints, agent), slack);
        if let Some(hit) = self.mdd_cache.get(&key) {
            return Rc::clone(hit);
        }
        let mdd = build_mdd(self.map, &self.tasks[agent], &key.1, base_cost, slack)
            .expect("feasible agent must have a diagram");
        let rc = Rc::new(mdd);
        self.mdd_cache.insert(key, Rc::clone(&rc));
        rc
    }

    fn plan(&mut self, constraints: &[Constraint], agent: usize, hint: i32) -> Option<Path> {
        let set = self.agent_constraints(constraints, agent);
        let path =
            plan_path(self.map, &self.tasks[agent], &set, hint, &self.dist[agent], &mut self.search);
        self.stats.lowlevel_expansions = self.search.expansions;
        path
    }

    /// Detect (memoized) the symmetry finding for one conflict, honoring
    /// the reasoning toggles with rectangle taking precedence over corridor
    /// over target. Returns the finding and the class it ranks under.
    fn finding_for(
        &mut self,
        constraints: &[Constraint],
        paths: &[Path],
        conflict: &Conflict,
        plain_class: Cardinality,
    ) -> Option<(Finding, Cardinality)> {
        let (i, j) = (conflict.first, conflict.second);
        let key: FindingKey = (
            *conflict,
            self.agent_constraints(constraints, i),
            self.agent_constraints(constraints, j),
        );
        if let Some(hit) = self.finding_cache.get(&key) {
            return hit.clone();
        }
        let mut result = None;
        if self.config.rectangle_reasoning && conflict.kind == ConflictKind::Vertex {
            let k = self.config.k;
            let kmdd_i = self.mdd(constraints, i, paths[i].cost(), k);
            let kmdd_j = self.mdd(constraints, j, paths[j].cost(), k);
            if let Some(finding) =
                detect_rectangle(conflict, &paths[i], &paths[j], k, &kmdd_i, &kmdd_j, self.map, None)
            {
                let class = finding.cardinality;
                result = Some((Finding::Rectangle(finding), class));
            }
        }
        if result.is_none() && self.config.corridor_reasoning {
            if let Some(finding) =
                detect_corridor(conflict, self.map, self.tasks, paths, constraints, self.config.k)
            {
                result = Some((Finding::Corridor(finding), plain_class));
            }
        }
        if result.is_none() && self.config.target_reasoning {
            if let Some(finding) = detect_target(conflict, self.tasks, paths) {
                result = Some((Finding::Target(finding), plain_class));
            }
        }
        self.finding_cache.insert(key, result.clone());
        result
    }

    /// Classify every conflict and attach the symmetry finding that will
    /// resolve it.
    fn evaluate(&mut self, constraints: &[Constraint], paths: &[Path]) -> (Vec<Resolution>, u32) {
        let conflicts = detect_conflicts(paths, self.config.k);
        let mut resolutions = Vec::with_capacity(conflicts.len());
        let mut cardinal_edges: Vec<(usize, usize)> = Vec::new();
        for conflict in conflicts {
            let (i, j) = (conflict.first, conflict.second);
            let mdd_i = self.mdd(constraints, i, paths[i].cost(), 0);
            let mdd_j = self.mdd(constraints, j, paths[j].cost(), 0);
            let plain_class = classify_conflict(&conflict, &mdd_i, &mdd_j);

            let (action, class) = match self.finding_for(constraints, paths, &conflict, plain_class)
            {
                Some((finding, class)) => (Action::Symmetry(finding), class),
                None => (Action::Plain, plain_class),
            };
            if class == Cardinality::Cardinal
                || matches!(&action, Action::Symmetry(Finding::Rectangle(f)) if f.cardinality == Cardinality::Cardinal)
            {
                cardinal_edges.push((i, j));
            }
            resolutions.push(Resolution { conflict, class, action });
        }
        let h = match self.config.heuristic {
            HeuristicMode::None => 0,
            HeuristicMode::CardinalGraph => min_vertex_cover(&cardinal_edges),
        };
        (resolutions, h)
    }

    fn make_node(&mut self, constraints: Vec<Constraint>, paths: Vec<Path>, floor_f: i32) -> CtNode {
        #[cfg(debug_assertions)]
        for (agent, path) in paths.iter().enumerate() {
            for c in constraints.iter().filter(|c| c.applies_to(agent)) {
                debug_assert!(!c.violated_by(agent, path), "constraint {c:?} violated by agent {agent}");
            }
        }
        let (resolutions, h) = self.evaluate(&constraints, &paths);
        let g = sic(&paths);
        // Lower bounds inherit: a child's subtree can never beat its parent.
        let f = (g + h as i32).max(floor_f);
        CtNode { constraints, paths, g, h, f, resolutions }
    }

    fn count_resolved(&mut self, kind: &'static str) {
        match kind {
            "plain" => self.stats.conflicts_by_type.plain += 1,
            "rectangle" => self.stats.conflicts_by_type.rectangle += 1,
            "corridor" => self.stats.conflicts_by_type.corridor += 1,
            "target" => self.stats.conflicts_by_type.target += 1,
            _ => unreachable!(),
        }
    }
}

fn plain_children(conflict: &Conflict, k: i32) -> Vec<Vec<Constraint>> {
    match conflict.kind {
        ConflictKind::Vertex => {
            let (t, cell) = (conflict.time, conflict.cell);
            vec![
                vec![Constraint::VertexRange { agent: conflict.first, cell, from: t, until: t + k }],
                vec![Constraint::VertexRange { agent: conflict.second, cell, from: t, until: t + k }],
            ]
        }
        ConflictKind::EdgeSwap { first_from } => vec![
            vec![Constraint::Edge {
                agent: conflict.first,
                from_cell: first_from,
                to_cell: conflict.cell,
                at: conflict.time,
            }],
            vec![Constraint::Edge {
                agent: conflict.second,
                from_cell: conflict.cell,
                to_cell: first_from,
                at: conflict.time,
            }],
        ],
    }
}

/// Solve an instance to optimality under the configuration's robustness
/// radius and reasoning toggles.
pub fn solve(instance: &Instance, config: &SolverConfig) -> SolveOutcome {
    solve_observed(instance, config, &mut NoopObserver)
}

/// As `solve`, reporting every branching decision to `observer`.
pub fn solve_observed(
    instance: &Instance,
    config: &SolverConfig,
    observer: &mut dyn SearchObserver,
) -> SolveOutcome {
    let started = Instant::now();
    let mut solver = Solver::new(instance, config);
    let finish_stats = |solver: &mut Solver, started: Instant| {
        solver.stats.wall_time_ms = started.elapsed().as_millis() as u64;
        let total = solver.stats.conflicts_by_type.total();
        solver.stats.rectangle_conflict_ratio = if total == 0 {
            0.0
        } else {
            solver.stats.conflicts_by_type.rectangle as f64 / total as f64
        };
        solver.stats
    };

    // Root: every agent planned under the empty constraint set.
    let mut root_paths = Vec::with_capacity(instance.agents());
    for agent in 0..instance.agents() {
        match solver.plan(&[], agent, 0) {
            Some(p) => root_paths.push(p),
            None => {
                let stats = finish_stats(&mut solver, started);
                return SolveOutcome::Infeasible(stats);
            }
        }
    }
    let root = solver.make_node(Vec::new(), root_paths, 0);

    let mut open: BinaryHeap<OpenEntry> = BinaryHeap::new();
    let mut nodes: Vec<CtNode> = Vec::new();
    let mut seq = 0u64;
    solver.stats.ct_generated += 1;
    open.push(OpenEntry { f: root.f, h: root.h, conflicts: root.resolutions.len(), seq });
    nodes.push(root);

    while let Some(entry) = open.pop() {
        if started.elapsed() > config.time_limit {
            let stats = finish_stats(&mut solver, started);
            return SolveOutcome::Timeout(stats);
        }
        let node_id = entry.seq as usize;
        solver.stats.ct_expanded += 1;

        if nodes[node_id].resolutions.is_empty() {
            let node = &nodes[node_id];
            let stats = finish_stats(&mut solver, started);
            return SolveOutcome::Solved(Solution {
                paths: node.paths.clone(),
                sic: node.g,
                stats,
            });
        }

        let chosen = nodes[node_id]
            .resolutions
            .iter()
            .min_by_key(|r| r.rank())
            .expect("non-empty")
            .clone();
        let children_added: Vec<Vec<Constraint>> = match &chosen.action {
            Action::Plain => plain_children(&chosen.conflict, config.k),
            Action::Symmetry(finding) => {
                let (a, b) = finding.branches(config.k);
                vec![a, b]
            }
        };
        observer.on_branch(&BranchEvent {
            parent_constraints: &nodes[node_id].constraints,
            parent_paths: &nodes[node_id].paths,
            conflict: &chosen.conflict,
            kind: chosen.kind_name(),
            children: &children_added,
        });
        solver.count_resolved(chosen.kind_name());

        for added in children_added {
            let mut constraints = nodes[node_id].constraints.clone();
            constraints.extend(added.iter().copied());
            constraints.sort_unstable();
            constraints.dedup();

            // Replan exactly the agents whose current path the new
            // constraints invalidate.
            let mut paths = nodes[node_id].paths.clone();
            let mut feasible = true;
            let mut replanned_any = false;
            for agent in 0..paths.len() {
                let broken =
                    added.iter().any(|c| c.applies_to(agent) && c.violated_by(agent, &paths[agent]));
                if !broken {
                    continue;
                }
                replanned_any = true;
                match solver.plan(&constraints, agent, paths[agent].cost()) {
                    Some(p) => paths[agent] = p,
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            // Every branch must invalidate someone, or the split cannot
            // advance the search.
            debug_assert!(replanned_any, "branch without progress");
            if !feasible {
                continue;
            }
            let parent_f = nodes[node_id].f;
            let child = solver.make_node(constraints, paths, parent_f);
            solver.stats.ct_generated += 1;
            seq += 1;
            open.push(OpenEntry {
                f: child.f,
                h: child.h,
                conflicts: child.resolutions.len(),
                seq,
            });
            nodes.push(child);
        }
    }

    let stats = finish_stats(&mut solver, started);
    SolveOutcome::Infeasible(stats)
}

/// Stable JSON form of a solution: instance label, robustness radius, cost,
/// per-agent timestep-indexed coordinates and solver statistics.
pub fn solution_json(label: &str, k: i32, solution: &Solution) -> serde_json::Value {
    let paths: Vec<Vec<[i32; 2]>> = solution
        .paths
        .iter()
        .map(|p| p.cells().iter().map(|c| [c.x, c.y]).collect())
        .collect();
    serde_json::json!({
        "instance": label,
        "k": k,
        "sic": solution.sic,
        "paths": paths,
        "stats": solution.stats,
    })
}
