//! Benchmark machinery: solver variants, archetype and random instance
//! generators, CSV/JSON run records and the benchmark loop.

use std::fmt;
use std::io::Write;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{AgentTask, Cell, GridMap, Instance, InstanceError};
use crate::highlevel::{solve, HeuristicMode, SolverConfig};

/// The named solver configurations used in benchmark runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    KCbs,
    KCbsh,
    KCbshRm,
    KCbshRmC,
    KCbshRmCT,
}

pub const ALL_VARIANTS: [Variant; 5] =
    [Variant::KCbs, Variant::KCbsh, Variant::KCbshRm, Variant::KCbshRmC, Variant::KCbshRmCT];

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::KCbs => "KCBS",
            Variant::KCbsh => "KCBSH",
            Variant::KCbshRm => "KCBSH-RM",
            Variant::KCbshRmC => "KCBSH-RM-C",
            Variant::KCbshRmCT => "KCBSH-RM-C-T",
        }
    }

    pub fn parse(text: &str) -> Option<Variant> {
        let canon = text.trim().to_ascii_uppercase();
        ALL_VARIANTS.into_iter().find(|v| v.name() == canon)
    }

    pub fn config(&self, k: i32, time_limit: Duration, seed: u64) -> SolverConfig {
        let (heuristic, rm, c, t) = match self {
            Variant::KCbs => (HeuristicMode::None, false, false, false),
            Variant::KCbsh => (HeuristicMode::CardinalGraph, false, false, false),
            Variant::KCbshRm => (HeuristicMode::CardinalGraph, true, false, false),
            Variant::KCbshRmC => (HeuristicMode::CardinalGraph, true, true, false),
            Variant::KCbshRmCT => (HeuristicMode::CardinalGraph, true, true, true),
        };
        SolverConfig {
            k,
            time_limit,
            rectangle_reasoning: rm,
            corridor_reasoning: c,
            target_reasoning: t,
            heuristic,
            seed,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One benchmark run, i.e. one CSV row.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub map: String,
    pub scen: String,
    pub agents: usize,
    pub k: i32,
    pub variant: Variant,
    pub outcome: &'static str,
    pub sic: Option<i32>,
    pub ct_expanded: u64,
    pub ct_generated: u64,
    pub rectangle_conflict_ratio: f64,
    pub wall_time_ms: u64,
}

pub const CSV_HEADER: &str =
    "map,scen,agents,k,variant,outcome,sic,ct_expanded,ct_generated,rectangle_conflict_ratio,wall_time_ms";

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.4},{}",
            self.map,
            self.scen,
            self.agents,
            self.k,
            self.variant,
            self.outcome,
            self.sic.map_or(String::from(""), |s| s.to_string()),
            self.ct_expanded,
            self.ct_generated,
            self.rectangle_conflict_ratio,
            self.wall_time_ms,
        )
    }

    pub fn json_row(&self) -> serde_json::Value {
        serde_json::json!({
            "map": self.map,
            "scen": self.scen,
            "agents": self.agents,
            "k": self.k,
            "variant": self.variant.name(),
            "outcome": self.outcome,
            "sic": self.sic,
            "ct_expanded": self.ct_expanded,
            "ct_generated": self.ct_generated,
            "rectangle_conflict_ratio": self.rectangle_conflict_ratio,
            "wall_time_ms": self.wall_time_ms,
        })
    }
}

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("scenario {scen} has {available} tasks, need {needed}")]
    NotEnoughTasks { scen: String, available: usize, needed: usize },
    #[error("invalid instance from {scen}: {source}")]
    BadInstance {
        scen: String,
        #[source]
        source: InstanceError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub agent_counts: Vec<usize>,
    pub k_values: Vec<i32>,
    pub variants: Vec<Variant>,
    pub time_limit: Duration,
    pub seed: u64,
}

/// A named scenario: the task list parsed from one `.scen` file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub tasks: Vec<AgentTask>,
}

/// Row sink invoked as each run finishes, so a crash keeps partial results.
pub type RowSink<'a> = &'a mut dyn FnMut(&RunRecord) -> std::io::Result<()>;

/// Stream rows as CSV to a writer, flushing per run.
pub fn csv_sink<W: Write>(out: &mut W) -> impl FnMut(&RunRecord) -> std::io::Result<()> + '_ {
    |record| {
        writeln!(out, "{}", record.csv_row())?;
        out.flush()
    }
}

/// Run every (agents, k, variant, scenario) combination, taking the first
/// `n` tasks of each scenario.
pub fn run_benchmark(
    map_name: &str,
    map: &GridMap,
    scenarios: &[Scenario],
    config: &BenchmarkConfig,
    mut sink: Option<RowSink<'_>>,
) -> Result<Vec<RunRecord>, BenchmarkError> {
    let mut records = Vec::new();
    for &n in &config.agent_counts {
        for &k in &config.k_values {
            for scen in scenarios {
                if scen.tasks.len() < n {
                    return Err(BenchmarkError::NotEnoughTasks {
                        scen: scen.name.clone(),
                        available: scen.tasks.len(),
                        needed: n,
                    });
                }
                let tasks: Vec<AgentTask> = scen.tasks[..n].to_vec();
                let instance = Instance::new(map.clone(), tasks, k).map_err(|source| {
                    BenchmarkError::BadInstance { scen: scen.name.clone(), source }
                })?;
                for &variant in &config.variants {
                    let solver_config = variant.config(k, config.time_limit, config.seed);
                    let outcome = solve(&instance, &solver_config);
                    let stats = outcome.stats();
                    let record = RunRecord {
                        map: map_name.to_string(),
                        scen: scen.name.clone(),
                        agents: n,
                        k,
                        variant,
                        outcome: outcome.label(),
                        sic: outcome.solution().map(|s| s.sic),
                        ct_expanded: stats.ct_expanded,
                        ct_generated: stats.ct_generated,
                        rectangle_conflict_ratio: stats.rectangle_conflict_ratio,
                        wall_time_ms: stats.wall_time_ms,
                    };
                    if let Some(sink) = sink.as_mut() {
                        sink(&record)?;
                    }
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

/// Fraction of solved runs per (agents, k, variant) group, recomputable
/// from the raw rows.
pub fn success_rates(records: &[RunRecord]) -> Vec<((usize, i32, Variant), f64)> {
    let mut groups: Vec<(usize, i32, Variant)> =
        records.iter().map(|r| (r.agents, r.k, r.variant)).collect();
    groups.sort_unstable();
    groups.dedup();
    groups
        .into_iter()
        .map(|g| {
            let members: Vec<&RunRecord> = records
                .iter()
                .filter(|r| (r.agents, r.k, r.variant) == g)
                .collect();
            let solved = members.iter().filter(|r| r.outcome == "solved").count();
            (g, solved as f64 / members.len() as f64)
        })
        .collect()
}

/// The three symmetry archetypes, deterministically constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Archetype {
    /// Two agents crossing an open `side x side` overlap orthogonally.
    Rectangle { side: i32 },
    /// Two agents swapping through a width-1 passage of `length` edges
    /// between two open rooms.
    Corridor { length: i32 },
    /// One agent's goal sits on the other's only short route, `separation`
    /// cells from that agent's start.
    Target { separation: i32 },
}

impl Archetype {
    pub fn parse(text: &str) -> Option<Archetype> {
        let (kind, param) = text.split_once(':')?;
        let param: i32 = param.trim().parse().ok()?;
        if param < 1 {
            return None;
        }
        match kind.trim().to_ascii_lowercase().as_str() {
            "rectangle" => Some(Archetype::Rectangle { side: param }),
            "corridor" => Some(Archetype::Corridor { length: param }),
            "target" => Some(Archetype::Target { separation: param }),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Archetype::Rectangle { side } => format!("rectangle:{side}"),
            Archetype::Corridor { length } => format!("corridor:{length}"),
            Archetype::Target { separation } => format!("target:{separation}"),
        }
    }
}

/// Build the instance for an archetype at robustness radius `k`.
pub fn generate_archetype(kind: Archetype, k: i32) -> Instance {
    match kind {
        Archetype::Rectangle { side } => rectangle_instance(side, k),
        Archetype::Corridor { length } => corridor_instance(length, k),
        Archetype::Target { separation } => target_instance(separation, k),
    }
}

/// Both agents cross the cell block `[1, s] x [1, s]` orthogonally and
/// optimally occupy each shared cell at the same timestep: the pure
/// rectangle symmetry.
fn rectangle_instance(side: i32, k: i32) -> Instance {
    let s = side.max(1);
    let map = GridMap::open(s + 2, s + 2);
    let tasks = vec![
        AgentTask { id: 0, start: Cell::new(1, 0), goal: Cell::new(s, s + 1) },
        AgentTask { id: 1, start: Cell::new(0, 1), goal: Cell::new(s + 1, s) },
    ];
    Instance::new(map, tasks, k).expect("archetype construction is valid")
}

/// A single corridor row between two 2x3 rooms; the agents swap sides.
fn corridor_instance(length: i32, k: i32) -> Instance {
    let l = length.max(2);
    // Corridor endpoints at x = 1 and x = 1 + l; interior strictly between.
    let width = l + 3;
    let mut map = GridMap::open(width, 3);
    for x in 2..=l {
        map.set_passable(Cell::new(x, 0), false);
        map.set_passable(Cell::new(x, 2), false);
    }
    let tasks = vec![
        AgentTask { id: 0, start: Cell::new(0, 1), goal: Cell::new(width - 1, 1) },
        AgentTask { id: 1, start: Cell::new(width - 1, 1), goal: Cell::new(0, 1) },
    ];
    Instance::new(map, tasks, k).expect("archetype construction is valid")
}

/// The blocker finishes one step onto the main row while the other agent
/// still has to pass its goal cell; a short two-cell bypass keeps both
/// resolutions feasible.
fn target_instance(separation: i32, k: i32) -> Instance {
    let d = separation.max(2);
    let width = d + 4;
    let mut map = GridMap::open(width, 2);
    // Top row passable only around the contested goal, forming the bypass.
    for x in 0..width {
        map.set_passable(Cell::new(x, 0), x >= d - 1 && x <= d + 1);
    }
    let tasks = vec![
        AgentTask { id: 0, start: Cell::new(0, 1), goal: Cell::new(width - 1, 1) },
        AgentTask { id: 1, start: Cell::new(d + 1, 1), goal: Cell::new(d, 1) },
    ];
    Instance::new(map, tasks, k).expect("archetype construction is valid")
}

/// A seeded random instance: `obstacle_pct` percent blocked cells, all
/// endpoints distinct, every goal reachable. Retries deterministically
/// within the seed until valid.
pub fn random_instance(
    seed: u64,
    width: i32,
    height: i32,
    obstacle_pct: u32,
    agents: usize,
    k: i32,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let cells = (width * height) as usize;
        let blocked = cells * obstacle_pct as usize / 100;
        let mut order: Vec<usize> = (0..cells).collect();
        order.shuffle(&mut rng);
        let mut passable = vec![true; cells];
        for &i in order.iter().take(blocked) {
            passable[i] = false;
        }
        let map = GridMap::new(width, height, passable);

        let free: Vec<Cell> = (0..height)
            .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
            .filter(|&c| map.is_passable(c))
            .collect();
        if free.len() < agents * 2 {
            continue;
        }
        let mut pick = free.clone();
        pick.shuffle(&mut rng);
        let starts: Vec<Cell> = pick[..agents].to_vec();
        let mut goals: Vec<Cell> = Vec::with_capacity(agents);
        let mut pool: Vec<Cell> = pick[agents..].to_vec();
        let mut ok = true;
        for _ in 0..agents {
            if pool.is_empty() {
                ok = false;
                break;
            }
            let i = rng.gen_range(0..pool.len());
            goals.push(pool.swap_remove(i));
        }
        if !ok {
            continue;
        }
        let tasks: Vec<AgentTask> = starts
            .into_iter()
            .zip(goals)
            .enumerate()
            .map(|(id, (start, goal))| AgentTask { id, start, goal })
            .collect();
        match Instance::new(map, tasks, k) {
            Ok(instance) => return instance,
            Err(_) => continue,
        }
    }
}
