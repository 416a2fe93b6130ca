//! Independent ground truth: a plan validator, a delay-injection simulator
//! and a brute-force optimal solver for desk-scale instances. None of this
//! shares search machinery with the solver it checks.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Cell, GridMap, Instance, MOVES};
use crate::path::Path;

/// First violation found: `first` occupies `cell` at `time`, `second` at
/// `time + delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub cell: Cell,
    pub time: i32,
    pub delay: i32,
}

/// Check the k-robustness condition over every agent pair, cell and time
/// window, with goal-extended occupancy; for k = 0 also checks edge swaps.
pub fn validate_k_robust(paths: &[Path], k: i32) -> Result<(), Violation> {
    let horizon = paths.iter().map(|p| p.cost()).max().unwrap_or(0) + k;
    for a in 0..paths.len() {
        for b in (a + 1)..paths.len() {
            for ta in 0..=horizon {
                for tb in (ta - k).max(0)..=(ta + k).min(horizon) {
                    if paths[a].at(ta) == paths[b].at(tb) {
                        let (first, second, time, delay) = if tb >= ta {
                            (a, b, ta, tb - ta)
                        } else {
                            (b, a, tb, ta - tb)
                        };
                        return Err(Violation {
                            first,
                            second,
                            cell: paths[a].at(ta),
                            time,
                            delay,
                        });
                    }
                }
            }
            if k == 0 {
                for t in 1..=horizon {
                    if paths[a].at(t) == paths[b].at(t - 1) && paths[b].at(t) == paths[a].at(t - 1)
                    {
                        return Err(Violation {
                            first: a,
                            second: b,
                            cell: paths[a].at(t),
                            time: t,
                            delay: 0,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Full plan check against an instance: per-path shape (endpoints,
/// passable 4-adjacent steps) plus the k-robustness condition.
pub fn validate_plan(instance: &Instance, paths: &[Path]) -> Result<(), String> {
    if paths.len() != instance.tasks.len() {
        return Err(format!("expected {} paths, got {}", instance.tasks.len(), paths.len()));
    }
    for (task, path) in instance.tasks.iter().zip(paths) {
        if !path.is_valid_on(&instance.map, task.start, task.goal) {
            return Err(format!("agent {} path is not a valid walk", task.id));
        }
    }
    validate_k_robust(paths, instance.k).map_err(|v| {
        format!(
            "agents {} and {} collide at {} within window [{}, {}]",
            v.first,
            v.second,
            v.cell,
            v.time,
            v.time + v.delay
        )
    })
}

/// Re-time a path by inserting `count` waits at each original index, then
/// return the delayed cell sequence (no canonical trimming).
fn retimed(path: &Path, delays: &[(i32, i32)]) -> Vec<Cell> {
    let mut extra: HashMap<i32, i32> = HashMap::new();
    for &(pos, count) in delays {
        *extra.entry(pos.min(path.cost())).or_insert(0) += count;
    }
    let mut out = Vec::new();
    for (i, &cell) in path.cells().iter().enumerate() {
        out.push(cell);
        for _ in 0..extra.get(&(i as i32)).copied().unwrap_or(0) {
            out.push(cell);
        }
    }
    out
}

fn seq_at(seq: &[Cell], t: i32) -> Cell {
    seq[(t.max(0) as usize).min(seq.len() - 1)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    pub cell: Cell,
    pub time: i32,
}

/// Inject the given per-agent delays and check for exact same-cell
/// collisions (and swaps when k = 0) between the re-timed paths.
pub fn simulate_delays(
    paths: &[Path],
    k: i32,
    delays: &[Vec<(i32, i32)>],
) -> Result<(), Collision> {
    assert_eq!(paths.len(), delays.len());
    for d in delays {
        let total: i32 = d.iter().map(|&(_, c)| c).sum();
        assert!(total <= k, "per-agent delay budget exceeded");
    }
    let seqs: Vec<Vec<Cell>> = paths.iter().zip(delays).map(|(p, d)| retimed(p, d)).collect();
    let horizon = seqs.iter().map(|s| s.len() as i32 - 1).max().unwrap_or(0);
    for a in 0..seqs.len() {
        for b in (a + 1)..seqs.len() {
            for t in 0..=horizon {
                if seq_at(&seqs[a], t) == seq_at(&seqs[b], t) {
                    return Err(Collision { first: a, second: b, cell: seq_at(&seqs[a], t), time: t });
                }
                if k == 0
                    && t >= 1
                    && seq_at(&seqs[a], t) == seq_at(&seqs[b], t - 1)
                    && seq_at(&seqs[b], t) == seq_at(&seqs[a], t - 1)
                {
                    return Err(Collision { first: a, second: b, cell: seq_at(&seqs[a], t), time: t });
                }
            }
        }
    }
    Ok(())
}

/// All ways to distribute at most `budget` waits over positions
/// `0..=cost`, as delay lists.
pub fn delay_placements(cost: i32, budget: i32) -> Vec<Vec<(i32, i32)>> {
    fn rec(pos: i32, cost: i32, left: i32, cur: &mut Vec<(i32, i32)>, out: &mut Vec<Vec<(i32, i32)>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for p in pos..=cost {
            for count in 1..=left {
                cur.push((p, count));
                rec(p + 1, cost, left - count, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, cost, budget, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// Certify a plan by delay injection. Exhaustive over all pairwise delay
/// placements when paths are short (cost <= 10) and the team is small
/// (<= 3 agents); a seeded sample of joint delay vectors otherwise.
/// Collisions are pairwise, so pairwise exhaustion covers every joint
/// delay vector.
pub fn certify_by_delays(paths: &[Path], k: i32, seed: u64) -> Result<(), Collision> {
    let small = paths.len() <= 3 && paths.iter().all(|p| p.cost() <= 10);
    if small {
        for a in 0..paths.len() {
            for b in (a + 1)..paths.len() {
                let pa = delay_placements(paths[a].cost(), k);
                let pb = delay_placements(paths[b].cost(), k);
                for da in &pa {
                    for db in &pb {
                        let pair = [paths[a].clone(), paths[b].clone()];
                        if let Err(mut hit) =
                            simulate_delays(&pair, k, &[da.clone(), db.clone()])
                        {
                            hit.first = a;
                            hit.second = b;
                            return Err(hit);
                        }
                    }
                }
            }
        }
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..512 {
        let delays: Vec<Vec<(i32, i32)>> = paths
            .iter()
            .map(|p| {
                let total = rng.gen_range(0..=k);
                (0..total).map(|_| (rng.gen_range(0..=p.cost()), 1)).collect()
            })
            .collect();
        simulate_delays(paths, k, &delays)?;
    }
    Ok(())
}

/// Every canonical path of exactly `cost` steps from `start` to `goal`
/// (waits and revisits allowed, no trailing goal-wait). `None` when the
/// enumeration exceeds `cap` paths.
pub fn paths_with_cost(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    cost: i32,
    cap: usize,
) -> Option<Vec<Path>> {
    let dist = map.bfs_distances(goal);
    let d = |c: Cell| dist[(c.y * map.width() + c.x) as usize];
    d(start)?;
    let mut out = Vec::new();
    let mut stack = vec![start];
    fn rec(
        map: &GridMap,
        d: &dyn Fn(Cell) -> Option<i32>,
        goal: Cell,
        cost: i32,
        stack: &mut Vec<Cell>,
        out: &mut Vec<Path>,
        cap: usize,
    ) -> bool {
        let t = stack.len() as i32 - 1;
        if t == cost {
            let arrived = *stack.last().unwrap() == goal
                && (cost == 0 || stack[stack.len() - 2] != goal);
            if arrived {
                if out.len() == cap {
                    return false;
                }
                out.push(Path::new(stack.clone()));
            }
            return true;
        }
        let here = *stack.last().unwrap();
        for (dx, dy) in MOVES.iter().copied().chain(std::iter::once((0, 0))) {
            let next = Cell::new(here.x + dx, here.y + dy);
            if !map.is_passable(next) {
                continue;
            }
            match d(next) {
                Some(h) if t + 1 + h <= cost => {}
                _ => continue,
            }
            stack.push(next);
            let ok = rec(map, d, goal, cost, stack, out, cap);
            stack.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    if rec(map, &d, goal, cost, &mut stack, &mut out, cap) {
        Some(out)
    } else {
        None
    }
}

/// Every canonical path of cost at most `max_cost`.
pub fn paths_up_to_cost(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    max_cost: i32,
    cap: usize,
) -> Option<Vec<Path>> {
    let mut out = Vec::new();
    for cost in 0..=max_cost {
        let mut batch = paths_with_cost(map, start, goal, cost, cap.saturating_sub(out.len()))?;
        out.append(&mut batch);
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleResult {
    Optimal(i32),
    /// The combination budget ran out before a feasible plan was found; the
    /// instance may be infeasible or merely too large for the oracle.
    OutOfBudget,
}

pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

/// Iterative deepening over the sum of costs: enumerate every per-agent
/// path combination at each bound and validate it, returning the least
/// feasible sum. `budget` caps the number of combinations tried.
pub fn brute_force_optimal(instance: &Instance) -> OracleResult {
    brute_force_optimal_with_budget(instance, DEFAULT_ORACLE_BUDGET)
}

pub fn brute_force_optimal_with_budget(instance: &Instance, budget: u64) -> OracleResult {
    let lower: Vec<i32> = instance
        .tasks
        .iter()
        .map(|t| {
            let dist = instance.map.bfs_distances(t.goal);
            dist[(t.start.y * instance.map.width() + t.start.x) as usize]
                .expect("instance validated reachable")
        })
        .collect();
    let base: i32 = lower.iter().sum();
    let mut enumerator = Enumerator {
        instance,
        lower,
        cache: HashMap::new(),
        spent: 0,
        budget,
        path_cap: 200_000,
    };
    let mut bound = base;
    loop {
        match enumerator.feasible_at(bound) {
            Ok(true) => return OracleResult::Optimal(bound),
            Ok(false) => bound += 1,
            Err(Exhausted) => return OracleResult::OutOfBudget,
        }
    }
}

struct Exhausted;

struct Enumerator<'a> {
    instance: &'a Instance,
    lower: Vec<i32>,
    cache: HashMap<(usize, i32), Rc<Vec<Path>>>,
    spent: u64,
    budget: u64,
    path_cap: usize,
}

impl Enumerator<'_> {
    fn paths(&mut self, agent: usize, cost: i32) -> Result<Rc<Vec<Path>>, Exhausted> {
        if let Some(hit) = self.cache.get(&(agent, cost)) {
            return Ok(Rc::clone(hit));
        }
        let task = &self.instance.tasks[agent];
        let paths = paths_with_cost(&self.instance.map, task.start, task.goal, cost, self.path_cap)
            .ok_or(Exhausted)?;
        let rc = Rc::new(paths);
        self.cache.insert((agent, cost), Rc::clone(&rc));
        Ok(rc)
    }

    /// Any k-robust plan whose costs sum exactly to `bound`?
    fn feasible_at(&mut self, bound: i32) -> Result<bool, Exhausted> {
        let slack = bound - self.lower.iter().sum::<i32>();
        let mut combo: Vec<Rc<Vec<Path>>> = Vec::with_capacity(self.instance.tasks.len());
        self.split(0, slack, &mut combo)
    }

    fn split(
        &mut self,
        agent: usize,
        slack_left: i32,
        combo: &mut Vec<Rc<Vec<Path>>>,
    ) -> Result<bool, Exhausted> {
        let n = self.instance.tasks.len();
        if agent == n {
            if slack_left != 0 {
                return Ok(false);
            }
            let mut current = vec![0usize; n];
            return self.cartesian(combo, &mut current, 0);
        }
        for extra in 0..=slack_left {
            let paths = self.paths(agent, self.lower[agent] + extra)?;
            if paths.is_empty() {
                continue;
            }
            combo.push(paths);
            let hit = self.split(agent + 1, slack_left - extra, combo)?;
            combo.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn cartesian(
        &mut self,
        combo: &[Rc<Vec<Path>>],
        current: &mut [usize],
        agent: usize,
    ) -> Result<bool, Exhausted> {
        if agent == combo.len() {
            self.spent += 1;
            if self.spent > self.budget {
                return Err(Exhausted);
            }
            let plan: Vec<Path> =
                combo.iter().zip(current.iter()).map(|(ps, &i)| ps[i].clone()).collect();
            return Ok(validate_k_robust(&plan, self.instance.k).is_ok());
        }
        for i in 0..combo[agent].len() {
            current[agent] = i;
            if self.cartesian(combo, current, agent + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AgentTask;

    fn c(x: i32, y: i32) -> Cell {
        Cell::new(x, y)
    }

    fn path(cells: &[(i32, i32)]) -> Path {
        Path::new(cells.iter().map(|&(x, y)| c(x, y)).collect())
    }

    #[test]
    fn validator_window_arithmetic() {
        // Paths sharing (2,2) at t=3 and t=5 are fine for k <= 1, violating
        // for k >= 2.
        let p0 = path(&[(0, 2), (1, 2), (1, 2), (2, 2), (3, 2), (3, 3)]);
        let p1 = path(&[(2, 0), (2, 1), (2, 1), (2, 1), (2, 1), (2, 2), (2, 3)]);
        assert!(validate_k_robust(&[p0.clone(), p1.clone()], 0).is_ok());
        assert!(validate_k_robust(&[p0.clone(), p1.clone()], 1).is_ok());
        let err = validate_k_robust(&[p0.clone(), p1.clone()], 2).unwrap_err();
        assert_eq!(err.cell, c(2, 2));
        assert_eq!((err.time, err.delay), (3, 2));
        assert!(validate_k_robust(&[p0, p1], 5).is_err());
    }

    #[test]
    fn disjoint_straight_lines_always_ok() {
        let p0 = path(&[(0, 0), (1, 0), (2, 0)]);
        let p1 = path(&[(0, 3), (1, 3), (2, 3)]);
        for k in 0..=5 {
            assert!(validate_k_robust(&[p0.clone(), p1.clone()], k).is_ok());
        }
    }

    #[test]
    fn k_zero_swap_caught() {
        let p0 = path(&[(0, 0), (1, 0)]);
        let p1 = path(&[(1, 0), (0, 0)]);
        assert!(validate_k_robust(&[p0, p1], 0).is_err());
    }

    #[test]
    fn zero_delays_keep_valid_plan_valid() {
        let p0 = path(&[(0, 0), (1, 0), (2, 0)]);
        let p1 = path(&[(0, 2), (1, 2), (2, 2)]);
        assert!(simulate_delays(&[p0, p1], 2, &[vec![], vec![]]).is_ok());
    }

    #[test]
    fn inserted_delay_exposes_non_robust_crossing() {
        // Valid for k=0 but not 1-robust: delaying the first agent by one
        // step collides at (1,0).
        let p0 = path(&[(0, 0), (1, 0), (2, 0)]);
        let p1 = path(&[(1, 1), (1, 1), (1, 0), (1, 1)]);
        assert!(validate_k_robust(&[p0.clone(), p1.clone()], 0).is_ok());
        assert!(simulate_delays(&[p0.clone(), p1.clone()], 1, &[vec![], vec![]]).is_ok());
        let hit = simulate_delays(&[p0, p1], 1, &[vec![(0, 1)], vec![]]).unwrap_err();
        assert_eq!(hit.cell, c(1, 0));
        assert_eq!(hit.time, 2);
    }

    #[test]
    fn delay_placement_counts() {
        // cost 2, budget 1: empty + one wait at each of 3 positions.
        assert_eq!(delay_placements(2, 1).len(), 4);
        // cost 1, budget 2: empty, (0,1),(0,2),(1,1),(1,2),(0,1)+(1,1).
        assert_eq!(delay_placements(1, 2).len(), 6);
    }

    #[test]
    fn certification_matches_validation() {
        let good = [path(&[(0, 0), (1, 0), (2, 0)]), path(&[(0, 2), (1, 2), (2, 2)])];
        assert!(validate_k_robust(&good, 2).is_ok());
        assert!(certify_by_delays(&good, 2, 7).is_ok());

        let tight =
            [path(&[(0, 0), (1, 0), (2, 0)]), path(&[(1, 1), (1, 1), (1, 0), (1, 1)])];
        // Fine at k=0 but the delay equivalence breaks it at k=1.
        assert!(validate_k_robust(&tight, 0).is_ok());
        assert!(validate_k_robust(&tight, 1).is_err());
        assert!(certify_by_delays(&tight, 1, 7).is_err());
    }

    #[test]
    fn brute_force_single_agent_is_manhattan() {
        let map = GridMap::open(5, 5);
        let tasks = vec![AgentTask { id: 0, start: c(0, 0), goal: c(3, 2) }];
        let instance = Instance::new(map, tasks, 1).unwrap();
        assert_eq!(brute_force_optimal(&instance), OracleResult::Optimal(5));
    }

    #[test]
    fn brute_force_corridor_swap() {
        // Swapping ends of a bare 1x4 corridor never resolves: the budget
        // guard fires. One siding cell makes it finite.
        let bare = GridMap::from_ascii(&["....", "@@@@"]);
        let tasks = vec![
            AgentTask { id: 0, start: c(0, 0), goal: c(3, 0) },
            AgentTask { id: 1, start: c(3, 0), goal: c(0, 0) },
        ];
        let instance = Instance::new(bare, tasks.clone(), 0).unwrap();
        assert_eq!(
            brute_force_optimal_with_budget(&instance, 50_000),
            OracleResult::OutOfBudget
        );

        let siding = GridMap::from_ascii(&["....", "@.@@"]);
        let instance = Instance::new(siding, tasks, 0).unwrap();
        match brute_force_optimal_with_budget(&instance, 1_000_000) {
            OracleResult::Optimal(sic) => assert_eq!(sic, 8),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn path_enumeration_counts() {
        let map = GridMap::open(4, 4);
        // Manhattan-optimal paths between diagonal corners: C(4,2) = 6.
        let got = paths_with_cost(&map, c(0, 0), c(2, 2), 4, 10_000).unwrap();
        assert_eq!(got.len(), 6);
        // Cost 5 adds exactly one non-trailing wait: 4 slots per
        // monotone path.
        let got = paths_with_cost(&map, c(0, 0), c(2, 2), 5, 10_000).unwrap();
        assert_eq!(got.len(), 24);
        assert!(got.iter().all(|p| p.cost() == 5));
        // Cost 6: two waits or a detour; all canonical.
        let got = paths_with_cost(&map, c(0, 0), c(2, 2), 6, 10_000).unwrap();
        assert!(!got.is_empty());
        assert!(got.iter().all(|p| p.cost() == 6));
    }
}
