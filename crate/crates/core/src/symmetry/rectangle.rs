//! k-delay rectangle conflicts: detection, two-way branching and
//! cardinality classification via k-cost diagrams.

use crate::conflict::{Cardinality, Conflict, ConflictKind};
use crate::constraint::Constraint;
use crate::grid::{Cell, GridMap};
use crate::mdd::Mdd;
use crate::path::Path;

use super::{
    barrier_violated, step_temporal_barrier, Axis, RangeConstraint, VertexTime,
};

/// A resolved rectangle conflict between the conflict's `first` and
/// `second` agents. Each agent's own entrance/exit lines are shifted by
/// half its wait budget along its crossing axis; the temporal width of its
/// barriers is the other agent's budget.
#[derive(Debug, Clone)]
pub struct RectangleFinding {
    pub first: usize,
    pub second: usize,
    /// Corner both agents enter through and corner they leave through.
    pub root: Cell,
    pub opposite: Cell,
    pub root_time: i32,
    pub root_time_first: i32,
    pub root_time_second: i32,
    /// Chosen wait budgets for the first and second agent.
    pub budget_first: i32,
    pub budget_second: i32,
    pub shift_first: i32,
    pub shift_second: i32,
    pub origin_first: VertexTime,
    pub origin_second: VertexTime,
    pub entrance_first: Vec<RangeConstraint>,
    pub exit_first: Vec<RangeConstraint>,
    pub entrance_second: Vec<RangeConstraint>,
    pub exit_second: Vec<RangeConstraint>,
    pub cardinality: Cardinality,
}

/// Instrumentation for the candidate enumeration: which budget pairs were
/// actually evaluated and which were accepted.
#[derive(Debug, Default)]
pub struct DetectionProbe {
    pub tested: Vec<(i32, i32)>,
    pub accepted: Vec<(i32, i32)>,
}

/// The direction-and-segment analysis shared by every candidate.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub root: Cell,
    pub opposite: Cell,
    pub root_time: i32,
    pub root_time_first: i32,
    pub root_time_second: i32,
    pub first_vertical: bool,
    pub dir_first: (i32, i32),
    pub dir_second: (i32, i32),
    pub seg_begin_first: Cell,
    pub seg_end_first: Cell,
    pub seg_begin_second: Cell,
    pub seg_end_second: Cell,
}

fn step_of(path: &Path, t: i32) -> Option<(i32, i32)> {
    let to = path.at_exact(t)?;
    let from = path.at_exact(t - 1)?;
    Some((to.x - from.x, to.y - from.y))
}

fn direction_at(path: &Path, t: i32) -> Option<(i32, i32)> {
    match step_of(path, t) {
        Some((0, 0)) | None => None,
        Some(d) => Some(d),
    }
}

fn segment_back(path: &Path, t: i32, dirs: [(i32, i32); 2]) -> (Cell, i32) {
    let mut tau = t;
    while tau >= 1 && step_of(path, tau).is_some_and(|s| s == dirs[0] || s == dirs[1]) {
        tau -= 1;
    }
    let cell = path.at(tau);
    // Earliest visit of the segment-begin cell.
    let t_b = path.visits(cell).next().unwrap_or(tau);
    (cell, t_b)
}

fn segment_forward(path: &Path, t: i32, dirs: [(i32, i32); 2]) -> Cell {
    let mut tau = t;
    while tau + 1 <= path.cost()
        && step_of(path, tau + 1).is_some_and(|s| s == dirs[0] || s == dirs[1])
    {
        tau += 1;
    }
    path.at(tau)
}

fn closer(a: i32, b: i32, to: i32) -> i32 {
    if (a - to).abs() <= (b - to).abs() {
        a
    } else {
        b
    }
}

/// Entry directions, crossing segments, rooted rectangle corners and root
/// times for a vertex conflict. `None` when the agents do not cross
/// orthogonally.
pub fn extract_geometry(
    conflict: &Conflict,
    path_first: &Path,
    path_second: &Path,
) -> Option<Geometry> {
    if conflict.kind != ConflictKind::Vertex {
        return None;
    }
    let v = conflict.cell;
    let t1 = conflict.time;
    let t2 = conflict.time + conflict.delay;
    let d1 = direction_at(path_first, t1)?;
    let d2 = direction_at(path_second, t2)?;
    if d1 == d2 {
        // Same direction: there is an earlier conflict where both came from.
        return None;
    }
    if d1.0 == -d2.0 && d1.1 == -d2.1 {
        // Opposite directions never form a rectangle.
        return None;
    }
    let dirs = [d1, d2];
    let (b1, tb1) = segment_back(path_first, t1, dirs);
    let (b2, tb2) = segment_back(path_second, t2, dirs);
    let a1 = segment_forward(path_first, t1, dirs);
    let a2 = segment_forward(path_second, t2, dirs);

    let root = Cell::new(closer(b1.x, b2.x, v.x), closer(b1.y, b2.y, v.y));
    let opposite = Cell::new(closer(a1.x, a2.x, v.x), closer(a1.y, a2.y, v.y));
    let rt1 = tb1 + b1.manhattan(root);
    let rt2 = tb2 + b2.manhattan(root);

    let first_vertical = d1.1 != 0;
    let (dv, dh) = if first_vertical { (d1, d2) } else { (d2, d1) };
    // The rectangle must lie downstream of the root for both agents.
    if (opposite.y - root.y) * dv.1 < 0 || (opposite.x - root.x) * dh.0 < 0 {
        return None;
    }
    Some(Geometry {
        root,
        opposite,
        root_time: rt1.min(rt2),
        root_time_first: rt1,
        root_time_second: rt2,
        first_vertical,
        dir_first: d1,
        dir_second: d2,
        seg_begin_first: b1,
        seg_end_first: a1,
        seg_begin_second: b2,
        seg_end_second: a2,
    })
}

/// Condition for sound two-way branching: after deleting every diagram node
/// inside the entrance barrier, no start-reachable node (or surviving
/// goal-hold completion) lies inside the exit barrier.
pub fn entrance_covers_exit(
    mdd: &Mdd,
    entrance: &[RangeConstraint],
    exit: &[RangeConstraint],
) -> bool {
    if exit.is_empty() {
        return true;
    }
    let removed = |cell: Cell, t: i32| entrance.iter().any(|r| r.hits(cell, t));
    let reach = mdd.reachable_nodes(&removed);
    for (t, level) in reach.iter().enumerate() {
        for &cell in level {
            if exit.iter().any(|r| r.hits(cell, t as i32)) {
                return false;
            }
        }
    }
    // A surviving completion sits on the goal forever; an exit window on the
    // goal cell at or beyond the earliest surviving completion still counts
    // as reaching the exit.
    let goal = mdd.goal();
    let depth = mdd.depth();
    if !reach[depth as usize].contains(&goal) {
        return true;
    }
    let mut earliest = depth;
    let mut t = depth;
    while t > 0 && !removed(goal, t - 1) && mdd.has_edge(goal, t - 1, goal) {
        t -= 1;
        if reach[t as usize].contains(&goal) {
            earliest = t;
        } else {
            break;
        }
    }
    !exit.iter().any(|r| r.cell == goal && r.until >= earliest)
}

/// Cardinal when every in-budget path of both agents crosses its exit
/// barrier; semi-cardinal when exactly one agent is forced.
pub fn rectangle_cardinality(
    mdd_first: &Mdd,
    exit_first: &[RangeConstraint],
    mdd_second: &Mdd,
    exit_second: &[RangeConstraint],
) -> Cardinality {
    let forced = |mdd: &Mdd, exit: &[RangeConstraint]| {
        let removed = |cell: Cell, t: i32| exit.iter().any(|r| r.hits(cell, t));
        !mdd.goal_reachable_without(&removed)
    };
    match (forced(mdd_first, exit_first), forced(mdd_second, exit_second)) {
        (true, true) => Cardinality::Cardinal,
        (true, false) | (false, true) => Cardinality::SemiCardinal,
        (false, false) => Cardinality::NonCardinal,
    }
}

struct Candidate {
    budget_first: i32,
    budget_second: i32,
    entrance_first: Vec<RangeConstraint>,
    exit_first: Vec<RangeConstraint>,
    entrance_second: Vec<RangeConstraint>,
    exit_second: Vec<RangeConstraint>,
    origin_first: VertexTime,
    origin_second: VertexTime,
    cardinality: Cardinality,
}

struct RoleView<'a> {
    path: &'a Path,
    mdd: &'a Mdd,
    seg_begin: Cell,
    seg_end: Cell,
    dir: (i32, i32),
}

type CandidateBarriers = (
    Vec<RangeConstraint>,
    Vec<RangeConstraint>,
    Vec<RangeConstraint>,
    Vec<RangeConstraint>,
    VertexTime,
    VertexTime,
);

fn build_candidate(
    geo: &Geometry,
    vertical: &RoleView,
    horizontal: &RoleView,
    budget_vertical: i32,
    budget_horizontal: i32,
    map: &GridMap,
) -> Option<CandidateBarriers> {
    let (d, e, rt) = (geo.root, geo.opposite, geo.root_time);
    let dy = vertical.dir.1.signum();
    let dx = horizontal.dir.0.signum();
    let shift_v = budget_vertical / 2;
    let shift_h = budget_horizontal / 2;
    if rt - shift_v < 0 || rt - shift_h < 0 {
        return None;
    }
    // Shifted lines may not pass the agents' crossing-segment endpoints.
    if (d.y - vertical.seg_begin.y) * dy < shift_v || (vertical.seg_end.y - e.y) * dy < shift_v {
        return None;
    }
    if (d.x - horizontal.seg_begin.x) * dx < shift_h
        || (horizontal.seg_end.x - e.x) * dx < shift_h
    {
        return None;
    }

    let y_enter = d.y - dy * shift_v;
    let y_exit = e.y + dy * shift_v;
    let x_enter = d.x - dx * shift_h;
    let x_exit = e.x + dx * shift_h;
    let x_span = (d.x.min(e.x), d.x.max(e.x));
    let y_span = (d.y.min(e.y), d.y.max(e.y));
    let horizontal_line = |y: i32| -> Option<Vec<Cell>> {
        let cells: Vec<Cell> = (x_span.0..=x_span.1).map(|x| Cell::new(x, y)).collect();
        cells.iter().all(|&c| map.is_passable(c)).then_some(cells)
    };
    let vertical_line = |x: i32| -> Option<Vec<Cell>> {
        let cells: Vec<Cell> = (y_span.0..=y_span.1).map(|y| Cell::new(x, y)).collect();
        cells.iter().all(|&c| map.is_passable(c)).then_some(cells)
    };

    let origin_v = VertexTime { cell: Cell::new(d.x, y_enter), time: rt - shift_v };
    let origin_h = VertexTime { cell: Cell::new(x_enter, d.y), time: rt - shift_h };
    // Temporal width pairs across: each agent's barriers are as wide as the
    // other agent's wait budget.
    let width_v = budget_horizontal;
    let width_h = budget_vertical;

    let entrance_v = step_temporal_barrier(
        &horizontal_line(y_enter)?,
        Axis::Horizontal,
        origin_v,
        width_v,
        map,
        Some(vertical.mdd),
    );
    let exit_v = step_temporal_barrier(
        &horizontal_line(y_exit)?,
        Axis::Horizontal,
        origin_v,
        width_v,
        map,
        Some(vertical.mdd),
    );
    let entrance_h = step_temporal_barrier(
        &vertical_line(x_enter)?,
        Axis::Vertical,
        origin_h,
        width_h,
        map,
        Some(horizontal.mdd),
    );
    let exit_h = step_temporal_barrier(
        &vertical_line(x_exit)?,
        Axis::Vertical,
        origin_h,
        width_h,
        map,
        Some(horizontal.mdd),
    );

    if !barrier_violated(&exit_v, vertical.path) || !barrier_violated(&exit_h, horizontal.path) {
        return None;
    }
    if !entrance_covers_exit(vertical.mdd, &entrance_v, &exit_v)
        || !entrance_covers_exit(horizontal.mdd, &entrance_h, &exit_h)
    {
        return None;
    }
    Some((entrance_v, exit_v, entrance_h, exit_h, origin_v, origin_h))
}

/// The full detection procedure: orthogonal-crossing geometry, then budget
/// pairs `(b1, b2)` tried in decreasing order with dominance skipping:
/// once `(a, b)` is accepted no pair dominated by it is evaluated. Among
/// accepted candidates the finding keeps the highest cardinality class,
/// then the largest combined budget.
#[allow(clippy::too_many_arguments)]
pub fn detect_rectangle(
    conflict: &Conflict,
    path_first: &Path,
    path_second: &Path,
    k: i32,
    mdd_first: &Mdd,
    mdd_second: &Mdd,
    map: &GridMap,
    mut probe: Option<&mut DetectionProbe>,
) -> Option<RectangleFinding> {
    let geo = extract_geometry(conflict, path_first, path_second)?;

    let view_first = RoleView {
        path: path_first,
        mdd: mdd_first,
        seg_begin: geo.seg_begin_first,
        seg_end: geo.seg_end_first,
        dir: geo.dir_first,
    };
    let view_second = RoleView {
        path: path_second,
        mdd: mdd_second,
        seg_begin: geo.seg_begin_second,
        seg_end: geo.seg_end_second,
        dir: geo.dir_second,
    };

    let mut candidates: Vec<Candidate> = Vec::new();
    for budget_first in (0..=k).rev() {
        for budget_second in (0..=k).rev() {
            if candidates
                .iter()
                .any(|c| budget_first <= c.budget_first && budget_second <= c.budget_second)
            {
                continue;
            }
            if let Some(p) = &mut probe {
                p.tested.push((budget_first, budget_second));
            }
            let (vertical, horizontal, bv, bh) = if geo.first_vertical {
                (&view_first, &view_second, budget_first, budget_second)
            } else {
                (&view_second, &view_first, budget_second, budget_first)
            };
            let Some((ent_v, exit_v, ent_h, exit_h, origin_v, origin_h)) =
                build_candidate(&geo, vertical, horizontal, bv, bh, map)
            else {
                continue;
            };
            if let Some(p) = &mut probe {
                p.accepted.push((budget_first, budget_second));
            }
            let (entrance_first, exit_first, entrance_second, exit_second, origin_first, origin_second) =
                if geo.first_vertical {
                    (ent_v, exit_v, ent_h, exit_h, origin_v, origin_h)
                } else {
                    (ent_h, exit_h, ent_v, exit_v, origin_h, origin_v)
                };
            let cardinality =
                rectangle_cardinality(mdd_first, &exit_first, mdd_second, &exit_second);
            candidates.push(Candidate {
                budget_first,
                budget_second,
                entrance_first,
                exit_first,
                entrance_second,
                exit_second,
                origin_first,
                origin_second,
                cardinality,
            });
        }
    }

    let best = candidates.into_iter().min_by_key(|c| {
        (c.cardinality, std::cmp::Reverse(c.budget_first + c.budget_second), std::cmp::Reverse(c.budget_first))
    })?;
    Some(RectangleFinding {
        first: conflict.first,
        second: conflict.second,
        root: geo.root,
        opposite: geo.opposite,
        root_time: geo.root_time,
        root_time_first: geo.root_time_first,
        root_time_second: geo.root_time_second,
        budget_first: best.budget_first,
        budget_second: best.budget_second,
        shift_first: best.budget_first / 2,
        shift_second: best.budget_second / 2,
        origin_first: best.origin_first,
        origin_second: best.origin_second,
        entrance_first: best.entrance_first,
        exit_first: best.exit_first,
        entrance_second: best.entrance_second,
        exit_second: best.exit_second,
        cardinality: best.cardinality,
    })
}

/// Two-way branching on the exit barriers: one child constrains each agent
/// with its full exit barrier.
pub fn rectangle_branches(finding: &RectangleFinding) -> (Vec<Constraint>, Vec<Constraint>) {
    (
        finding.exit_first.iter().map(|r| r.for_agent(finding.first)).collect(),
        finding.exit_second.iter().map(|r| r.for_agent(finding.second)).collect(),
    )
}
