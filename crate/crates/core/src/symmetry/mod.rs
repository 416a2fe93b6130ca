//! Pairwise symmetry reasoning: rectangle, corridor and target findings and
//! the branch constraint sets that resolve them.

mod corridor;
mod rectangle;
mod target;

pub use corridor::{corridor_branches, detect_corridor, CorridorFinding};
pub use rectangle::{
    detect_rectangle, entrance_covers_exit, rectangle_branches, rectangle_cardinality,
    DetectionProbe, RectangleFinding,
};
pub use target::{detect_target, target_branches, TargetFinding};

use crate::constraint::Constraint;
use crate::grid::{Cell, GridMap};
use crate::mdd::Mdd;
use crate::path::Path;

/// A vertex-time pair anchoring a barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexTime {
    pub cell: Cell,
    pub time: i32,
}

/// Manhattan-optimal arrival time at `v` when starting from `p`.
pub fn optimal_time(p: VertexTime, v: Cell) -> i32 {
    p.time + (v.x - p.cell.x).abs() + (v.y - p.cell.y).abs()
}

/// One barrier element: a closed forbidden window on a cell, independent of
/// the agent it will be issued to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RangeConstraint {
    pub cell: Cell,
    pub from: i32,
    pub until: i32,
}

impl RangeConstraint {
    pub fn hits(&self, cell: Cell, t: i32) -> bool {
        cell == self.cell && t >= self.from && t <= self.until
    }

    /// Goal-extended occupancy check against a finished path.
    pub fn violated_by(&self, path: &Path) -> bool {
        if self.from > self.until {
            return false;
        }
        let hi = self.until.min(path.cost());
        if (self.from..=hi).any(|t| path.at(t) == self.cell) {
            return true;
        }
        path.goal() == self.cell && self.until >= path.cost()
    }

    pub fn for_agent(&self, agent: usize) -> Constraint {
        Constraint::VertexRange { agent, cell: self.cell, from: self.from, until: self.until }
    }
}

/// Whether any element of a barrier is violated by the path.
pub fn barrier_violated(barrier: &[RangeConstraint], path: &Path) -> bool {
    barrier.iter().any(|r| r.violated_by(path))
}

/// Orientation of a barrier line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Cells share a `y`; the line (and its extensions) varies in `x`.
    Horizontal,
    /// Cells share an `x`; the line varies in `y`.
    Vertical,
}

/// The plain temporal barrier: each cell of the side is forbidden at its
/// optimal time from `p`, or up to `width` timesteps later.
pub fn temporal_barrier(cells: &[Cell], p: VertexTime, width: i32) -> Vec<RangeConstraint> {
    debug_assert!(width >= 0);
    cells
        .iter()
        .map(|&v| {
            let ot = optimal_time(p, v);
            RangeConstraint { cell: v, from: ot, until: ot + width }
        })
        .collect()
}

/// A temporal barrier whose extension cells beyond both ends of the line
/// carry windows narrowed by 2 per cell of distance. Extension cells that
/// leave the map, are blocked, or never appear in the agent's k-cost
/// diagram are omitted; with `width` 0 there are no extensions.
pub fn step_temporal_barrier(
    cells: &[Cell],
    axis: Axis,
    p: VertexTime,
    width: i32,
    map: &GridMap,
    mdd: Option<&Mdd>,
) -> Vec<RangeConstraint> {
    let mut out = temporal_barrier(cells, p, width);
    let reach = width / 2;
    if reach == 0 || cells.is_empty() {
        return out;
    }
    let (lo, hi) = match axis {
        Axis::Horizontal => (
            cells.iter().map(|c| c.x).min().unwrap(),
            cells.iter().map(|c| c.x).max().unwrap(),
        ),
        Axis::Vertical => (
            cells.iter().map(|c| c.y).min().unwrap(),
            cells.iter().map(|c| c.y).max().unwrap(),
        ),
    };
    let anchor = cells[0];
    let make = |coord: i32| match axis {
        Axis::Horizontal => Cell::new(coord, anchor.y),
        Axis::Vertical => Cell::new(anchor.x, coord),
    };
    for d in 1..=reach {
        let narrowed = width - 2 * d;
        if narrowed < 0 {
            continue;
        }
        for v in [make(lo - d), make(hi + d)] {
            if !map.is_passable(v) {
                continue;
            }
            if let Some(mdd) = mdd {
                if !mdd.contains_cell(v) {
                    continue;
                }
            }
            let ot = optimal_time(p, v);
            out.push(RangeConstraint { cell: v, from: ot, until: ot + narrowed });
        }
    }
    out
}

/// A rooted rectangle: `root` is the corner both agents enter through,
/// `opposite` the corner they leave through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub root: Cell,
    pub opposite: Cell,
}

/// The four sides of a rooted rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Horizontal line through the root corner.
    HorizontalRoot,
    /// Vertical line through the root corner.
    VerticalRoot,
    /// Vertical line through the opposite corner.
    VerticalOpposite,
    /// Horizontal line through the opposite corner.
    HorizontalOpposite,
}

/// The side's cells translated `shift` cells outward, away from the center
/// of the rectangle. Returns `None` when the shift direction is ambiguous
/// (degenerate rectangle) or the line leaves the map.
pub fn shifted_side(rect: &Rect, side: Side, shift: i32, map: &GridMap) -> Option<Vec<Cell>> {
    debug_assert!(shift >= 0);
    let (d, e) = (rect.root, rect.opposite);
    let (fixed, dir, span) = match side {
        Side::HorizontalRoot => (d.y, (d.y - e.y).signum(), (d.x.min(e.x), d.x.max(e.x))),
        Side::HorizontalOpposite => (e.y, (e.y - d.y).signum(), (d.x.min(e.x), d.x.max(e.x))),
        Side::VerticalRoot => (d.x, (d.x - e.x).signum(), (d.y.min(e.y), d.y.max(e.y))),
        Side::VerticalOpposite => (e.x, (e.x - d.x).signum(), (d.y.min(e.y), d.y.max(e.y))),
    };
    if shift > 0 && dir == 0 {
        return None;
    }
    let moved = fixed + dir * shift;
    let cells: Vec<Cell> = match side {
        Side::HorizontalRoot | Side::HorizontalOpposite => {
            (span.0..=span.1).map(|x| Cell::new(x, moved)).collect()
        }
        Side::VerticalRoot | Side::VerticalOpposite => {
            (span.0..=span.1).map(|y| Cell::new(moved, y)).collect()
        }
    };
    if cells.iter().all(|&c| map.in_bounds(c)) {
        Some(cells)
    } else {
        None
    }
}

/// A detected symmetry with its resolution branches.
#[derive(Debug, Clone)]
pub enum Finding {
    Rectangle(RectangleFinding),
    Corridor(CorridorFinding),
    Target(TargetFinding),
}

impl Finding {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Finding::Rectangle(_) => "rectangle",
            Finding::Corridor(_) => "corridor",
            Finding::Target(_) => "target",
        }
    }

    /// The two children's added constraint sets.
    pub fn branches(&self, k: i32) -> (Vec<Constraint>, Vec<Constraint>) {
        match self {
            Finding::Rectangle(f) => rectangle_branches(f),
            Finding::Corridor(f) => corridor_branches(f),
            Finding::Target(f) => target_branches(f, k),
        }
    }
}
