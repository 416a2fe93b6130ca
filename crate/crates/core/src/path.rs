//! Timestep-indexed single-agent paths.

use crate::grid::{Cell, GridMap};

/// A path is one cell per timestep from `0` to its completion time. After
/// completion the agent occupies its goal forever; the stored sequence
/// carries no trailing goal-waits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    cells: Vec<Cell>,
}

impl Path {
    pub fn new(cells: Vec<Cell>) -> Self {
        assert!(!cells.is_empty(), "a path has at least its start cell");
        if cells.len() > 1 {
            let n = cells.len();
            assert_ne!(cells[n - 1], cells[n - 2], "trailing goal-waits are not canonical");
        }
        Path { cells }
    }

    /// Completion time: the timestep of the final arrival at the goal.
    pub fn cost(&self) -> i32 {
        self.cells.len() as i32 - 1
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().unwrap()
    }

    /// Occupied cell at timestep `t`, goal-extended beyond completion.
    pub fn at(&self, t: i32) -> Cell {
        if t < 0 {
            self.cells[0]
        } else {
            self.cells[(t as usize).min(self.cells.len() - 1)]
        }
    }

    /// Cell at `t` without goal extension.
    pub fn at_exact(&self, t: i32) -> Option<Cell> {
        if t < 0 || t as usize >= self.cells.len() {
            None
        } else {
            Some(self.cells[t as usize])
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Timesteps (not goal-extended) at which the path occupies `cell`.
    pub fn visits(&self, cell: Cell) -> impl Iterator<Item = i32> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |&(_, &c)| c == cell)
            .map(|(t, _)| t as i32)
    }

    /// Checks the shape invariants against a map and endpoints: starts at
    /// `start`, ends at `goal`, and every step is a wait or a passable
    /// 4-adjacent move.
    pub fn is_valid_on(&self, map: &GridMap, start: Cell, goal: Cell) -> bool {
        if self.start() != start || self.goal() != goal {
            return false;
        }
        if !self.cells.iter().all(|&c| map.is_passable(c)) {
            return false;
        }
        self.cells.windows(2).all(|w| {
            let d = w[0].manhattan(w[1]);
            d == 0 || d == 1
        })
    }
}

impl From<Vec<Cell>> for Path {
    fn from(cells: Vec<Cell>) -> Self {
        Path::new(cells)
    }
}

/// Sum of individual path costs.
pub fn sic(paths: &[Path]) -> i32 {
    paths.iter().map(|p| p.cost()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: i32, y: i32) -> Cell {
        Cell::new(x, y)
    }

    #[test]
    fn goal_extension_and_cost() {
        let p = Path::new(vec![c(0, 0), c(1, 0), c(1, 1)]);
        assert_eq!(p.cost(), 2);
        assert_eq!(p.at(0), c(0, 0));
        assert_eq!(p.at(2), c(1, 1));
        assert_eq!(p.at(99), c(1, 1));
        assert_eq!(p.at_exact(3), None);
    }

    #[test]
    #[should_panic]
    fn trailing_waits_rejected() {
        Path::new(vec![c(0, 0), c(1, 0), c(1, 0)]);
    }

    #[test]
    fn mid_path_waits_allowed() {
        let p = Path::new(vec![c(0, 0), c(0, 0), c(1, 0)]);
        assert_eq!(p.cost(), 2);
    }
}
