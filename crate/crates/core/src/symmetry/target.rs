//! Target conflicts: an agent parked on its goal blocks a later visitor.

use crate::conflict::{Conflict, ConflictKind};
use crate::constraint::{Constraint, Scope};
use crate::grid::{AgentTask, Cell};
use crate::path::Path;

/// A conflict at `goal_cell` after its owner finished there.
#[derive(Debug, Clone, Copy)]
pub struct TargetFinding {
    /// The agent whose goal is contested.
    pub blocker: usize,
    /// The agent that visits the goal cell afterwards.
    pub visitor: usize,
    pub goal_cell: Cell,
    /// The blocker's completion time.
    pub completion: i32,
    /// The visitor's conflicting visit time; at least `completion`.
    pub visit_time: i32,
}

/// A finding exists when the conflict cell is one agent's goal and that
/// agent completes no later than the other agent's visit.
pub fn detect_target(conflict: &Conflict, tasks: &[AgentTask], paths: &[Path]) -> Option<TargetFinding> {
    if !matches!(conflict.kind, ConflictKind::Vertex) {
        return None;
    }
    let candidates = [
        (conflict.first, conflict.second, conflict.time + conflict.delay),
        (conflict.second, conflict.first, conflict.time),
    ];
    for (blocker, visitor, visit_time) in candidates {
        if tasks[blocker].goal != conflict.cell {
            continue;
        }
        let completion = paths[blocker].cost();
        if completion <= visit_time {
            return Some(TargetFinding {
                blocker,
                visitor,
                goal_cell: conflict.cell,
                completion,
                visit_time,
            });
        }
    }
    None
}

/// Branch on the blocker's completion time around `visit_time + k`: either
/// it finishes late enough to clear the window, or it finishes within the
/// window and every other agent keeps off the goal cell from `visit_time`
/// onwards. Any other agent there at `tau >= visit_time` would sit within
/// `k` of a completion bounded by `visit_time + k`.
pub fn target_branches(f: &TargetFinding, k: i32) -> (Vec<Constraint>, Vec<Constraint>) {
    let threshold = f.visit_time + k;
    let late = vec![Constraint::MinLength { agent: f.blocker, limit: threshold + 1 }];
    let early = vec![
        Constraint::MaxLength { agent: f.blocker, limit: threshold },
        Constraint::VertexFromOn {
            scope: Scope::AllExcept(f.blocker),
            cell: f.goal_cell,
            from: f.visit_time,
        },
    ];
    (late, early)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: i32, y: i32) -> Cell {
        Cell::new(x, y)
    }

    #[test]
    fn parked_goal_blocks_later_visitor() {
        // Blocker finishes on (4,2) at t=1; the other agent traverses it at
        // t=3. With k=1 the threshold is 4 and the branches pin the
        // completion on either side of it.
        let tasks = [
            AgentTask { id: 0, start: c(1, 2), goal: c(6, 2) },
            AgentTask { id: 1, start: c(4, 1), goal: c(4, 2) },
        ];
        let paths = [
            Path::new((1..=6).map(|x| c(x, 2)).collect()),
            Path::new(vec![c(4, 1), c(4, 2)]),
        ];
        // Goal-extended detection reports the sitter first at t=2, delay 1.
        let cf = Conflict {
            first: 1,
            second: 0,
            cell: c(4, 2),
            time: 2,
            delay: 1,
            kind: ConflictKind::Vertex,
        };
        let f = detect_target(&cf, &tasks, &paths).unwrap();
        assert_eq!(f.blocker, 1);
        assert_eq!(f.visitor, 0);
        assert_eq!(f.completion, 1);
        assert_eq!(f.visit_time, 3);

        let (late, early) = target_branches(&f, 1);
        assert_eq!(late, vec![Constraint::MinLength { agent: 1, limit: 5 }]);
        assert_eq!(
            early,
            vec![
                Constraint::MaxLength { agent: 1, limit: 4 },
                Constraint::VertexFromOn { scope: Scope::AllExcept(1), cell: c(4, 2), from: 3 },
            ]
        );
    }

    #[test]
    fn conflict_before_completion_is_not_target() {
        let tasks = [
            AgentTask { id: 0, start: c(0, 0), goal: c(3, 0) },
            AgentTask { id: 1, start: c(1, 1), goal: c(1, 0) },
        ];
        // Blocker still travelling: visit happens before its completion.
        let paths = [
            Path::new(vec![c(0, 0), c(1, 0), c(2, 0), c(3, 0)]),
            Path::new(vec![c(1, 1), c(1, 1), c(1, 1), c(1, 0)]),
        ];
        let cf = Conflict {
            first: 0,
            second: 1,
            cell: c(1, 0),
            time: 1,
            delay: 2,
            kind: ConflictKind::Vertex,
        };
        assert!(detect_target(&cf, &tasks, &paths).is_none());
    }

    #[test]
    fn non_goal_cell_is_not_target() {
        let tasks = [
            AgentTask { id: 0, start: c(0, 0), goal: c(3, 0) },
            AgentTask { id: 1, start: c(2, 1), goal: c(2, 2) },
        ];
        let paths = [
            Path::new(vec![c(0, 0), c(1, 0), c(2, 0), c(3, 0)]),
            Path::new(vec![c(2, 1), c(2, 2)]),
        ];
        let cf = Conflict {
            first: 0,
            second: 1,
            cell: c(2, 0),
            time: 2,
            delay: 0,
            kind: ConflictKind::Vertex,
        };
        assert!(detect_target(&cf, &tasks, &paths).is_none());
    }
}
