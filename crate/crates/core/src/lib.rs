//! Optimal k-robust multi-agent path finding on 4-neighbour grids: a
//! constraint-tree search with pairwise symmetry reasoning (rectangle,
//! corridor and target), validation oracles and a benchmark harness.

pub mod conflict;
pub mod constraint;
pub mod grid;
pub mod harness;
pub mod highlevel;
pub mod lowlevel;
pub mod mdd;
pub mod oracle;
pub mod path;
pub mod symmetry;

pub use conflict::{Cardinality, Conflict, ConflictKind};
pub use constraint::{Constraint, Scope};
pub use grid::{AgentTask, Cell, GridMap, Instance};
pub use highlevel::{solve, HeuristicMode, SolveOutcome, SolverConfig, Solution};
pub use path::Path;
