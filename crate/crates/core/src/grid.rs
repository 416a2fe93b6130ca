//! Grid maps, agent tasks and solver instances, plus parsers for the
//! MovingAI `.map` / `.scen` benchmark formats.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

/// A grid coordinate. `x` grows to the right, `y` grows downwards, matching
/// the row order of `.map` files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(&self, other: Cell) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Fixed expansion order for the four moves; waiting is handled by the
/// search, not the graph.
pub const MOVES: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)]; // up, right, down, left

#[derive(Debug, Error)]
pub enum MapError {
    #[error("line {line}: expected `{expected}` header")]
    BadHeader { line: usize, expected: &'static str },
    #[error("line {line}: invalid {field} value")]
    BadDimension { line: usize, field: &'static str },
    #[error("line {line}: map row {row} missing (expected {expected} rows)")]
    MissingRow { line: usize, row: usize, expected: usize },
    #[error("line {line}: row has {got} cells, expected {expected}")]
    BadRowLength { line: usize, got: usize, expected: usize },
    #[error("line {line}: unknown cell character {ch:?}")]
    BadCell { line: usize, ch: char },
    #[error("map dimensions must be positive")]
    EmptyMap,
}

#[derive(Debug, Error)]
pub enum ScenError {
    #[error("row {row}: expected `version` header line")]
    MissingVersion { row: usize },
    #[error("row {row}: expected {expected} fields, got {got}")]
    BadFieldCount { row: usize, expected: usize, got: usize },
    #[error("row {row}: invalid {field} value")]
    BadField { row: usize, field: &'static str },
    #[error("row {row}: map dimensions {w}x{h} do not match loaded map")]
    DimensionMismatch { row: usize, w: i32, h: i32 },
    #[error("row {row}: {which} {cell} is out of bounds")]
    OutOfBounds { row: usize, which: &'static str, cell: Cell },
    #[error("row {row}: {which} {cell} is a blocked cell")]
    Blocked { row: usize, which: &'static str, cell: Cell },
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("agents {a} and {b} share start cell {cell}")]
    DuplicateStart { a: usize, b: usize, cell: Cell },
    #[error("agents {a} and {b} share goal cell {cell}")]
    DuplicateGoal { a: usize, b: usize, cell: Cell },
    #[error("agent {agent}: goal {goal} unreachable from start {start}")]
    Unreachable { agent: usize, start: Cell, goal: Cell },
    #[error("agent {agent}: {which} {cell} is not passable")]
    BadEndpoint { agent: usize, which: &'static str, cell: Cell },
}

/// A 4-neighbour grid of passable and blocked cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: i32,
    height: i32,
    passable: Vec<bool>,
}

impl GridMap {
    pub fn new(width: i32, height: i32, passable: Vec<bool>) -> Self {
        assert!(width > 0 && height > 0, "map dimensions must be positive");
        assert_eq!(passable.len(), (width * height) as usize);
        GridMap { width, height, passable }
    }

    /// An all-passable map, handy for tests and archetypes.
    pub fn open(width: i32, height: i32) -> Self {
        GridMap::new(width, height, vec![true; (width * height) as usize])
    }

    /// Build a map from ASCII art rows: `.` passable, `@` blocked.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len() as i32;
        let width = rows[0].chars().count() as i32;
        let mut passable = Vec::with_capacity((width * height) as usize);
        for row in rows {
            assert_eq!(row.chars().count(), width as usize, "ragged ascii map");
            for ch in row.chars() {
                passable.push(ch == '.');
            }
        }
        GridMap::new(width, height, passable)
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn cells(&self) -> i32 {
        self.width * self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.x < self.width && c.y >= 0 && c.y < self.height
    }

    /// Out-of-bounds cells are never passable.
    pub fn is_passable(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.passable[(c.y * self.width + c.x) as usize]
    }

    pub fn set_passable(&mut self, c: Cell, value: bool) {
        assert!(self.in_bounds(c));
        self.passable[(c.y * self.width + c.x) as usize] = value;
    }

    /// Passable 4-neighbours of `c`, in up/right/down/left order. Does not
    /// include `c` itself.
    pub fn neighbors(&self, c: Cell) -> Vec<Cell> {
        MOVES
            .iter()
            .map(|&(dx, dy)| Cell::new(c.x + dx, c.y + dy))
            .filter(|&n| self.is_passable(n))
            .collect()
    }

    /// Number of passable neighbours, used for corridor detection.
    pub fn degree(&self, c: Cell) -> usize {
        MOVES
            .iter()
            .filter(|&&(dx, dy)| self.is_passable(Cell::new(c.x + dx, c.y + dy)))
            .count()
    }

    /// Parse a MovingAI `.map` file. `.` and `G` are passable; `@`, `T` and
    /// `O` are blocked. Both `\n` and `\r\n` line endings are accepted.
    pub fn parse(text: &str) -> Result<GridMap, MapError> {
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();

        let (line, header) = lines.next().ok_or(MapError::BadHeader { line: 1, expected: "type" })?;
        if !header.trim().starts_with("type") {
            return Err(MapError::BadHeader { line: line + 1, expected: "type" });
        }

        let (line, header) = lines.next().ok_or(MapError::BadHeader { line: 2, expected: "height" })?;
        let height: i32 = header
            .trim()
            .strip_prefix("height ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or(MapError::BadDimension { line: line + 1, field: "height" })?;

        let (line, header) = lines.next().ok_or(MapError::BadHeader { line: 3, expected: "width" })?;
        let width: i32 = header
            .trim()
            .strip_prefix("width ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or(MapError::BadDimension { line: line + 1, field: "width" })?;

        let (line, header) = lines.next().ok_or(MapError::BadHeader { line: 4, expected: "map" })?;
        if header.trim() != "map" {
            return Err(MapError::BadHeader { line: line + 1, expected: "map" });
        }

        if width <= 0 || height <= 0 {
            return Err(MapError::EmptyMap);
        }

        let mut passable = Vec::with_capacity((width * height) as usize);
        let mut rows_read = 0usize;
        let mut last_line = line + 1;
        for (line, row) in lines {
            if rows_read == height as usize {
                break;
            }
            last_line = line + 1;
            if row.chars().count() != width as usize {
                return Err(MapError::BadRowLength {
                    line: last_line,
                    got: row.chars().count(),
                    expected: width as usize,
                });
            }
            for ch in row.chars() {
                match ch {
                    '.' | 'G' => passable.push(true),
                    '@' | 'T' | 'O' => passable.push(false),
                    _ => return Err(MapError::BadCell { line: last_line, ch }),
                }
            }
            rows_read += 1;
        }
        if rows_read < height as usize {
            return Err(MapError::MissingRow {
                line: last_line + 1,
                row: rows_read,
                expected: height as usize,
            });
        }
        Ok(GridMap::new(width, height, passable))
    }

    /// Render back to the `.map` format with `.`/`@` cells. Parsing the
    /// result reproduces the passable grid exactly.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("type octile\n");
        out.push_str(&format!("height {}\n", self.height));
        out.push_str(&format!("width {}\n", self.width));
        out.push_str("map\n");
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.is_passable(Cell::new(x, y)) { '.' } else { '@' });
            }
            out.push('\n');
        }
        out
    }

    /// BFS distance from `goal` to every reachable cell.
    pub fn bfs_distances(&self, goal: Cell) -> Vec<Option<i32>> {
        let mut dist = vec![None; (self.width * self.height) as usize];
        if !self.is_passable(goal) {
            return dist;
        }
        let idx = |c: Cell| (c.y * self.width + c.x) as usize;
        let mut queue = VecDeque::new();
        dist[idx(goal)] = Some(0);
        queue.push_back(goal);
        while let Some(c) = queue.pop_front() {
            let d = dist[idx(c)].unwrap();
            for n in self.neighbors(c) {
                if dist[idx(n)].is_none() {
                    dist[idx(n)] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

/// One agent's start and goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentTask {
    pub id: usize,
    pub start: Cell,
    pub goal: Cell,
}

/// Parse a MovingAI `.scen` file against an already-loaded map. Tasks keep
/// file order and get ids `0..n`. The optimal-length column is parsed but
/// ignored: it assumes octile moves while this solver is 4-connected.
pub fn parse_scen(text: &str, map: &GridMap) -> Result<Vec<AgentTask>, ScenError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    let (row, version) = lines.next().ok_or(ScenError::MissingVersion { row: 1 })?;
    if !version.trim().starts_with("version") {
        return Err(ScenError::MissingVersion { row: row + 1 });
    }

    let mut tasks = Vec::new();
    for (row, line) in lines {
        let row = row + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 9 {
            return Err(ScenError::BadFieldCount { row, expected: 9, got: fields.len() });
        }
        let int = |idx: usize, field: &'static str| -> Result<i32, ScenError> {
            fields[idx].parse().map_err(|_| ScenError::BadField { row, field })
        };
        let w = int(2, "width")?;
        let h = int(3, "height")?;
        if w != map.width() || h != map.height() {
            return Err(ScenError::DimensionMismatch { row, w, h });
        }
        let start = Cell::new(int(4, "start-x")?, int(5, "start-y")?);
        let goal = Cell::new(int(6, "goal-x")?, int(7, "goal-y")?);
        fields[8]
            .parse::<f64>()
            .map_err(|_| ScenError::BadField { row, field: "optimal-length" })?;
        for (which, cell) in [("start", start), ("goal", goal)] {
            if !map.in_bounds(cell) {
                return Err(ScenError::OutOfBounds { row, which, cell });
            }
            if !map.is_passable(cell) {
                return Err(ScenError::Blocked { row, which, cell });
            }
        }
        tasks.push(AgentTask { id: tasks.len(), start, goal });
    }
    Ok(tasks)
}

/// A full solver instance: map, agents and the robustness radius `k`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub map: GridMap,
    pub tasks: Vec<AgentTask>,
    pub k: i32,
}

impl Instance {
    /// Validates endpoint passability, pairwise-distinct starts and goals,
    /// and start-to-goal reachability. No partially-valid instance is ever
    /// produced.
    pub fn new(map: GridMap, mut tasks: Vec<AgentTask>, k: i32) -> Result<Instance, InstanceError> {
        assert!(k >= 0, "robustness radius must be non-negative");
        for (i, task) in tasks.iter_mut().enumerate() {
            task.id = i;
        }
        for task in &tasks {
            for (which, cell) in [("start", task.start), ("goal", task.goal)] {
                if !map.is_passable(cell) {
                    return Err(InstanceError::BadEndpoint { agent: task.id, which, cell });
                }
            }
        }
        for i in 0..tasks.len() {
            for j in i + 1..tasks.len() {
                if tasks[i].start == tasks[j].start {
                    return Err(InstanceError::DuplicateStart { a: i, b: j, cell: tasks[i].start });
                }
                if tasks[i].goal == tasks[j].goal {
                    return Err(InstanceError::DuplicateGoal { a: i, b: j, cell: tasks[i].goal });
                }
            }
        }
        for task in &tasks {
            let dist = map.bfs_distances(task.goal);
            if dist[(task.start.y * map.width() + task.start.x) as usize].is_none() {
                return Err(InstanceError::Unreachable {
                    agent: task.id,
                    start: task.start,
                    goal: task.goal,
                });
            }
        }
        Ok(Instance { map, tasks, k })
    }

    pub fn agents(&self) -> usize {
        self.tasks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_two_by_two() {
        let text = "type octile\nheight 2\nwidth 2\nmap\n.@\n..\n";
        let map = GridMap::parse(text).unwrap();
        assert!(map.is_passable(Cell::new(0, 0)));
        assert!(!map.is_passable(Cell::new(1, 0)));
        assert!(map.is_passable(Cell::new(0, 1)));
        assert!(map.is_passable(Cell::new(1, 1)));
    }

    #[test]
    fn parse_missing_row_names_position() {
        let text = "type octile\nheight 3\nwidth 2\nmap\n..\n..\n";
        match GridMap::parse(text) {
            Err(MapError::MissingRow { row, expected, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(expected, 3);
            }
            other => panic!("expected MissingRow, got {other:?}"),
        }
    }

    #[test]
    fn parse_open_eight_by_eight() {
        let mut text = String::from("type octile\nheight 8\nwidth 8\nmap\n");
        for _ in 0..8 {
            text.push_str("........\n");
        }
        let map = GridMap::parse(&text).unwrap();
        assert_eq!((0..64).filter(|&i| map.passable[i as usize]).count(), 64);
    }

    #[test]
    fn parse_rejects_unknown_char() {
        let text = "type octile\nheight 1\nwidth 2\nmap\n.x\n";
        match GridMap::parse(text) {
            Err(MapError::BadCell { line, ch }) => {
                assert_eq!(line, 5);
                assert_eq!(ch, 'x');
            }
            other => panic!("expected BadCell, got {other:?}"),
        }
    }

    #[test]
    fn parse_accepts_crlf() {
        let text = "type octile\r\nheight 1\r\nwidth 2\r\nmap\r\n.@\r\n";
        let map = GridMap::parse(text).unwrap();
        assert!(map.is_passable(Cell::new(0, 0)));
        assert!(!map.is_passable(Cell::new(1, 0)));
    }

    #[test]
    fn neighbors_interior_corner_blocked() {
        let map = GridMap::open(8, 8);
        let n = map.neighbors(Cell::new(3, 3));
        assert_eq!(
            n,
            vec![Cell::new(3, 2), Cell::new(4, 3), Cell::new(3, 4), Cell::new(2, 3)]
        );
        let n = map.neighbors(Cell::new(0, 0));
        assert_eq!(n, vec![Cell::new(1, 0), Cell::new(0, 1)]);

        let mut map = map;
        map.set_passable(Cell::new(4, 3), false);
        let n = map.neighbors(Cell::new(3, 3));
        assert_eq!(n, vec![Cell::new(3, 2), Cell::new(3, 4), Cell::new(2, 3)]);
    }

    #[test]
    fn scen_single_row() {
        let map = GridMap::open(8, 8);
        let tasks = parse_scen("version 1\n0\tm\t8\t8\t1\t2\t5\t2\t4.0\n", &map).unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].id, 0);
        assert_eq!(tasks[0].start, Cell::new(1, 2));
        assert_eq!(tasks[0].goal, Cell::new(5, 2));
    }

    #[test]
    fn scen_rejects_blocked_start() {
        let map = GridMap::from_ascii(&["@.", ".."]);
        let err = parse_scen("version 1\n0\tm\t2\t2\t0\t0\t1\t1\t2.0\n", &map).unwrap_err();
        match err {
            ScenError::Blocked { row, which, .. } => {
                assert_eq!(row, 2);
                assert_eq!(which, "start");
            }
            other => panic!("expected Blocked, got {other:?}"),
        }
    }

    #[test]
    fn scen_empty_after_version() {
        let map = GridMap::open(4, 4);
        let tasks = parse_scen("version 1\n", &map).unwrap();
        assert!(tasks.is_empty());
    }

    #[test]
    fn instance_rejects_duplicate_goals_and_unreachable() {
        let map = GridMap::open(4, 4);
        let t = |s: (i32, i32), g: (i32, i32)| AgentTask {
            id: 0,
            start: Cell::new(s.0, s.1),
            goal: Cell::new(g.0, g.1),
        };
        let err = Instance::new(map.clone(), vec![t((0, 0), (3, 3)), t((1, 0), (3, 3))], 1);
        assert!(matches!(err, Err(InstanceError::DuplicateGoal { .. })));

        let walled = GridMap::from_ascii(&[".@.", ".@.", ".@."]);
        let err = Instance::new(walled, vec![t((0, 0), (2, 0))], 0);
        assert!(matches!(err, Err(InstanceError::Unreachable { .. })));
    }
}
