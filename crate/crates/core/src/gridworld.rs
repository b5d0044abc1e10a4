//! Arena geometry: a rectangular cell grid with a refuge rectangle the agent
//! starts in, 4-neighbour adjacency, and breadth-first routing used by the
//! movement policy.
//!
//! Every move crosses exactly one grid line, so move count and "grid lines
//! crossed" are the same quantity.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1 (got {width}x{height})")]
    EmptyGrid { width: usize, height: usize },
    #[error("refuge {0:?} does not lie inside the grid")]
    RefugeOutOfBounds(RefugeRect),
    #[error("refuge covers the whole grid, leaving no arena cells")]
    NoArena,
    #[error("start position {0:?} lies outside the refuge")]
    StartOutsideRefuge(Position),
}

/// A cell coordinate. `x` grows east, `y` grows south.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Ordering key used for target tie-breaks: row first, then column.
    fn row_major_key(self) -> (usize, usize) {
        (self.y, self.x)
    }
}

impl From<(usize, usize)> for Position {
    fn from((x, y): (usize, usize)) -> Self {
        Self { x, y }
    }
}

/// Compass direction of a single move. `ALL` is the fixed tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub const fn offset(self) -> (isize, isize) {
        match self {
            Direction::N => (0, -1),
            Direction::E => (1, 0),
            Direction::S => (0, 1),
            Direction::W => (-1, 0),
        }
    }
}

/// The comfort zone: top-left corner plus extent, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefugeRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl RefugeRect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn contains(&self, p: Position) -> bool {
        p.x >= self.x && p.x < self.x + self.w && p.y >= self.y && p.y < self.y + self.h
    }

    pub fn cell_count(&self) -> usize {
        self.w * self.h
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridWorld {
    width: usize,
    height: usize,
    refuge: RefugeRect,
    start: Position,
}

/// Result of a routing query: where to go, how far it is, and which way to
/// step first. `first_step` is `None` only when the origin is itself the
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    pub target: Position,
    pub distance: usize,
    pub first_step: Option<Direction>,
}

impl GridWorld {
    pub fn new(
        width: usize,
        height: usize,
        refuge: RefugeRect,
        start: Position,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if refuge.w == 0
            || refuge.h == 0
            || refuge.x + refuge.w > width
            || refuge.y + refuge.h > height
        {
            return Err(GridError::RefugeOutOfBounds(refuge));
        }
        if refuge.cell_count() == width * height {
            return Err(GridError::NoArena);
        }
        if !refuge.contains(start) {
            return Err(GridError::StartOutsideRefuge(start));
        }
        Ok(Self {
            width,
            height,
            refuge,
            start,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn refuge(&self) -> RefugeRect {
        self.refuge
    }

    pub fn start(&self) -> Position {
        self.start
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn arena_cell_count(&self) -> usize {
        self.cell_count() - self.refuge.cell_count()
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn in_refuge(&self, p: Position) -> bool {
        self.refuge.contains(p)
    }

    pub fn is_arena(&self, p: Position) -> bool {
        self.in_bounds(p) && !self.refuge.contains(p)
    }

    pub(crate) fn index(&self, p: Position) -> usize {
        p.y * self.width + p.x
    }

    pub(crate) fn position(&self, index: usize) -> Position {
        Position::new(index % self.width, index / self.width)
    }

    /// The adjacent cell in `dir`, if it is on the grid.
    pub fn step(&self, p: Position, dir: Direction) -> Option<Position> {
        let (dx, dy) = dir.offset();
        let x = p.x.checked_add_signed(dx)?;
        let y = p.y.checked_add_signed(dy)?;
        let q = Position::new(x, y);
        self.in_bounds(q).then_some(q)
    }

    /// In-bounds von Neumann neighbours in N, E, S, W order.
    pub fn neighbors(&self, p: Position) -> Vec<Position> {
        Direction::ALL
            .iter()
            .filter_map(|&d| self.step(p, d))
            .collect()
    }

    /// Breadth-first distances from `origin` to every cell, row-major.
    pub fn bfs_distances(&self, origin: Position) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.cell_count()];
        let mut queue = VecDeque::with_capacity(self.cell_count());
        dist[self.index(origin)] = Some(0);
        queue.push_back(origin);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].unwrap_or(0);
            for dir in Direction::ALL {
                if let Some(q) = self.step(p, dir) {
                    let slot = &mut dist[self.index(q)];
                    if slot.is_none() {
                        *slot = Some(d + 1);
                        queue.push_back(q);
                    }
                }
            }
        }
        dist
    }

    /// Nearest cell satisfying `is_goal`, ties broken by smallest `(y, x)`,
    /// with the first step chosen in N, E, S, W order among moves that
    /// strictly reduce the distance to that target.
    pub fn route_to(&self, from: Position, is_goal: impl Fn(Position) -> bool) -> Option<Route> {
        let from_origin = self.bfs_distances(from);
        let (target, distance) = from_origin
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|d| (self.position(i), d)))
            .filter(|&(p, _)| is_goal(p))
            .min_by_key(|&(p, d)| (d, p.row_major_key()))?;
        if distance == 0 {
            return Some(Route {
                target,
                distance,
                first_step: None,
            });
        }
        let to_target = self.bfs_distances(target);
        let first_step = Direction::ALL.into_iter().find(|&dir| {
            self.step(from, dir)
                .and_then(|q| to_target[self.index(q)])
                .is_some_and(|d| d + 1 == distance)
        });
        Some(Route {
            target,
            distance,
            first_step,
        })
    }

    /// Route to the closest arena cell not yet in `visited`.
    pub fn nearest_unvisited(&self, visited: &VisitedSet, from: Position) -> Option<Route> {
        if visited.unvisited_arena() == 0 {
            return None;
        }
        self.route_to(from, |p| self.is_arena(p) && !visited.contains(p))
    }

    /// Route to the closest refuge cell.
    pub fn route_home(&self, from: Position) -> Route {
        self.route_to(from, |p| self.in_refuge(p))
            .expect("refuge is non-empty and the grid is connected")
    }
}

/// Cells the agent knows. Refuge cells are familiar from the outset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitedSet {
    cells: Vec<bool>,
    width: usize,
    arena_total: usize,
    arena_visited: usize,
}

impl VisitedSet {
    /// All refuge cells visited, arena untouched.
    pub fn new(world: &GridWorld) -> Self {
        let cells = (0..world.cell_count())
            .map(|i| world.in_refuge(world.position(i)))
            .collect();
        Self {
            cells,
            width: world.width(),
            arena_total: world.arena_cell_count(),
            arena_visited: 0,
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        self.cells
            .get(p.y * self.width + p.x)
            .copied()
            .unwrap_or(false)
    }

    /// Marks `p` visited; returns `true` if it was an unvisited arena cell.
    pub fn insert(&mut self, world: &GridWorld, p: Position) -> bool {
        let i = world.index(p);
        if self.cells[i] {
            return false;
        }
        self.cells[i] = true;
        if world.is_arena(p) {
            self.arena_visited += 1;
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arena_visited(&self) -> usize {
        self.arena_visited
    }

    pub fn unvisited_arena(&self) -> usize {
        self.arena_total - self.arena_visited
    }

    /// Fraction of arena cells still unvisited.
    pub fn unvisited_fraction(&self) -> f64 {
        self.unvisited_arena() as f64 / self.arena_total as f64
    }
}
