//! Grid point-goal navigation: 8-connected A* with octile costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::mapping::{CellState, OccupancyMap};

/// How unknown cells are treated by the planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownPolicy {
    Blocked,
    Traversable,
}

/// A planned path from its first cell to its last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub straight_moves: u32,
    pub diagonal_moves: u32,
}

impl Path {
    /// Length in cells.
    pub fn cost(&self) -> f64 {
        self.straight_moves as f64 + self.diagonal_moves as f64 * SQRT_2
    }
}

pub(crate) fn passable(occ: &OccupancyMap, cell: Cell, policy: UnknownPolicy) -> bool {
    if !occ.spec().contains(cell) {
        return false;
    }
    match occ.state(cell) {
        CellState::Free => true,
        CellState::Occupied => false,
        CellState::Unknown => policy == UnknownPolicy::Traversable,
    }
}

const MOVES: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

/// Successors of `cell`. A diagonal move needs both orthogonal neighbors it
/// passes between to be passable, so paths never squeeze through corners.
pub fn successors(
    occ: &OccupancyMap,
    cell: Cell,
    policy: UnknownPolicy,
) -> impl Iterator<Item = (Cell, bool)> + '_ {
    MOVES.into_iter().filter_map(move |(dc, dr)| {
        let next = Cell::new(cell.col + dc, cell.row + dr);
        if !passable(occ, next, policy) {
            return None;
        }
        let diagonal = dc != 0 && dr != 0;
        if diagonal
            && !(passable(occ, Cell::new(cell.col + dc, cell.row), policy)
                && passable(occ, Cell::new(cell.col, cell.row + dr), policy))
        {
            return None;
        }
        Some((next, diagonal))
    })
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.col - b.col).abs() as f64;
    let dy = (a.row - b.row).abs() as f64;
    dx.max(dy) - dx.min(dy) + SQRT_2 * dx.min(dy)
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    g: f64,
    cell: Cell,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then deeper nodes first, then cell order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 8-connected path, or `Ok(None)` when `to` cannot be reached.
pub fn plan_path(occ: &OccupancyMap, from: Cell, to: Cell, policy: UnknownPolicy) -> Result<Option<Path>> {
    let spec = *occ.spec();
    let start = spec.index(from).ok_or(Error::OutOfBounds(from))?;
    if occ.state(from) == CellState::Occupied {
        return Err(Error::StartOccupied(from));
    }
    if from == to {
        return Ok(Some(Path {
            cells: vec![from],
            straight_moves: 0,
            diagonal_moves: 0,
        }));
    }
    if !passable(occ, to, policy) {
        return Ok(None);
    }
    let n = spec.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, bool)>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Open {
        f: octile(from, to),
        g: 0.0,
        cell: from,
    });
    while let Some(Open { g: gc, cell, .. }) = open.pop() {
        let i = spec.index(cell).expect("in bounds");
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if cell == to {
            break;
        }
        for (next, diagonal) in successors(occ, cell, policy) {
            let j = spec.index(next).expect("in bounds");
            if closed[j] {
                continue;
            }
            let cand = gc + if diagonal { SQRT_2 } else { 1.0 };
            if cand < g[j] {
                g[j] = cand;
                parent[j] = Some((i, diagonal));
                open.push(Open {
                    f: cand + octile(next, to),
                    g: cand,
                    cell: next,
                });
            }
        }
    }
    let goal = spec.index(to).expect("passable implies in bounds");
    if !closed[goal] {
        return Ok(None);
    }
    let mut cells = vec![to];
    let (mut straight, mut diag) = (0, 0);
    let mut cur = goal;
    while let Some((p, diagonal)) = parent[cur] {
        if diagonal {
            diag += 1;
        } else {
            straight += 1;
        }
        cells.push(spec.cell_at(p));
        cur = p;
    }
    cells.reverse();
    Ok(Some(Path {
        cells,
        straight_moves: straight,
        diagonal_moves: diag,
    }))
}

/// Path costs (in cells) from `from` to every cell; unreachable cells are
/// infinite.
pub fn distance_field(occ: &OccupancyMap, from: Cell, policy: UnknownPolicy) -> Result<Vec<f64>> {
    let spec = *occ.spec();
    let start = spec.index(from).ok_or(Error::OutOfBounds(from))?;
    if occ.state(from) == CellState::Occupied {
        return Err(Error::StartOccupied(from));
    }
    let mut dist = vec![f64::INFINITY; spec.len()];
    let mut open = BinaryHeap::new();
    dist[start] = 0.0;
    open.push(Open {
        f: 0.0,
        g: 0.0,
        cell: from,
    });
    while let Some(Open { f: d, cell, .. }) = open.pop() {
        let i = spec.index(cell).expect("in bounds");
        if d > dist[i] {
            continue;
        }
        for (next, diagonal) in successors(occ, cell, policy) {
            let j = spec.index(next).expect("in bounds");
            let cand = d + if diagonal { SQRT_2 } else { 1.0 };
            if cand < dist[j] {
                dist[j] = cand;
                open.push(Open {
                    f: cand,
                    g: cand,
                    cell: next,
                });
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn map(rows: &[&str]) -> OccupancyMap {
        // '.' free, '#' occupied, '?' unknown; first string is the top row
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let spec = GridSpec::new(w, h, 1.0, (0.0, 0.0)).unwrap();
        let mut occ = OccupancyMap::new(spec);
        for (k, line) in rows.iter().enumerate() {
            let r = h as i32 - 1 - k as i32;
            for (c, ch) in line.chars().enumerate() {
                let cell = Cell::new(c as i32, r);
                match ch {
                    '.' => occ.mark_free(cell).unwrap(),
                    '#' => {
                        occ.observe_cell(cell, true).unwrap();
                    }
                    _ => {}
                }
            }
        }
        occ
    }

    #[test]
    fn same_cell() {
        let occ = map(&["..."]);
        let p = plan_path(&occ, Cell::new(1, 0), Cell::new(1, 0), UnknownPolicy::Blocked)
            .unwrap()
            .unwrap();
        assert_eq!(p.cells, vec![Cell::new(1, 0)]);
        assert_eq!(p.cost(), 0.0);
    }

    #[test]
    fn corridor() {
        let occ = map(&["######", "......", "######"]);
        let p = plan_path(&occ, Cell::new(0, 1), Cell::new(5, 1), UnknownPolicy::Blocked)
            .unwrap()
            .unwrap();
        assert_eq!(p.cells.len(), 6);
        assert_eq!(p.cost(), 5.0);
    }

    #[test]
    fn unknown_policy_matters() {
        let occ = map(&[".?."]);
        let (a, b) = (Cell::new(0, 0), Cell::new(2, 0));
        assert!(plan_path(&occ, a, b, UnknownPolicy::Blocked).unwrap().is_none());
        assert_eq!(plan_path(&occ, a, b, UnknownPolicy::Traversable).unwrap().unwrap().cost(), 2.0);
    }

    #[test]
    fn no_corner_cutting() {
        let occ = map(&[".#", "#."]);
        assert!(plan_path(&occ, Cell::new(0, 1), Cell::new(1, 0), UnknownPolicy::Traversable)
            .unwrap()
            .is_none());
    }

    #[test]
    fn occupied_start_is_an_error() {
        let occ = map(&["#."]);
        assert!(matches!(
            plan_path(&occ, Cell::new(0, 0), Cell::new(1, 0), UnknownPolicy::Blocked),
            Err(Error::StartOccupied(_))
        ));
    }

    #[test]
    fn detour_around_wall() {
        let occ = map(&[".....", ".###.", "....."]);
        let p = plan_path(&occ, Cell::new(0, 1), Cell::new(4, 1), UnknownPolicy::Blocked)
            .unwrap()
            .unwrap();
        assert_eq!((p.straight_moves, p.diagonal_moves), (6, 0));
        let field = distance_field(&occ, Cell::new(0, 1), UnknownPolicy::Blocked).unwrap();
        assert!((field[occ.spec().index(Cell::new(4, 1)).unwrap()] - p.cost()).abs() < 1e-12);
    }
}
