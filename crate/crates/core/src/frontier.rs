//! Frontier detection and clustering.
//!
//! A frontier cell is a free cell with at least one unknown 8-neighbor.
//! Frontier cells are grouped into 8-connected components, each represented
//! by the member cell closest to the component's mean position.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::grid::Cell;
use crate::mapping::{CellState, OccupancyMap};

/// Components smaller than this are discarded by default.
pub const DEFAULT_MIN_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    /// Member cells sorted by `(row, col)`.
    pub cells: Vec<Cell>,
    pub centroid: Cell,
}

impl Frontier {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

/// True when `cell` is free and touches unknown space.
pub fn is_frontier_cell(occ: &OccupancyMap, cell: Cell) -> bool {
    occ.state(cell) == CellState::Free
        && cell
            .neighbors8()
            .any(|n| occ.spec().contains(n) && occ.state(n) == CellState::Unknown)
}

/// All frontier cells in `(row, col)` order.
pub fn detect_frontier_cells(occ: &OccupancyMap) -> BTreeSet<Cell> {
    occ.spec()
        .cells()
        .filter(|&c| is_frontier_cell(occ, c))
        .collect()
}

/// Member cell nearest the members' mean; ties go to the smallest `(row, col)`.
fn centroid_of(cells: &[Cell]) -> Cell {
    let n = cells.len() as f64;
    let mc = cells.iter().map(|c| c.col as f64).sum::<f64>() / n;
    let mr = cells.iter().map(|c| c.row as f64).sum::<f64>() / n;
    let mut best = cells[0];
    let mut best_d = f64::INFINITY;
    for &c in cells {
        let d = (c.col as f64 - mc).powi(2) + (c.row as f64 - mr).powi(2);
        if d < best_d || (d == best_d && c < best) {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Groups cells into 8-connected components of at least `min_size` cells,
/// ordered by centroid.
pub fn cluster_frontiers(cells: &BTreeSet<Cell>, min_size: usize) -> Vec<Frontier> {
    let mut unvisited = cells.clone();
    let mut out = Vec::new();
    while let Some(seed) = unvisited.pop_first() {
        let mut component = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors8() {
                if unvisited.remove(&n) {
                    component.push(n);
                    queue.push_back(n);
                }
            }
        }
        if component.len() >= min_size.max(1) {
            component.sort();
            out.push(Frontier {
                centroid: centroid_of(&component),
                cells: component,
            });
        }
    }
    out.sort_by_key(|f| f.centroid);
    out
}

/// Number of frontiers available for planning.
pub fn frontier_count(frontiers: &[Frontier]) -> usize {
    frontiers.len()
}

/// Detects and clusters frontiers in one pass.
pub fn frontiers(occ: &OccupancyMap, min_size: usize) -> Vec<Frontier> {
    cluster_frontiers(&detect_frontier_cells(occ), min_size)
}
