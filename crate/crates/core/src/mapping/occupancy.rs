use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, FocalCone, GridSpec, Obstacles};

/// Log-odds are clamped to `±LOG_ODDS_LIMIT`.
pub const LOG_ODDS_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

/// Evidence weights and classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancyParams {
    pub occupied_threshold: f64,
    pub free_threshold: f64,
    pub hit_increment: f64,
    pub miss_decrement: f64,
}

impl Default for OccupancyParams {
    fn default() -> Self {
        Self {
            occupied_threshold: 0.85,
            free_threshold: -0.85,
            hit_increment: 0.9,
            miss_decrement: 0.9,
        }
    }
}

/// Tri-state occupancy belief backed by per-cell log-odds.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    spec: GridSpec,
    log_odds: Vec<f64>,
    params: OccupancyParams,
}

impl OccupancyMap {
    pub fn new(spec: GridSpec) -> Self {
        Self::with_params(spec, OccupancyParams::default())
    }

    pub fn with_params(spec: GridSpec, params: OccupancyParams) -> Self {
        Self {
            log_odds: vec![0.0; spec.len()],
            spec,
            params,
        }
    }

    pub(crate) fn from_log_odds(spec: GridSpec, log_odds: Vec<f64>) -> Self {
        debug_assert_eq!(log_odds.len(), spec.len());
        Self {
            spec,
            log_odds,
            params: OccupancyParams::default(),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn params(&self) -> &OccupancyParams {
        &self.params
    }

    pub fn log_odds(&self) -> &[f64] {
        &self.log_odds
    }

    pub fn log_odds_at(&self, cell: Cell) -> Option<f64> {
        self.spec.index(cell).map(|i| self.log_odds[i])
    }

    fn classify(&self, l: f64) -> CellState {
        if l > self.params.occupied_threshold {
            CellState::Occupied
        } else if l < self.params.free_threshold {
            CellState::Free
        } else {
            CellState::Unknown
        }
    }

    /// State of a cell; out-of-bounds cells are unknown.
    pub fn state(&self, cell: Cell) -> CellState {
        self.spec
            .index(cell)
            .map_or(CellState::Unknown, |i| self.classify(self.log_odds[i]))
    }

    pub fn state_at(&self, index: usize) -> CellState {
        self.classify(self.log_odds[index])
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.state(cell) == CellState::Free
    }

    fn add(&mut self, index: usize, delta: f64) {
        let l = &mut self.log_odds[index];
        *l = (*l + delta).clamp(-LOG_ODDS_LIMIT, LOG_ODDS_LIMIT);
    }

    /// Adds free evidence for cells a ray passed through and occupied
    /// evidence for the cells that stopped a ray.
    pub fn update(&mut self, cone: &FocalCone) -> Result<()> {
        self.check_spec(&cone.spec)?;
        for v in &cone.cells {
            let i = self.spec.index(v.cell).ok_or(Error::OutOfBounds(v.cell))?;
            if v.terminal {
                self.add(i, self.params.hit_increment);
            } else {
                self.add(i, -self.params.miss_decrement);
            }
        }
        Ok(())
    }

    /// Records one observation of a single cell.
    pub fn observe_cell(&mut self, cell: Cell, occupied: bool) -> Result<()> {
        let i = self.spec.index(cell).ok_or(Error::OutOfBounds(cell))?;
        let delta = if occupied {
            self.params.hit_increment
        } else {
            -self.params.miss_decrement
        };
        self.add(i, delta);
        Ok(())
    }

    /// Forces a cell to be known free, e.g. the cell the robot stands on.
    pub fn mark_free(&mut self, cell: Cell) -> Result<()> {
        let i = self.spec.index(cell).ok_or(Error::OutOfBounds(cell))?;
        let floor = self.params.free_threshold - self.params.miss_decrement;
        self.log_odds[i] = self.log_odds[i].min(floor).max(-LOG_ODDS_LIMIT);
        Ok(())
    }

    pub(crate) fn check_spec(&self, other: &GridSpec) -> Result<()> {
        if other != &self.spec {
            return Err(Error::SpecMismatch {
                expected_w: self.spec.width,
                expected_h: self.spec.height,
                got_w: other.width,
                got_h: other.height,
            });
        }
        Ok(())
    }

    pub fn count(&self, state: CellState) -> usize {
        (0..self.log_odds.len()).filter(|&i| self.state_at(i) == state).count()
    }
}

impl Obstacles for OccupancyMap {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        self.state(cell) == CellState::Occupied
    }
}
