//! Online geometric-semantic belief: a tri-state occupancy map and a
//! per-cell Gaussian relevance map with a conjugate update.

mod occupancy;
mod semantic;
pub mod snapshot;

pub use occupancy::{CellState, OccupancyMap, OccupancyParams, LOG_ODDS_LIMIT};
pub use semantic::{fuse, SemanticMap, PRIOR_MEAN, PRIOR_VARIANCE};
pub use snapshot::MapSnapshot;
