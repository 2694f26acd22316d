use serde::{Deserialize, Serialize};

use super::episode::EpisodeResult;
use crate::error::{Error, Result};

/// Aggregate success rate and SPL, both in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub sr: f64,
    pub spl: f64,
}

/// Success weighted by path length for a single episode.
pub fn spl_term(success: bool, shortest: f64, actual: f64) -> f64 {
    if success {
        shortest / actual.max(shortest)
    } else {
        0.0
    }
}

/// SR and SPL over `results`, each paired with the shortest start-to-target
/// path length of its environment.
pub fn compute_metrics(results: &[EpisodeResult], shortest_path_lens: &[f64]) -> Result<Metrics> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    if results.len() != shortest_path_lens.len() {
        return Err(Error::DimensionMismatch(results.len(), shortest_path_lens.len()));
    }
    let n = results.len() as f64;
    let successes = results.iter().filter(|r| r.success).count() as f64;
    let spl_sum: f64 = results
        .iter()
        .zip(shortest_path_lens)
        .map(|(r, &l)| spl_term(r.success, l, r.path_length))
        .sum();
    Ok(Metrics {
        episodes: results.len(),
        sr: 100.0 * successes / n,
        spl: 100.0 * spl_sum / n,
    })
}

/// [`compute_metrics`] using the shortest path length stored in each result.
pub fn metrics_of(results: &[EpisodeResult]) -> Result<Metrics> {
    let lens: Vec<f64> = results.iter().map(|r| r.shortest_path_len).collect();
    compute_metrics(results, &lens)
}
