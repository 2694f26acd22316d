//! On-disk layout of a results directory:
//!
//! ```text
//! <out>/episodes/<strategy>-<seed>.json   one EpisodeRecord each
//! <out>/maps/<strategy>-<seed>.gsmap      final map snapshot
//! <out>/metrics.csv
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use banditnav::planner::Strategy;
use banditnav::sim::EpisodeResult;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const EPISODES_DIR: &str = "episodes";
pub const MAPS_DIR: &str = "maps";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub strategy: Strategy,
    pub category: String,
    pub result: EpisodeResult,
    /// `[x, y, heading]` after every step, starting with the start pose.
    pub trajectory: Vec<[f64; 3]>,
    /// Snapshot path relative to the results directory.
    pub snapshot: PathBuf,
}

pub fn stem(strategy: Strategy, seed: u64) -> String {
    format!("{strategy}-{seed:06}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_record(path: &Path) -> CliResult<EpisodeRecord> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, format!("malformed episode record: {e}")))
}

/// All episode records under `dir`, in file-name order.
pub fn read_all(dir: &Path) -> CliResult<Vec<EpisodeRecord>> {
    if !dir.is_dir() {
        return Err(CliError::io(dir, "results directory not found"));
    }
    let episodes = dir.join(EPISODES_DIR);
    let mut paths: Vec<PathBuf> = match fs::read_dir(&episodes) {
        Ok(entries) => entries
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::io(&episodes, e))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(CliError::io(&episodes, e)),
    };
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::io(dir, "no episode records"));
    }
    paths.iter().map(|p| read_record(p)).collect()
}
