use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use banditnav::sim::{metrics_of, EpisodeResult, Metrics};

use crate::error::{CliError, CliResult};
use crate::records::{read_all, EpisodeRecord, METRICS_FILE};

pub const CSV_HEADER: &str = "strategy,episodes,sr,spl,mean_steps,mean_path_m";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub strategy: String,
    pub metrics: Metrics,
    pub mean_steps: f64,
    pub mean_path_m: f64,
}

/// One row per strategy, sorted by strategy name.
pub fn rows(records: &[EpisodeRecord]) -> CliResult<Vec<Row>> {
    let mut groups: BTreeMap<&str, Vec<EpisodeResult>> = BTreeMap::new();
    for r in records {
        groups.entry(r.strategy.name()).or_default().push(r.result.clone());
    }
    groups
        .into_iter()
        .map(|(name, results)| {
            let n = results.len() as f64;
            Ok(Row {
                strategy: name.to_string(),
                metrics: metrics_of(&results)?,
                mean_steps: results.iter().map(|r| r.steps_used as f64).sum::<f64>() / n,
                mean_path_m: results.iter().map(|r| r.path_length).sum::<f64>() / n,
            })
        })
        .collect()
}

/// Full-precision CSV; floats use the shortest round-trip representation.
pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.strategy, r.metrics.episodes, r.metrics.sr, r.metrics.spl, r.mean_steps, r.mean_path_m
        );
    }
    out
}

pub fn table(rows: &[Row]) -> String {
    let mut out = format!(
        "{:<10} {:>8} {:>7} {:>7} {:>10} {:>11}\n",
        "strategy", "episodes", "SR", "SPL", "mean_steps", "mean_path_m"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>7.2} {:>7.2} {:>10.1} {:>11.2}",
            r.strategy, r.metrics.episodes, r.metrics.sr, r.metrics.spl, r.mean_steps, r.mean_path_m
        );
    }
    out
}

/// Writes `metrics.csv` into `dir` and returns the rows.
pub fn write_metrics(dir: &Path, records: &[EpisodeRecord]) -> CliResult<Vec<Row>> {
    let rows = rows(records)?;
    let path = dir.join(METRICS_FILE);
    fs::write(&path, csv(&rows)).map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}

/// Recomputes metrics from the records in `dir`, rewrites its CSV and
/// returns the human-readable table.
pub fn cmd_report(dir: &Path) -> CliResult<String> {
    let records = read_all(dir)?;
    Ok(table(&write_metrics(dir, &records)?))
}
