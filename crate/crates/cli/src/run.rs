use std::fs;
use std::path::{Path, PathBuf};

use banditnav::planner::Strategy;
use banditnav::sensor::bridge::{Endpoint, ENDPOINT_ENV};
use banditnav::sim::{generate_environment, run_episode, EpisodeConfig, GenConfig, SensorConfig};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::records::{stem, write_json, EpisodeRecord, EPISODES_DIR, MAPS_DIR};
use crate::report::{table, write_metrics};

/// Contents of a run configuration file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Option<String>,
    pub strategies: Option<Vec<Strategy>>,
    pub environment: GenConfig,
    pub episode: EpisodeConfig,
}

/// A fully resolved batch.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub out: PathBuf,
    pub jobs: usize,
}

/// Parses `a..b`, `a..=b`, `n` or `a,b,c`.
pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Config(format!("seeds: cannot parse {text:?} (expected a..b, a..=b, n or a,b,c)"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = text.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        text.split(',').map(num).collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(CliError::Config(format!("seeds: {text:?} is empty")));
    }
    Ok(seeds)
}

pub fn parse_strategies(text: &str) -> CliResult<Vec<Strategy>> {
    let mut out = Vec::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s: Strategy = name.parse().map_err(|_| {
            CliError::Config(format!(
                "strategies: unknown strategy {name:?} (expected one of ifbe1, ifbe2, closest, random)"
            ))
        })?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("strategies: list is empty".into()));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    // replay traces are relative to the config file
    if let SensorConfig::Replay { trace } = &mut config.episode.sensor {
        if trace.is_relative() {
            *trace = path.parent().unwrap_or(Path::new(".")).join(&*trace);
        }
    }
    if let SensorConfig::Bridge { endpoint, .. } = &config.episode.sensor {
        Endpoint::resolve(endpoint.as_deref())
            .map_err(|e| CliError::Config(format!("episode.sensor.endpoint: {e} (or set {ENDPOINT_ENV})")))?;
    }
    config.environment.validate()?;
    config.episode.validate()?;
    Ok(config)
}

/// Resolves flags against the config file; flags win.
pub fn manifest(
    config_path: &Path,
    out: &Path,
    seeds: Option<&str>,
    strategies: Option<&str>,
    jobs: usize,
) -> CliResult<RunManifest> {
    let config = load_config(config_path)?;
    let seeds = match seeds.or(config.seeds.as_deref()) {
        Some(s) => parse_seeds(s)?,
        None => return Err(CliError::Config("seeds: none given (use --seeds or `seeds` in the config)".into())),
    };
    let strategies = match strategies {
        Some(s) => parse_strategies(s)?,
        None => match &config.strategies {
            Some(list) if list.is_empty() => return Err(CliError::Config("strategies: list is empty".into())),
            Some(list) => list.clone(),
            None => Strategy::ALL.to_vec(),
        },
    };
    if jobs == 0 {
        return Err(CliError::Config("jobs: must be at least 1".into()));
    }
    Ok(RunManifest {
        config,
        seeds,
        strategies,
        out: out.to_path_buf(),
        jobs,
    })
}

fn run_one(m: &RunManifest, seed: u64, strategy: Strategy) -> CliResult<EpisodeRecord> {
    let env = generate_environment(&m.config.environment, seed)
        .map_err(|e| CliError::Runtime(format!("seed {seed}: {e}")))?;
    let mut config = m.config.episode.clone();
    config.rng_seed = config.rng_seed.wrapping_add(seed);
    config.planner.rng_seed = config.planner.rng_seed.wrapping_add(seed);
    config.planner.strategy = strategy;
    let outcome = run_episode(&env, &config).map_err(|e| CliError::Runtime(format!("seed {seed}, {strategy}: {e}")))?;

    let name = stem(strategy, seed);
    let snapshot = Path::new(MAPS_DIR).join(format!("{name}.gsmap"));
    outcome.snapshot().save(&m.out.join(&snapshot))?;
    let record = EpisodeRecord {
        seed,
        strategy,
        category: env.category.clone(),
        result: outcome.result,
        trajectory: outcome.trajectory.iter().map(|p| [p.x, p.y, p.heading]).collect(),
        snapshot,
    };
    write_json(&m.out.join(EPISODES_DIR).join(format!("{name}.json")), &record)?;
    Ok(record)
}

pub fn cmd_run(m: &RunManifest) -> CliResult<()> {
    for dir in [m.out.clone(), m.out.join(EPISODES_DIR), m.out.join(MAPS_DIR)] {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    let jobs: Vec<(u64, Strategy)> = m
        .seeds
        .iter()
        .flat_map(|&seed| m.strategies.iter().map(move |&s| (seed, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(m.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut records: Vec<EpisodeRecord> =
        pool.install(|| jobs.par_iter().map(|&(seed, s)| run_one(m, seed, s)).collect::<CliResult<_>>())?;
    records.sort_by_key(|r| stem(r.strategy, r.seed));
    let rows = write_metrics(&m.out, &records)?;
    print!("{}", table(&rows));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_forms() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("5, 1,9").unwrap(), vec![5, 1, 9]);
        assert!(matches!(parse_seeds("3..3"), Err(CliError::Config(_))));
        assert!(matches!(parse_seeds("x..4"), Err(CliError::Config(_))));
    }

    #[test]
    fn strategy_lists() {
        assert_eq!(
            parse_strategies("ifbe2, closest,ifbe2").unwrap(),
            vec![Strategy::Ifbe2, Strategy::Closest]
        );
        let err = parse_strategies("ifbe2,greedy").unwrap_err().to_string();
        assert!(err.contains("strategies") && err.contains("greedy"), "{err}");
    }
}
