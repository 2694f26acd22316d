use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FovSpec;
use crate::mapping::OccupancyParams;
use crate::planner::PlannerConfig;
use crate::sensor::bridge::{BridgeSource, Endpoint};
use crate::sensor::replay::ReplaySource;
use crate::sensor::{ConfidenceConvention, PromptEnsemble, ScoreSource, SyntheticConfig, SyntheticSensor};

/// Scale on which relevance measurements are fused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreScale {
    /// Raw cosine scale.
    #[default]
    Cosine,
    /// Affinely mapped from `[-1, 1]` to `[0, 1]`.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Meters.
    pub detect_range: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            detect_range: 4.0,
            false_positive_rate: 0.0,
            false_negative_rate: 0.0,
        }
    }
}

/// Which score source feeds the relevance map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum SensorConfig {
    Synthetic(SyntheticConfig),
    Replay {
        trace: PathBuf,
    },
    Bridge {
        #[serde(default)]
        endpoint: Option<String>,
        #[serde(default = "PromptEnsemble::default_templates")]
        prompts: PromptEnsemble,
    },
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self::Synthetic(SyntheticConfig::default())
    }
}

impl SensorConfig {
    pub fn build(&self, seed: u64) -> Result<Box<dyn ScoreSource + Send>> {
        Ok(match self {
            Self::Synthetic(c) => Box::new(SyntheticSensor::new(c.clone(), seed)?),
            Self::Replay { trace } => {
                let file = std::fs::File::open(trace).map_err(|source| Error::Io {
                    path: trace.clone(),
                    source,
                })?;
                Box::new(ReplaySource::from_reader(std::io::BufReader::new(file))?)
            }
            Self::Bridge { endpoint, prompts } => {
                let endpoint = Endpoint::resolve(endpoint.as_deref())?;
                Box::new(BridgeSource::connect(&endpoint, prompts.clone())?)
            }
        })
    }
}

/// Everything that parameterizes one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Step budget T.
    pub max_steps: u64,
    /// Success radius c in meters.
    pub clearance: f64,
    /// Meters per forward action.
    pub step_size: f64,
    /// Radians per turn action.
    pub turn_angle: f64,
    pub fov: FovSpec,
    pub convention: ConfidenceConvention,
    pub score_scale: ScoreScale,
    pub detection: DetectionConfig,
    pub sensor: SensorConfig,
    pub planner: PlannerConfig,
    pub occupancy: OccupancyParams,
    pub min_frontier_size: usize,
    /// Steps without changing cell before a frontier goal is abandoned.
    pub stuck_limit: u32,
    pub rng_seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 500,
            clearance: 1.0,
            step_size: 0.25,
            turn_angle: 30f64.to_radians(),
            fov: FovSpec::default(),
            convention: ConfidenceConvention::Vlfm,
            score_scale: ScoreScale::Cosine,
            detection: DetectionConfig::default(),
            sensor: SensorConfig::default(),
            planner: PlannerConfig::default(),
            occupancy: OccupancyParams::default(),
            min_frontier_size: crate::frontier::DEFAULT_MIN_SIZE,
            stuck_limit: 24,
            rng_seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        for (name, v) in [
            ("clearance", self.clearance),
            ("step_size", self.step_size),
            ("turn_angle", self.turn_angle),
            ("detection.detect_range", self.detection.detect_range),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("detection.false_positive_rate", self.detection.false_positive_rate),
            ("detection.false_negative_rate", self.detection.false_negative_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.stuck_limit == 0 {
            return Err(Error::Config("stuck_limit must be positive".into()));
        }
        self.fov.validate()?;
        self.planner.validate()?;
        if let SensorConfig::Synthetic(c) = &self.sensor {
            c.validate()?;
        }
        Ok(())
    }
}
