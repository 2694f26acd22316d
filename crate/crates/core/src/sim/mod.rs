//! Environment generation, the episode loop and SR/SPL metrics.

mod config;
pub mod env;
pub mod episode;
mod metrics;

pub use config::{DetectionConfig, EpisodeConfig, ScoreScale, SensorConfig};
pub use env::{generate_environment, relevance_field, Environment, GenConfig, GroundTruth};
pub use episode::{
    is_success_pose, run_episode, run_episode_with, step, Action, EpisodeOutcome, EpisodeResult, EpisodeState,
    FailureReason,
};
pub use metrics::{compute_metrics, metrics_of, spl_term, Metrics};
