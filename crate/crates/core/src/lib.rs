//! Uncertainty-informed frontier exploration for object-goal navigation.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: world/grid transforms, ray traversal and the focal cone.
//! - [`sensor`]: prompt-ensemble relevance measurements and score sources.
//! - [`mapping`]: log-odds occupancy and the Gaussian relevance map.
//! - [`frontier`]: frontier detection and clustering.
//! - [`planner`]: bandit frontier selection, detection gate and A*.
//! - [`sim`]: environments, the episode loop and SR/SPL metrics.
//!
//! ```
//! use banditnav::sim::{generate_environment, run_episode, EpisodeConfig, GenConfig};
//!
//! let env = generate_environment(&GenConfig::default(), 7).unwrap();
//! let config = EpisodeConfig { max_steps: 50, ..EpisodeConfig::default() };
//! let outcome = run_episode(&env, &config).unwrap();
//! assert!(outcome.result.steps_used <= 50);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frontier;
pub mod grid;
pub mod mapping;
pub mod planner;
pub mod rng;
pub mod sensor;
pub mod sim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sensor-model.md")]
    mod sensor_model {}
    #[doc = include_str!("../../../book/src/mapping.md")]
    mod mapping {}
    #[doc = include_str!("../../../book/src/frontier-bandits.md")]
    mod frontier_bandits {}
    #[doc = include_str!("../../../book/src/episodes.md")]
    mod episodes {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
