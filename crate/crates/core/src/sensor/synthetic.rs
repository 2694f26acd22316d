//! Synthetic score source driven by a ground-truth relevance field.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    viewpoint_confidence, ConfidenceConvention, RelevanceObservation, ScoreSample, ScoreSource,
    SemanticField, ViewRequest,
};
use crate::error::{Error, Result};
use crate::grid::{FovSpec, VisibleCell};
use crate::rng::mix_seed;

/// Systematic behavior of one simulated prompt: its score is
/// `gain * relevance + bias` before noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptPersonality {
    pub bias: f64,
    #[serde(default = "one")]
    pub gain: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PromptPersonality {
    fn default() -> Self {
        Self { bias: 0.0, gain: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Number of prompts when `personalities` is empty.
    pub ensemble_size: usize,
    pub noise_sigma: f64,
    pub convention: ConfidenceConvention,
    /// One entry per prompt; overrides `ensemble_size` when nonempty.
    pub personalities: Vec<PromptPersonality>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 7,
            noise_sigma: 0.05,
            convention: ConfidenceConvention::Vlfm,
            personalities: Vec::new(),
        }
    }
}

impl SyntheticConfig {
    pub fn prompt_count(&self) -> usize {
        if self.personalities.is_empty() {
            self.ensemble_size
        } else {
            self.personalities.len()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.prompt_count() == 0 {
            return Err(Error::Config("synthetic sensor needs at least one prompt".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    fn personality(&self, i: usize) -> PromptPersonality {
        self.personalities.get(i).copied().unwrap_or_default()
    }
}

/// Confidence-weighted mean of the field over the visible cells. Falls back
/// to the plain mean when every weight is zero.
pub fn view_relevance(
    field: &SemanticField,
    visible: &[VisibleCell],
    fov: f64,
    convention: ConfidenceConvention,
) -> Result<f64> {
    if visible.is_empty() {
        return Err(Error::EmptyView);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut plain = 0.0;
    for v in visible {
        let value = field.value(v.cell).ok_or(Error::OutOfBounds(v.cell))?;
        let w = viewpoint_confidence(v.bearing, fov, convention)?;
        num += w * value;
        den += w;
        plain += value;
    }
    Ok(if den > 0.0 {
        num / den
    } else {
        plain / visible.len() as f64
    })
}

/// Scores a view against a simulated ensemble: each prompt reports the view
/// relevance through its personality plus Gaussian noise, clamped to the
/// cosine range.
pub fn observe_synthetic(
    field: &SemanticField,
    visible: &[VisibleCell],
    fov: &FovSpec,
    config: &SyntheticConfig,
    seed: u64,
) -> Result<(ScoreSample, RelevanceObservation)> {
    config.validate()?;
    let relevance = view_relevance(field, visible, fov.horizontal_fov, config.convention)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let scores = (0..config.prompt_count())
        .map(|i| {
            let p = config.personality(i);
            let eps = if config.noise_sigma > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            (p.gain * relevance + p.bias + eps).clamp(-1.0, 1.0)
        })
        .collect();
    let sample = ScoreSample { scores };
    let obs = RelevanceObservation::from_sample(&sample, fov.horizontal_fov, config.convention)?;
    Ok((sample, obs))
}

/// [`ScoreSource`] wrapper around [`observe_synthetic`], seeded per view.
#[derive(Debug, Clone)]
pub struct SyntheticSensor {
    pub config: SyntheticConfig,
    pub seed: u64,
}

impl SyntheticSensor {
    pub fn new(config: SyntheticConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, seed })
    }
}

impl ScoreSource for SyntheticSensor {
    fn sample(&mut self, view: &ViewRequest<'_>) -> Result<ScoreSample> {
        let field = view
            .field
            .ok_or_else(|| Error::Config("synthetic sensor requires a ground-truth field".into()))?;
        let seed = mix_seed(&[self.seed, view.episode, view.step]);
        observe_synthetic(field, &view.cone.cells, view.fov, &self.config, seed).map(|(s, _)| s)
    }
}
