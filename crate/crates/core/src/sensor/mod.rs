//! Probabilistic semantic-relevance sensor.
//!
//! A view is scored against every prompt of an ensemble. The spread of those
//! cosine similarities is the sensor's data uncertainty: the ensemble mean and
//! population variance parameterize a Gaussian measurement, and a viewpoint
//! confidence term inflates the variance for rays far from the optical axis.
//!
//! Scores come from one of three interchangeable [`ScoreSource`]s: a
//! synthetic field ([`synthetic`]), a recorded trace ([`replay`]) or a live
//! model behind the line protocol ([`bridge`]).

pub mod bridge;
pub mod replay;
pub mod synthetic;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FocalCone, FovSpec, GridSpec, Pose};

pub use synthetic::{observe_synthetic, PromptPersonality, SyntheticConfig, SyntheticSensor};

/// Measurement variances are floored here so a noiseless ensemble never
/// produces a degenerate (zero-variance) map update.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Cosine similarity between two embeddings.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Prompt paraphrases for one target category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptEnsemble {
    pub prompts: Vec<String>,
    #[serde(default = "default_target_token")]
    pub target_token: String,
}

fn default_target_token() -> String {
    "{target}".to_owned()
}

impl PromptEnsemble {
    pub fn new(prompts: Vec<String>) -> Result<Self> {
        let ensemble = Self {
            prompts,
            target_token: default_target_token(),
        };
        ensemble.instantiate("target")?;
        Ok(ensemble)
    }

    /// Seven paraphrases built around the two classic relevance prompts.
    pub fn default_templates() -> Self {
        Self {
            prompts: [
                "Seems like there is a {target} ahead.",
                "A {target} is in the vicinity.",
                "There is a {target} ahead.",
                "A {target} might be close by.",
                "I can probably find a {target} over there.",
                "This area likely contains a {target}.",
                "Head this way to reach a {target}.",
            ]
            .map(str::to_owned)
            .to_vec(),
            target_token: default_target_token(),
        }
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    /// Substitutes the target name into every prompt.
    pub fn instantiate(&self, target: &str) -> Result<Vec<String>> {
        if self.prompts.len() < 2 {
            return Err(Error::InvalidEnsemble(format!(
                "need at least 2 prompts, got {}",
                self.prompts.len()
            )));
        }
        let out: Vec<String> = self
            .prompts
            .iter()
            .map(|p| p.replace(&self.target_token, target))
            .collect();
        let mut sorted = out.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidEnsemble("duplicate prompts".into()));
        }
        Ok(out)
    }
}

/// Cosine similarities of one view against each prompt, in prompt order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    pub scores: Vec<f64>,
}

impl ScoreSample {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = scores.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
            return Err(Error::ScoreRange(bad));
        }
        Ok(Self { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Ensemble mean and population variance (divisor N).
pub fn ensemble_stats(sample: &ScoreSample) -> Result<(f64, f64)> {
    let n = sample.scores.len();
    if n < 2 {
        return Err(Error::EnsembleTooSmall(n));
    }
    let nf = n as f64;
    let mean = sample.scores.iter().sum::<f64>() / nf;
    let var = sample.scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / nf;
    Ok((mean, var))
}

/// How the viewpoint confidence maps a bearing to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceConvention {
    /// `cos²(θπ/θ_fov)`: one on the optical axis, zero at the FOV edge.
    #[default]
    Vlfm,
    /// `cos²(2θπ/θ_fov)`: zero at a quarter FOV and one again at the edge.
    Literal,
}

/// Confidence that a ray at `bearing` from the optical axis sees relevant
/// content.
pub fn viewpoint_confidence(bearing: f64, fov: f64, convention: ConfidenceConvention) -> Result<f64> {
    let half = fov / 2.0;
    // rays at the exact FOV edge are produced by floating arithmetic
    if bearing.abs() > half * (1.0 + 1e-12) {
        return Err(Error::BearingOutsideFov {
            bearing,
            half_fov: half,
        });
    }
    let arg = match convention {
        ConfidenceConvention::Vlfm => bearing * PI / fov,
        ConfidenceConvention::Literal => 2.0 * bearing * PI / fov,
    };
    Ok(arg.cos().powi(2))
}

/// Ensemble variance inflated by the viewpoint confidence of one ray.
pub fn per_ray_variance(
    ensemble_variance: f64,
    bearing: f64,
    fov: f64,
    convention: ConfidenceConvention,
) -> Result<f64> {
    if !(ensemble_variance >= 0.0) {
        return Err(Error::NegativeVariance(ensemble_variance));
    }
    Ok(ensemble_variance + (1.0 - viewpoint_confidence(bearing, fov, convention)?))
}

/// One Gaussian semantic-relevance measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceObservation {
    pub mean: f64,
    pub ensemble_variance: f64,
    pub fov: f64,
    pub convention: ConfidenceConvention,
}

impl RelevanceObservation {
    /// Builds the measurement from an ensemble sample. A single score is
    /// accepted as a point estimate with zero ensemble variance.
    pub fn from_sample(sample: &ScoreSample, fov: f64, convention: ConfidenceConvention) -> Result<Self> {
        let (mean, ensemble_variance) = match sample.scores.as_slice() {
            [] => return Err(Error::EnsembleTooSmall(0)),
            [only] => (*only, 0.0),
            _ => ensemble_stats(sample)?,
        };
        Ok(Self {
            mean,
            ensemble_variance,
            fov,
            convention,
        })
    }

    /// Variance of the measurement along the ray at `bearing`, floored at
    /// [`VARIANCE_FLOOR`].
    pub fn variance_at(&self, bearing: f64) -> Result<f64> {
        Ok(per_ray_variance(self.ensemble_variance, bearing, self.fov, self.convention)?.max(VARIANCE_FLOOR))
    }

    /// Maps the mean from cosine scale `[-1, 1]` to `[0, 1]`; variances scale
    /// by the square of the slope.
    pub fn to_unit_interval(self) -> Self {
        Self {
            mean: (self.mean + 1.0) / 2.0,
            ensemble_variance: self.ensemble_variance / 4.0,
            ..self
        }
    }
}

/// Ground-truth relevance of every cell for the current target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl SemanticField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch(values.len(), spec.len()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("field value {v} outside [0, 1]")));
        }
        Ok(Self { spec, values })
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        Self {
            values: vec![value; spec.len()],
            spec,
        }
    }

    pub fn value(&self, cell: crate::grid::Cell) -> Option<f64> {
        self.spec.index(cell).map(|i| self.values[i])
    }
}

/// Everything a score source may need to score one view.
#[derive(Debug, Clone, Copy)]
pub struct ViewRequest<'a> {
    pub episode: u64,
    pub step: u64,
    pub pose: Pose,
    pub target: &'a str,
    pub cone: &'a FocalCone,
    pub fov: &'a FovSpec,
    /// Ground truth, available only in simulation.
    pub field: Option<&'a SemanticField>,
}

/// A producer of per-prompt scores for a view.
pub trait ScoreSource {
    fn sample(&mut self, view: &ViewRequest<'_>) -> Result<ScoreSample>;
}

impl<S: ScoreSource + ?Sized> ScoreSource for Box<S> {
    fn sample(&mut self, view: &ViewRequest<'_>) -> Result<ScoreSample> {
        (**self).sample(view)
    }
}
