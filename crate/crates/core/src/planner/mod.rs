//! Frontier selection framed as a multi-armed bandit.
//!
//! Every frontier is an arm whose reward belief is the relevance map's
//! Gaussian at the frontier centroid. Two acquisition rules pick the arm:
//! expected improvement over the best current frontier mean, and the upper
//! confidence bound `μ + √β σ`. Closest and uniformly random selection are
//! kept as semantics-blind baselines.

pub mod path;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::frontier::Frontier;
use crate::grid::{Cell, FocalCone, Pose};
use crate::mapping::{OccupancyMap, SemanticMap};

pub use path::{distance_field, plan_path, Path, UnknownPolicy};

/// Standard deviations at or below this are clamped before scoring.
pub const MIN_SIGMA: f64 = 1e-9;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Expected improvement `E[max(X − incumbent, 0)]` for `X ~ N(mu, sigma²)`.
pub fn expected_improvement(mu: f64, sigma: f64, incumbent: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    let diff = mu - incumbent;
    let z = diff / sigma;
    Ok((diff * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0))
}

/// Upper confidence bound `mu + √beta · sigma`.
pub fn gp_ucb(mu: f64, sigma: f64, beta: f64) -> f64 {
    mu + beta.sqrt() * sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Expected improvement.
    Ifbe1,
    /// GP-UCB.
    Ifbe2,
    /// Nearest frontier by path length.
    Closest,
    /// Uniformly random frontier.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Self::Ifbe1, Self::Ifbe2, Self::Closest, Self::Random];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ifbe1 => "ifbe1",
            Self::Ifbe2 => "ifbe2",
            Self::Closest => "closest",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

/// When a new frontier is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanTrigger {
    /// When the committed frontier is reached or disappears.
    #[default]
    OnArrival,
    EveryStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub strategy: Strategy,
    pub beta: f64,
    pub rng_seed: u64,
    pub replan_trigger: ReplanTrigger,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Ifbe2,
            beta: 1.5,
            rng_seed: 0,
            replan_trigger: ReplanTrigger::OnArrival,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be finite and nonnegative, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Relevance belief at a frontier's centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierBelief {
    pub frontier: Frontier,
    pub mu: f64,
    /// Standard deviation.
    pub sigma: f64,
}

impl FrontierBelief {
    pub fn from_map(frontier: Frontier, map: &SemanticMap) -> Result<Self> {
        let (mu, var) = map.query(frontier.centroid)?;
        Ok(Self {
            frontier,
            mu,
            sigma: var.sqrt(),
        })
    }
}

/// Index of the first maximum; ties keep the earlier entry.
fn argmax(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Chooses the next frontier. Beliefs are considered in centroid order, which
/// also breaks ties. Returns an index into `beliefs`.
pub fn select_frontier<R: Rng + ?Sized>(
    beliefs: &[FrontierBelief],
    robot: &Pose,
    occ: &OccupancyMap,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<usize> {
    if beliefs.is_empty() {
        return Err(Error::NoFrontier);
    }
    let mut order: Vec<usize> = (0..beliefs.len()).collect();
    order.sort_by_key(|&i| beliefs[i].frontier.centroid);
    let pick = match config.strategy {
        Strategy::Ifbe1 => {
            let incumbent = beliefs.iter().map(|b| b.mu).fold(f64::NEG_INFINITY, f64::max);
            let scores = order
                .iter()
                .map(|&i| expected_improvement(beliefs[i].mu, beliefs[i].sigma.max(MIN_SIGMA), incumbent))
                .collect::<Result<Vec<_>>>()?;
            argmax(scores.into_iter())
        }
        Strategy::Ifbe2 => argmax(order.iter().map(|&i| gp_ucb(beliefs[i].mu, beliefs[i].sigma, config.beta))),
        Strategy::Closest => {
            let start = crate::grid::world_to_grid(robot.position(), occ.spec()).ok_or(Error::StartOutOfBounds)?;
            let dist = distance_field(occ, start, UnknownPolicy::Traversable)?;
            let costs: Vec<f64> = order
                .iter()
                .map(|&i| {
                    let c = beliefs[i].frontier.centroid;
                    occ.spec().index(c).map_or(f64::INFINITY, |k| dist[k])
                })
                .collect();
            if costs.iter().all(|c| c.is_infinite()) {
                return Err(Error::NoFrontier);
            }
            argmax(costs.into_iter().map(|c| -c))
        }
        Strategy::Random => Some(rng.random_range(0..order.len())),
    };
    Ok(order[pick.expect("nonempty")])
}

/// The simulated detector fired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub goal_cell: Cell,
    pub step: u64,
}

/// Fires when a target cell is in view within `detect_range`; the goal is
/// the nearest such cell.
pub fn check_detection(
    target_cells: &[Cell],
    cone: &FocalCone,
    detect_range: f64,
    step: u64,
) -> Option<DetectionEvent> {
    target_cells
        .iter()
        .filter_map(|&c| cone.get(c))
        .filter(|v| v.range <= detect_range)
        .min_by(|a, b| a.range.total_cmp(&b.range).then(a.cell.cmp(&b.cell)))
        .map(|v| DetectionEvent {
            goal_cell: v.cell,
            step,
        })
}
