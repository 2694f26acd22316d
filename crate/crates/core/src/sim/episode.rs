//! The episode state machine: sense, map, detect, plan, act.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{EpisodeConfig, ScoreScale};
use super::env::Environment;
use crate::error::{Error, Result};
use crate::frontier::{frontiers, is_frontier_cell};
use crate::grid::{
    focal_cone, line_of_sight, normalize_angle, traverse, world_to_grid, Cell, FocalCone, Obstacles, Pose,
};
use crate::mapping::{MapSnapshot, OccupancyMap, SemanticMap};
use crate::planner::{
    check_detection, distance_field, plan_path, select_frontier, FrontierBelief, ReplanTrigger, UnknownPolicy,
};
use crate::rng::mix_seed;
use crate::sensor::{RelevanceObservation, ScoreSource, ViewRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Timeout,
    NoFrontier,
    SensorFailure,
    BadStop,
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub steps_used: u64,
    /// Meters actually travelled.
    pub path_length: f64,
    /// Meters from start to the nearest target along free space.
    pub shortest_path_len: f64,
    pub spl_term: f64,
    pub failure_reason: Option<FailureReason>,
    /// Meters from the final pose to the nearest target.
    pub final_distance: f64,
    pub collisions: u64,
}

/// Everything an episode leaves behind.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub result: EpisodeResult,
    pub trajectory: Vec<Pose>,
    pub occupancy: OccupancyMap,
    pub semantic: SemanticMap,
}

impl EpisodeOutcome {
    pub fn snapshot(&self) -> MapSnapshot {
        MapSnapshot::new(&self.occupancy, &self.semantic).expect("maps share a spec")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Goal {
    None,
    Frontier(Cell),
    Target(Cell),
}

/// Physical state of the robot in the ground-truth world.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    pub pose: Pose,
    pub steps: u64,
    pub path_length: f64,
    pub collided: bool,
    pub collisions: u64,
    pub stopped: bool,
    /// The cell that blocked the last forward move.
    pub blocked_by: Option<Cell>,
}

impl EpisodeState {
    pub fn new(start: Pose) -> Self {
        Self {
            pose: start,
            steps: 0,
            path_length: 0.0,
            collided: false,
            collisions: 0,
            stopped: false,
            blocked_by: None,
        }
    }
}

/// First truth-blocked cell swept by moving `length` meters from `pose`
/// along its heading, if any.
fn swept_obstacle<O: Obstacles>(world: &O, pose: &Pose, length: f64) -> Option<Cell> {
    let dir = (pose.heading.cos(), pose.heading.sin());
    let mut hit = None;
    traverse(world.spec(), pose.position(), dir, length, |c| {
        if world.is_blocked(c.cell) {
            hit = Some(c.cell);
            false
        } else {
            true
        }
    });
    if hit.is_none() {
        let end = (pose.x + length * dir.0, pose.y + length * dir.1);
        if world_to_grid(end, world.spec()).is_none() {
            // leaving the grid counts as hitting its edge
            hit = Some(Cell::new(-1, -1));
        }
    }
    hit
}

/// Applies one action to the ground-truth state.
pub fn step(state: &mut EpisodeState, env: &Environment, config: &EpisodeConfig, action: Action) -> Result<()> {
    if state.stopped {
        return Err(Error::EpisodeTerminated);
    }
    state.steps += 1;
    state.collided = false;
    state.blocked_by = None;
    match action {
        Action::Forward => {
            if let Some(cell) = swept_obstacle(&env.truth, &state.pose, config.step_size) {
                state.collided = true;
                state.collisions += 1;
                state.blocked_by = Some(cell);
            } else {
                let h = state.pose.heading;
                state.pose = Pose::new(
                    state.pose.x + config.step_size * h.cos(),
                    state.pose.y + config.step_size * h.sin(),
                    h,
                );
                state.path_length += config.step_size;
            }
        }
        Action::TurnLeft => state.pose = Pose::new(state.pose.x, state.pose.y, state.pose.heading + config.turn_angle),
        Action::TurnRight => state.pose = Pose::new(state.pose.x, state.pose.y, state.pose.heading - config.turn_angle),
        Action::Stop => state.stopped = true,
    }
    Ok(())
}

/// Success test: within clearance of a target that is in line of sight.
pub fn is_success_pose(env: &Environment, pose: &Pose, clearance: f64) -> bool {
    env.target_cells.iter().any(|&t| {
        let center = env.spec().cell_center(t);
        pose.distance_to(center) <= clearance && line_of_sight(&env.truth, pose.position(), center)
    })
}

struct Runner<'a, S> {
    env: &'a Environment,
    config: &'a EpisodeConfig,
    source: S,
    state: EpisodeState,
    occ: OccupancyMap,
    sem: SemanticMap,
    goal: Goal,
    planner_rng: ChaCha8Rng,
    detector_rng: ChaCha8Rng,
    blacklist: BTreeSet<Cell>,
    trajectory: Vec<Pose>,
    last_cell: Cell,
    idle_steps: u32,
    scan_turns: u32,
}

/// Turns allowed in place while waiting for a frontier under the robot to
/// resolve.
const FULL_SCAN: u32 = 12;

enum Decision {
    Act(Action),
    NoFrontier,
}

impl<'a, S: ScoreSource> Runner<'a, S> {
    fn robot_cell(&self) -> Cell {
        world_to_grid(self.state.pose.position(), self.env.spec()).expect("robot stays inside the grid")
    }

    fn sense(&mut self) -> Result<FocalCone> {
        let cone = focal_cone(&self.state.pose, &self.env.truth, &self.config.fov)?;
        self.occ.update(&cone)?;
        self.occ.mark_free(self.robot_cell())?;
        if cone.is_empty() {
            return Ok(cone);
        }
        let view = ViewRequest {
            episode: self.config.rng_seed,
            step: self.state.steps,
            pose: self.state.pose,
            target: &self.env.category,
            cone: &cone,
            fov: &self.config.fov,
            field: Some(&self.env.semantic_truth),
        };
        let sample = self.source.sample(&view)?;
        let mut obs = RelevanceObservation::from_sample(&sample, self.config.fov.horizontal_fov, self.config.convention)?;
        if self.config.score_scale == ScoreScale::Unit {
            obs = obs.to_unit_interval();
        }
        self.sem.update(&obs, &cone)?;
        Ok(cone)
    }

    fn detect(&mut self, cone: &FocalCone) {
        if matches!(self.goal, Goal::Target(_)) {
            return;
        }
        let det = &self.config.detection;
        if let Some(ev) = check_detection(&self.env.target_cells, cone, det.detect_range, self.state.steps) {
            if det.false_negative_rate == 0.0 || !self.detector_rng.random_bool(det.false_negative_rate) {
                self.goal = Goal::Target(ev.goal_cell);
                return;
            }
        }
        if det.false_positive_rate > 0.0 && self.detector_rng.random_bool(det.false_positive_rate) {
            let decoys: Vec<Cell> = cone
                .cells
                .iter()
                .filter(|v| !v.terminal && v.range <= det.detect_range && !self.env.target_cells.contains(&v.cell))
                .map(|v| v.cell)
                .collect();
            if !decoys.is_empty() {
                let k = self.detector_rng.random_range(0..decoys.len());
                self.goal = Goal::Target(decoys[k]);
            }
        }
    }

    /// Turn-then-forward controller toward the path's look-ahead point.
    fn follow(&self, path: &[Cell]) -> Action {
        let spec = self.env.spec();
        let pose = self.state.pose;
        let mut aim = spec.cell_center(path[1.min(path.len() - 1)]);
        for k in (2..path.len().min(5)).rev() {
            let c = spec.cell_center(path[k]);
            if line_of_sight(&self.occ, pose.position(), c) {
                aim = c;
                break;
            }
        }
        let desired = (aim.1 - pose.y).atan2(aim.0 - pose.x);
        let err = normalize_angle(desired - pose.heading);
        let tolerance = self.config.turn_angle / 2.0 + 1e-9;
        if err.abs() <= tolerance && swept_obstacle(&self.occ, &pose, self.config.step_size).is_none() {
            Action::Forward
        } else if err >= 0.0 {
            Action::TurnLeft
        } else {
            Action::TurnRight
        }
    }

    fn navigate(&self, goal: Cell, policies: &[UnknownPolicy]) -> Result<Option<Action>> {
        let here = self.robot_cell();
        for &p in policies {
            if let Some(path) = plan_path(&self.occ, here, goal, p)? {
                if path.cells.len() < 2 {
                    // on the goal cell: face its center
                    let c = self.env.spec().cell_center(goal);
                    let err = normalize_angle((c.1 - self.state.pose.y).atan2(c.0 - self.state.pose.x) - self.state.pose.heading);
                    return Ok(Some(if err >= 0.0 { Action::TurnLeft } else { Action::TurnRight }));
                }
                return Ok(Some(self.follow(&path.cells)));
            }
        }
        Ok(None)
    }

    fn candidates(&self) -> Result<(Vec<FrontierBelief>, bool)> {
        let here = self.robot_cell();
        let dist = distance_field(&self.occ, here, UnknownPolicy::Traversable)?;
        let spec = *self.env.spec();
        let mut underfoot = false;
        let mut out = Vec::new();
        for f in frontiers(&self.occ, self.config.min_frontier_size) {
            if f.centroid.chebyshev(here) == 0 {
                underfoot = true;
                continue;
            }
            if self.blacklist.contains(&f.centroid) || !spec.index(f.centroid).is_some_and(|i| dist[i].is_finite()) {
                continue;
            }
            out.push(FrontierBelief::from_map(f, &self.sem)?);
        }
        Ok((out, underfoot))
    }

    /// Picks a frontier goal. `Err(true)`: the only frontier is under the
    /// robot, so turning in place will resolve it.
    fn choose_frontier(&mut self) -> Result<std::result::Result<Cell, bool>> {
        let (mut candidates, mut underfoot) = self.candidates()?;
        if candidates.is_empty() && !self.blacklist.is_empty() {
            // every remaining frontier was given up on once; try them again
            self.blacklist.clear();
            (candidates, underfoot) = self.candidates()?;
        }
        if candidates.is_empty() {
            return Ok(Err(underfoot));
        }
        let i = select_frontier(&candidates, &self.state.pose, &self.occ, &self.config.planner, &mut self.planner_rng)?;
        Ok(Ok(candidates[i].frontier.centroid))
    }

    fn explore(&mut self) -> Result<Decision> {
        let here = self.robot_cell();
        loop {
            let replan = match self.goal {
                Goal::Frontier(c) => {
                    self.config.planner.replan_trigger == ReplanTrigger::EveryStep
                        || c.chebyshev(here) <= 1
                        || !is_frontier_cell(&self.occ, c)
                }
                _ => true,
            };
            if replan {
                match self.choose_frontier()? {
                    Ok(c) => {
                        self.goal = Goal::Frontier(c);
                        self.scan_turns = 0;
                    }
                    Err(true) if self.scan_turns < FULL_SCAN => {
                        self.goal = Goal::None;
                        self.scan_turns += 1;
                        return Ok(Decision::Act(Action::TurnLeft));
                    }
                    Err(_) => return Ok(Decision::NoFrontier),
                }
            }
            let Goal::Frontier(c) = self.goal else { unreachable!() };
            match self.navigate(c, &[UnknownPolicy::Traversable])? {
                Some(a) => return Ok(Decision::Act(a)),
                None => {
                    self.blacklist.insert(c);
                    self.goal = Goal::None;
                }
            }
        }
    }

    fn decide(&mut self) -> Result<Decision> {
        if let Goal::Target(t) = self.goal {
            let center = self.env.spec().cell_center(t);
            if self.state.pose.distance_to(center) <= self.config.clearance
                && line_of_sight(&self.occ, self.state.pose.position(), center)
            {
                return Ok(Decision::Act(Action::Stop));
            }
            if let Some(a) = self.navigate(t, &[UnknownPolicy::Blocked, UnknownPolicy::Traversable])? {
                return Ok(Decision::Act(a));
            }
            // unreachable goal: forget it and keep exploring
            self.blacklist.insert(t);
            self.goal = Goal::None;
        }
        self.explore()
    }

    /// Abandons the current goal when the robot has not changed cell for a
    /// while (e.g. repeated collisions).
    fn watch_progress(&mut self) {
        let here = self.robot_cell();
        if here != self.last_cell {
            self.last_cell = here;
            self.idle_steps = 0;
            return;
        }
        self.idle_steps += 1;
        if self.idle_steps >= self.config.stuck_limit {
            self.idle_steps = 0;
            match self.goal {
                Goal::Frontier(c) => {
                    self.blacklist.insert(c);
                    self.goal = Goal::None;
                }
                Goal::Target(_) | Goal::None => {}
            }
        }
    }

    fn finish(self, failure: Option<FailureReason>) -> EpisodeOutcome {
        let success = failure.is_none();
        let l = self.env.shortest_path_len;
        let p = self.state.path_length;
        let result = EpisodeResult {
            success,
            steps_used: self.state.steps,
            path_length: p,
            shortest_path_len: l,
            spl_term: if success { l / p.max(l) } else { 0.0 },
            failure_reason: failure,
            final_distance: self.env.distance_to_target(self.state.pose.position()),
            collisions: self.state.collisions,
        };
        EpisodeOutcome {
            result,
            trajectory: self.trajectory,
            occupancy: self.occ,
            semantic: self.sem,
        }
    }

    fn run(mut self) -> Result<EpisodeOutcome> {
        loop {
            if self.state.steps >= self.config.max_steps {
                return Ok(self.finish(Some(FailureReason::Timeout)));
            }
            let cone = match self.sense() {
                Ok(c) => c,
                Err(_) => return Ok(self.finish(Some(FailureReason::SensorFailure))),
            };
            self.detect(&cone);
            self.watch_progress();
            let action = match self.decide()? {
                Decision::Act(a) => a,
                Decision::NoFrontier => return Ok(self.finish(Some(FailureReason::NoFrontier))),
            };
            step(&mut self.state, self.env, self.config, action)?;
            if let Some(cell) = self.state.blocked_by {
                if self.env.spec().contains(cell) {
                    // bumper evidence
                    self.occ.observe_cell(cell, true)?;
                    self.occ.observe_cell(cell, true)?;
                }
            }
            self.trajectory.push(self.state.pose);
            if action == Action::Stop {
                let ok = is_success_pose(self.env, &self.state.pose, self.config.clearance);
                return Ok(self.finish((!ok).then_some(FailureReason::BadStop)));
            }
        }
    }
}

/// Runs one episode with an explicit score source.
pub fn run_episode_with<S: ScoreSource>(env: &Environment, config: &EpisodeConfig, source: S) -> Result<EpisodeOutcome> {
    config.validate()?;
    let spec = *env.spec();
    let start_cell = world_to_grid(env.start.position(), &spec).ok_or(Error::StartOutOfBounds)?;
    let runner = Runner {
        env,
        config,
        source,
        state: EpisodeState::new(env.start),
        occ: OccupancyMap::with_params(spec, config.occupancy),
        sem: SemanticMap::new(spec),
        goal: Goal::None,
        planner_rng: ChaCha8Rng::seed_from_u64(mix_seed(&[config.planner.rng_seed, 0x504c_414e])),
        detector_rng: ChaCha8Rng::seed_from_u64(mix_seed(&[config.rng_seed, 0x4445_5445])),
        blacklist: BTreeSet::new(),
        trajectory: vec![env.start],
        last_cell: start_cell,
        idle_steps: 0,
        scan_turns: 0,
    };
    runner.run()
}

/// Runs one episode with the score source described by the configuration.
pub fn run_episode(env: &Environment, config: &EpisodeConfig) -> Result<EpisodeOutcome> {
    let source = match config.sensor.build(config.rng_seed) {
        Ok(s) => s,
        Err(_) => {
            let spec = *env.spec();
            return Ok(EpisodeOutcome {
                result: EpisodeResult {
                    success: false,
                    steps_used: 0,
                    path_length: 0.0,
                    shortest_path_len: env.shortest_path_len,
                    spl_term: 0.0,
                    failure_reason: Some(FailureReason::SensorFailure),
                    final_distance: env.distance_to_target(env.start.position()),
                    collisions: 0,
                },
                trajectory: vec![env.start],
                occupancy: OccupancyMap::new(spec),
                semantic: SemanticMap::new(spec),
            });
        }
    };
    run_episode_with(env, config, source)
}
