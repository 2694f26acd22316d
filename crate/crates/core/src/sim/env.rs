//! Procedural indoor environments: a jittered grid of rectangular rooms
//! joined by doorways, optional furniture blocks, and one target object.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridSpec, Obstacles, Pose};
use crate::mapping::OccupancyMap;
use crate::planner::{distance_field, UnknownPolicy};
use crate::rng::mix_seed;
use crate::sensor::SemanticField;

const MAX_ATTEMPTS: usize = 100;

/// Ground-truth occupancy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: GridSpec,
    pub occupied: Vec<bool>,
}

impl GroundTruth {
    pub fn open(spec: GridSpec) -> Self {
        Self {
            occupied: vec![false; spec.len()],
            spec,
        }
    }

    pub fn set(&mut self, cell: Cell, occupied: bool) {
        if let Some(i) = self.spec.index(cell) {
            self.occupied[i] = occupied;
        }
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.spec.index(cell).is_some_and(|i| !self.occupied[i])
    }

    /// Fully observed belief map with the same contents.
    pub fn to_occupancy_map(&self) -> OccupancyMap {
        let mut occ = OccupancyMap::new(self.spec);
        for (i, &o) in self.occupied.iter().enumerate() {
            let c = self.spec.cell_at(i);
            if o {
                occ.observe_cell(c, true).expect("in bounds");
            } else {
                occ.mark_free(c).expect("in bounds");
            }
        }
        occ
    }

    /// Geodesic distance (cells) from the nearest of `sources` to every cell.
    /// Obstacle cells take the distance of their nearest free neighbor plus
    /// one step, so wall surfaces carry the value of the room they face.
    pub fn geodesic_from(&self, sources: &[Cell]) -> Result<Vec<f64>> {
        let occ = self.to_occupancy_map();
        let mut best = vec![f64::INFINITY; self.spec.len()];
        for &s in sources {
            let field = distance_field(&occ, s, UnknownPolicy::Blocked)?;
            for (b, d) in best.iter_mut().zip(field) {
                *b = b.min(d);
            }
        }
        let mut out = best.clone();
        for (i, o) in out.iter_mut().enumerate() {
            if !self.occupied[i] {
                continue;
            }
            let c = self.spec.cell_at(i);
            for n in c.neighbors8() {
                if let Some(j) = self.spec.index(n) {
                    if !self.occupied[j] {
                        let step = if n.col != c.col && n.row != c.row { std::f64::consts::SQRT_2 } else { 1.0 };
                        *o = o.min(best[j] + step);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Obstacles for GroundTruth {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        self.spec.index(cell).is_none_or(|i| self.occupied[i])
    }
}

/// Layout parameters. Lengths are in cells unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub width: u32,
    pub height: u32,
    /// Meters per cell.
    pub resolution: f64,
    pub rooms_x: u32,
    pub rooms_y: u32,
    /// Doorway width.
    pub door_width: u32,
    /// Width of the corridors between rooms.
    pub corridor_width: u32,
    /// Probability of a doorway on each wall not needed for connectivity.
    pub extra_door_prob: f64,
    /// Furniture blocks per room.
    pub clutter: u32,
    /// Decay length λ of the relevance field; infinite gives a flat field.
    pub relevance_decay: f64,
    pub category: String,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            width: 72,
            height: 72,
            resolution: crate::grid::DEFAULT_RESOLUTION,
            rooms_x: 3,
            rooms_y: 3,
            door_width: 4,
            corridor_width: 4,
            extra_door_prob: 0.25,
            clutter: 2,
            relevance_decay: 8.0,
            category: "chair".to_owned(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rooms_x == 0 || self.rooms_y == 0 {
            return Err(Error::Config("need at least one room per axis".into()));
        }
        if self.door_width == 0 || self.corridor_width == 0 {
            return Err(Error::Config("door_width and corridor_width must be positive".into()));
        }
        let min_room = self.door_width + 6;
        let need = |n: u32| n * min_room + (n - 1) * (self.corridor_width + 2) + 2;
        if self.width < need(self.rooms_x) || self.height < need(self.rooms_y) {
            return Err(Error::Config(format!(
                "{}x{} grid too small for {}x{} rooms",
                self.width, self.height, self.rooms_x, self.rooms_y
            )));
        }
        if !(self.relevance_decay > 0.0) {
            return Err(Error::Config(format!(
                "relevance_decay must be positive, got {}",
                self.relevance_decay
            )));
        }
        if !(0.0..=1.0).contains(&self.extra_door_prob) {
            return Err(Error::Config("extra_door_prob must lie in [0, 1]".into()));
        }
        GridSpec::new(self.width, self.height, self.resolution, (0.0, 0.0)).map(|_| ())
    }
}

/// One navigation problem: world, target and start pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub truth: GroundTruth,
    pub semantic_truth: SemanticField,
    pub target_cells: Vec<Cell>,
    pub category: String,
    pub start: Pose,
    /// Meters from the start to the nearest target along free space.
    pub shortest_path_len: f64,
    pub seed: u64,
}

impl Environment {
    pub fn spec(&self) -> &GridSpec {
        &self.truth.spec
    }

    /// Distance in meters from `p` to the nearest target cell center.
    pub fn distance_to_target(&self, p: (f64, f64)) -> f64 {
        self.target_cells
            .iter()
            .map(|&c| {
                let t = self.spec().cell_center(c);
                (p.0 - t.0).hypot(p.1 - t.1)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Relevance field `exp(-d/λ)` over geodesic distance `d` in cells.
pub fn relevance_field(truth: &GroundTruth, targets: &[Cell], decay: f64) -> Result<SemanticField> {
    if decay.is_infinite() {
        return Ok(SemanticField::constant(truth.spec, 1.0));
    }
    let dist = truth.geodesic_from(targets)?;
    let values = dist
        .into_iter()
        .map(|d| if d.is_finite() { (-d / decay).exp() } else { 0.0 })
        .collect();
    SemanticField::new(truth.spec, values)
}

#[derive(Debug, Clone, Copy)]
struct Room {
    x0: i32,
    y0: i32,
    x1: i32, // exclusive
    y1: i32,
}

impl Room {
    fn contains(&self, c: Cell) -> bool {
        c.col >= self.x0 && c.col < self.x1 && c.row >= self.y0 && c.row < self.y1
    }
}

/// Half-open `[start, end)` cell range.
type Span = (i32, i32);

/// Lays out `n` room spans along one axis of `len` cells, separated by
/// walled corridors of `corridor` cells. Returns `(rooms, corridors)` as
/// half-open spans.
fn axis_layout(len: u32, n: u32, corridor: u32, rng: &mut ChaCha8Rng) -> (Vec<Span>, Vec<Span>) {
    let gap = corridor as i32 + 2;
    let usable = len as i32 - 2 - (n as i32 - 1) * gap;
    let base = usable / n as i32;
    let mut sizes = vec![base; n as usize];
    for s in sizes.iter_mut().take((usable % n as i32) as usize) {
        *s += 1;
    }
    let jitter = base / 6;
    for k in 0..sizes.len().saturating_sub(1) {
        if jitter > 0 {
            let d = rng.random_range(-jitter..=jitter);
            sizes[k] += d;
            sizes[k + 1] -= d;
        }
    }
    let (mut rooms, mut corridors) = (Vec::new(), Vec::new());
    let mut pos = 1;
    for (k, &size) in sizes.iter().enumerate() {
        rooms.push((pos, pos + size));
        pos += size;
        if k + 1 < sizes.len() {
            corridors.push((pos + 1, pos + 1 + corridor as i32));
            pos += gap;
        }
    }
    (rooms, corridors)
}

fn try_generate(config: &GenConfig, seed: u64) -> Result<Option<Environment>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = GridSpec::new(config.width, config.height, config.resolution, (0.0, 0.0))?;
    let mut truth = GroundTruth::open(spec);
    for cell in spec.cells() {
        truth.set(cell, true);
    }
    let (w, h) = (config.width as i32, config.height as i32);
    let (xs, xc) = axis_layout(config.width, config.rooms_x, config.corridor_width, &mut rng);
    let (ys, yc) = axis_layout(config.height, config.rooms_y, config.corridor_width, &mut rng);
    let mut carve = |x: (i32, i32), y: (i32, i32)| {
        for r in y.0..y.1 {
            for c in x.0..x.1 {
                truth.set(Cell::new(c, r), false);
            }
        }
    };
    for &x in &xc {
        carve(x, (1, h - 1));
    }
    for &y in &yc {
        carve((1, w - 1), y);
    }
    let (nx, ny) = (xs.len(), ys.len());
    let rooms: Vec<Room> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| Room {
            x0: xs[i].0,
            x1: xs[i].1,
            y0: ys[j].0,
            y1: ys[j].1,
        })
        .collect();
    for room in &rooms {
        carve((room.x0, room.x1), (room.y0, room.y1));
    }

    // doorways onto the neighboring corridors: one guaranteed, others by chance
    let dw = config.door_width as i32;
    for (k, room) in rooms.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        // (wall line, along x?) for each side that faces a corridor
        let mut sides = Vec::new();
        if i > 0 {
            sides.push((room.x0 - 1, false));
        }
        if i + 1 < nx {
            sides.push((room.x1, false));
        }
        if j > 0 {
            sides.push((room.y0 - 1, true));
        }
        if j + 1 < ny {
            sides.push((room.y1, true));
        }
        if sides.is_empty() {
            continue;
        }
        let required = rng.random_range(0..sides.len());
        for (s, &(line, along_x)) in sides.iter().enumerate() {
            if s != required && !rng.random_bool(config.extra_door_prob) {
                continue;
            }
            let (lo, hi) = if along_x {
                (room.x0 + 1, room.x1 - 1 - dw)
            } else {
                (room.y0 + 1, room.y1 - 1 - dw)
            };
            if hi < lo {
                return Ok(None);
            }
            let at = rng.random_range(lo..=hi);
            for t in at..at + dw {
                let cell = if along_x { Cell::new(t, line) } else { Cell::new(line, t) };
                truth.set(cell, false);
            }
        }
    }

    // furniture: blocks kept two cells off the room walls so doorways stay open
    for room in &rooms {
        for _ in 0..config.clutter {
            let (w, h) = (rng.random_range(2..=4), rng.random_range(2..=4));
            let (lo_x, hi_x) = (room.x0 + 2, room.x1 - 2 - w);
            let (lo_y, hi_y) = (room.y0 + 2, room.y1 - 2 - h);
            if hi_x < lo_x || hi_y < lo_y {
                continue;
            }
            let (x, y) = (rng.random_range(lo_x..=hi_x), rng.random_range(lo_y..=hi_y));
            for r in y..y + h {
                for c in x..x + w {
                    truth.set(Cell::new(c, r), true);
                }
            }
        }
    }

    let target_room = rng.random_range(0..rooms.len());
    let start_room = if rooms.len() > 1 {
        let k = rng.random_range(0..rooms.len() - 1);
        if k >= target_room {
            k + 1
        } else {
            k
        }
    } else {
        target_room
    };
    let pick_free = |room: &Room, rng: &mut ChaCha8Rng| -> Option<Cell> {
        let cells: Vec<Cell> = (room.y0 + 1..room.y1 - 1)
            .flat_map(|r| (room.x0 + 1..room.x1 - 1).map(move |c| Cell::new(c, r)))
            .filter(|&c| truth.is_free(c) && c.neighbors8().all(|n| truth.is_free(n)))
            .collect();
        cells.choose(rng).copied()
    };
    let Some(target) = pick_free(&rooms[target_room], &mut rng) else {
        return Ok(None);
    };
    let Some(start_cell) = pick_free(&rooms[start_room], &mut rng) else {
        return Ok(None);
    };
    debug_assert!(rooms[target_room].contains(target));
    let targets = vec![target];

    let occ = truth.to_occupancy_map();
    let dist = distance_field(&occ, start_cell, UnknownPolicy::Blocked)?;
    let d = dist[spec.index(target).expect("in bounds")];
    if !d.is_finite() || d <= 0.0 {
        return Ok(None);
    }
    let (sx, sy) = spec.cell_center(start_cell);
    let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let semantic_truth = relevance_field(&truth, &targets, config.relevance_decay)?;
    Ok(Some(Environment {
        truth,
        semantic_truth,
        target_cells: targets,
        category: config.category.clone(),
        start: Pose::new(sx, sy, heading),
        shortest_path_len: d * spec.resolution,
        seed,
    }))
}

/// Builds an environment deterministically from `seed`, retrying internally
/// with derived seeds when a layout is unusable.
pub fn generate_environment(config: &GenConfig, seed: u64) -> Result<Environment> {
    config.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let s = if attempt == 0 { seed } else { mix_seed(&[seed, attempt as u64]) };
        if let Some(mut env) = try_generate(config, s)? {
            env.seed = seed;
            return Ok(env);
        }
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}
