//! Discrete 2D geometry: world/grid transforms, ray traversal with occlusion
//! and the projection of the horizontal field of view onto grid cells.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default map resolution in meters per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.25;
/// Default number of rays cast across the field of view.
pub const DEFAULT_RAY_COUNT: usize = 181;

/// A grid index. Field order makes the derived ordering `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { row, col }
    }

    /// The eight surrounding cells, in a fixed order.
    pub fn neighbors8(self) -> impl Iterator<Item = Cell> {
        const OFFSETS: [(i32, i32); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        OFFSETS
            .into_iter()
            .map(move |(dc, dr)| Cell::new(self.col + dc, self.row + dr))
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.col - other.col).abs().max((self.row - other.row).abs())
    }
}

/// Size, resolution and placement of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: u32,
    pub height: u32,
    /// Meters per cell.
    pub resolution: f64,
    /// World coordinates of the lower-left corner of cell (0, 0).
    pub origin: (f64, f64),
}

impl GridSpec {
    pub fn new(width: u32, height: u32, resolution: f64, origin: (f64, f64)) -> Result<Self> {
        let spec = Self {
            width,
            height,
            resolution,
            origin,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col >= 0
            && cell.row >= 0
            && (cell.col as u32) < self.width
            && (cell.row as u32) < self.height
    }

    /// Row-major linear index.
    pub fn index(&self, cell: Cell) -> Option<usize> {
        self.contains(cell)
            .then(|| cell.row as usize * self.width as usize + cell.col as usize)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index % w) as i32, (index / w) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell_at(i))
    }

    /// World coordinates of a cell's center.
    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            self.origin.0 + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.1 + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    fn to_grid_units(self, p: (f64, f64)) -> (f64, f64) {
        (
            (p.0 - self.origin.0) / self.resolution,
            (p.1 - self.origin.1) / self.resolution,
        )
    }
}

/// Maps a world point to the cell containing it, or `None` when outside.
pub fn world_to_grid(p: (f64, f64), spec: &GridSpec) -> Option<Cell> {
    let (gx, gy) = spec.to_grid_units(p);
    if !(gx.is_finite() && gy.is_finite()) {
        return None;
    }
    let cell = Cell::new(gx.floor() as i32, gy.floor() as i32);
    // floor of a huge value saturates; contains() rejects it either way
    (gx >= 0.0 && gy >= 0.0 && spec.contains(cell)).then_some(cell)
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// Planar robot pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in `[-π, π)`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        (self.x - p.0).hypot(self.y - p.1)
    }
}

/// Horizontal field of view of the camera, projected to the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FovSpec {
    pub horizontal_fov: f64,
    pub max_range: f64,
    pub ray_count: usize,
}

impl Default for FovSpec {
    fn default() -> Self {
        Self {
            horizontal_fov: 79f64.to_radians(),
            max_range: 5.0,
            ray_count: DEFAULT_RAY_COUNT,
        }
    }
}

impl FovSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov < 2.0 * PI) {
            return Err(Error::Config(format!(
                "horizontal_fov must lie in (0, 2π), got {}",
                self.horizontal_fov
            )));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(Error::Config(format!(
                "max_range must be positive, got {}",
                self.max_range
            )));
        }
        if self.ray_count < 3 {
            return Err(Error::Config(format!(
                "ray_count must be at least 3, got {}",
                self.ray_count
            )));
        }
        Ok(())
    }

    pub fn half_fov(&self) -> f64 {
        self.horizontal_fov / 2.0
    }

    /// Ray bearings relative to the optical axis, spanning the full FOV
    /// inclusive of both edges.
    pub fn bearings(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.ray_count;
        let half = self.half_fov();
        (0..n).map(move |k| {
            // exact zero for the central ray of an odd count
            if 2 * k + 1 == n {
                0.0
            } else {
                -half + self.horizontal_fov * k as f64 / (n - 1) as f64
            }
        })
    }
}

/// Anything that can answer "does this cell stop a ray".
pub trait Obstacles {
    fn spec(&self) -> &GridSpec;
    fn is_blocked(&self, cell: Cell) -> bool;
}

/// A cell crossed by a line, with the distance (meters) at which the line
/// enters it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub cell: Cell,
    pub entry: f64,
}

/// Walks the supercover of the segment from `start` along unit direction
/// `dir` up to `length` meters. The cell containing `start` is not emitted.
/// Traversal stops at the grid boundary or after `visit` returns `false`.
/// When the line passes exactly through a cell corner, both side cells are
/// emitted before the diagonal one so thin diagonal walls cannot be skipped.
pub fn traverse<F>(spec: &GridSpec, start: (f64, f64), dir: (f64, f64), length: f64, mut visit: F)
where
    F: FnMut(Crossing) -> bool,
{
    let (gx, gy) = spec.to_grid_units(start);
    let max_t = length / spec.resolution;
    let mut col = gx.floor() as i32;
    let mut row = gy.floor() as i32;
    let step_c = if dir.0 > 0.0 { 1 } else { -1 };
    let step_r = if dir.1 > 0.0 { 1 } else { -1 };
    let delta_c = if dir.0 != 0.0 { 1.0 / dir.0.abs() } else { f64::INFINITY };
    let delta_r = if dir.1 != 0.0 { 1.0 / dir.1.abs() } else { f64::INFINITY };
    let mut next_c = if dir.0 > 0.0 {
        (col as f64 + 1.0 - gx) * delta_c
    } else if dir.0 < 0.0 {
        (gx - col as f64) * delta_c
    } else {
        f64::INFINITY
    };
    let mut next_r = if dir.1 > 0.0 {
        (row as f64 + 1.0 - gy) * delta_r
    } else if dir.1 < 0.0 {
        (gy - row as f64) * delta_r
    } else {
        f64::INFINITY
    };

    let mut emit = |cell: Cell, t: f64| -> bool {
        if !spec.contains(cell) {
            return false;
        }
        visit(Crossing {
            cell,
            entry: t * spec.resolution,
        })
    };

    loop {
        let t = next_c.min(next_r);
        if !(t <= max_t) {
            return;
        }
        if next_c < next_r {
            col += step_c;
            next_c += delta_c;
            if !emit(Cell::new(col, row), t) {
                return;
            }
        } else if next_r < next_c {
            row += step_r;
            next_r += delta_r;
            if !emit(Cell::new(col, row), t) {
                return;
            }
        } else {
            if !emit(Cell::new(col + step_c, row), t) || !emit(Cell::new(col, row + step_r), t) {
                return;
            }
            col += step_c;
            row += step_r;
            next_c += delta_c;
            next_r += delta_r;
            if !emit(Cell::new(col, row), t) {
                return;
            }
        }
    }
}

/// Result of casting one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RayHits {
    /// Cells in visit order with their entry range in meters.
    pub cells: Vec<Crossing>,
    /// The last cell is an obstacle that stopped the ray.
    pub terminal: bool,
}

/// Casts a ray from `from` at `bearing` relative to its heading, stopping at
/// the first blocked cell (inclusive), the grid edge, or `fov.max_range`.
pub fn raycast<O: Obstacles + ?Sized>(
    from: &Pose,
    bearing: f64,
    occ: &O,
    fov: &FovSpec,
) -> Result<RayHits> {
    let spec = occ.spec();
    if world_to_grid(from.position(), spec).is_none() {
        return Err(Error::StartOutOfBounds);
    }
    let angle = from.heading + bearing;
    let dir = (angle.cos(), angle.sin());
    let mut cells = Vec::new();
    let mut terminal = false;
    traverse(spec, from.position(), dir, fov.max_range, |c| {
        cells.push(c);
        if occ.is_blocked(c.cell) {
            terminal = true;
            false
        } else {
            true
        }
    });
    Ok(RayHits { cells, terminal })
}

/// A cell inside the projected field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibleCell {
    pub cell: Cell,
    /// Signed angle from the optical axis of the ray that reached the cell.
    pub bearing: f64,
    /// Meters from the robot to where that ray entered the cell.
    pub range: f64,
    /// The cell stopped the ray (an obstacle).
    pub terminal: bool,
}

/// The set of cells seen from one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalCone {
    pub spec: GridSpec,
    pub pose: Pose,
    /// Sorted by `(row, col)`.
    pub cells: Vec<VisibleCell>,
}

impl FocalCone {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, cell: Cell) -> Option<&VisibleCell> {
        self.cells
            .binary_search_by(|v| v.cell.cmp(&cell))
            .ok()
            .map(|i| &self.cells[i])
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.get(cell).is_some()
    }
}

/// Projects the field of view onto the grid. Each visible cell keeps the
/// bearing of the most central ray that reached it.
pub fn focal_cone<O: Obstacles + ?Sized>(from: &Pose, occ: &O, fov: &FovSpec) -> Result<FocalCone> {
    let mut best: HashMap<Cell, VisibleCell> = HashMap::new();
    for bearing in fov.bearings() {
        let hits = raycast(from, bearing, occ, fov)?;
        let n = hits.cells.len();
        for (i, c) in hits.cells.into_iter().enumerate() {
            let candidate = VisibleCell {
                cell: c.cell,
                bearing,
                range: c.entry,
                terminal: hits.terminal && i + 1 == n,
            };
            best.entry(c.cell)
                .and_modify(|v| {
                    let (b, nb) = (v.bearing.abs(), bearing.abs());
                    // smaller |bearing| wins; the negative side wins exact ties
                    if nb < b || (nb == b && bearing < v.bearing) {
                        *v = VisibleCell {
                            terminal: v.terminal || candidate.terminal,
                            ..candidate
                        };
                    } else {
                        v.terminal |= candidate.terminal;
                    }
                })
                .or_insert(candidate);
        }
    }
    let mut cells: Vec<VisibleCell> = best.into_values().collect();
    cells.sort_by_key(|v| v.cell);
    Ok(FocalCone {
        spec: *occ.spec(),
        pose: *from,
        cells,
    })
}

/// True when the straight segment between two points crosses no blocked cell
/// other than the cell containing `to`.
pub fn line_of_sight<O: Obstacles + ?Sized>(occ: &O, from: (f64, f64), to: (f64, f64)) -> bool {
    let spec = occ.spec();
    let Some(goal) = world_to_grid(to, spec) else {
        return false;
    };
    if world_to_grid(from, spec).is_none() {
        return false;
    }
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return true;
    }
    let mut clear = true;
    traverse(spec, from, (dx / len, dy / len), len, |c| {
        if c.cell == goal {
            return false;
        }
        if occ.is_blocked(c.cell) {
            clear = false;
            return false;
        }
        true
    });
    clear
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Walls {
        spec: GridSpec,
        blocked: Vec<bool>,
    }

    impl Walls {
        fn empty(w: u32, h: u32) -> Self {
            let spec = GridSpec::new(w, h, 1.0, (0.0, 0.0)).unwrap();
            Self {
                blocked: vec![false; spec.len()],
                spec,
            }
        }

        fn set(&mut self, c: Cell) {
            let i = self.spec.index(c).unwrap();
            self.blocked[i] = true;
        }
    }

    impl Obstacles for Walls {
        fn spec(&self) -> &GridSpec {
            &self.spec
        }
        fn is_blocked(&self, cell: Cell) -> bool {
            self.spec.index(cell).is_some_and(|i| self.blocked[i])
        }
    }

    fn fov(range: f64) -> FovSpec {
        FovSpec {
            horizontal_fov: PI / 2.0,
            max_range: range,
            ray_count: 91,
        }
    }

    #[test]
    fn world_to_grid_cases() {
        let unit = GridSpec::new(10, 10, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(world_to_grid((0.0, 0.0), &unit), Some(Cell::new(0, 0)));
        let half = GridSpec::new(10, 10, 0.5, (0.0, 0.0)).unwrap();
        assert_eq!(world_to_grid((2.5, 1.5), &half), Some(Cell::new(5, 3)));
        assert_eq!(world_to_grid((-0.1, 0.0), &unit), None);
        assert_eq!(world_to_grid((10.0, 0.0), &unit), None);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GridSpec::new(0, 3, 1.0, (0.0, 0.0)).is_err());
        assert!(GridSpec::new(3, 3, 0.0, (0.0, 0.0)).is_err());
        assert!(FovSpec {
            ray_count: 2,
            ..FovSpec::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(Pose::new(0.0, 0.0, 0.25).heading, 0.25);
    }

    #[test]
    fn unobstructed_ray() {
        let map = Walls::empty(10, 10);
        let hits = raycast(&Pose::new(0.5, 0.5, 0.0), 0.0, &map, &fov(3.0)).unwrap();
        assert_eq!(hits.cells.len(), 3);
        assert!(!hits.terminal);
        assert_eq!(hits.cells[2].cell, Cell::new(3, 0));
    }

    #[test]
    fn ray_stops_at_first_wall() {
        let mut map = Walls::empty(10, 10);
        map.set(Cell::new(2, 0));
        map.set(Cell::new(4, 0));
        let hits = raycast(&Pose::new(0.5, 0.5, 0.0), 0.0, &map, &fov(5.0)).unwrap();
        assert_eq!(hits.cells.len(), 2);
        assert!(hits.terminal);
        assert_eq!(hits.cells[1].cell, Cell::new(2, 0));
    }

    #[test]
    fn ray_truncated_at_boundary() {
        let map = Walls::empty(10, 10);
        let hits = raycast(&Pose::new(1.5, 4.5, 0.0), PI, &map, &fov(5.0)).unwrap();
        assert_eq!(hits.cells.len(), 1);
        assert_eq!(hits.cells[0].cell, Cell::new(0, 4));
        assert!(!hits.terminal);
    }

    #[test]
    fn raycast_rejects_outside_start() {
        let map = Walls::empty(4, 4);
        assert!(matches!(
            raycast(&Pose::new(-1.0, 0.5, 0.0), 0.0, &map, &fov(3.0)),
            Err(Error::StartOutOfBounds)
        ));
    }

    #[test]
    fn corner_crossing_hits_both_sides() {
        let mut map = Walls::empty(4, 4);
        map.set(Cell::new(1, 0));
        let hits = raycast(&Pose::new(0.5, 0.5, PI / 4.0), 0.0, &map, &fov(3.0)).unwrap();
        assert!(hits.terminal);
        assert_eq!(hits.cells.last().unwrap().cell, Cell::new(1, 0));
    }

    #[test]
    fn cone_is_symmetric_sector() {
        let map = Walls::empty(21, 21);
        let pose = Pose::new(10.5, 10.5, 0.0);
        let cone = focal_cone(&pose, &map, &fov(6.0)).unwrap();
        let ahead = cone.get(Cell::new(13, 10)).unwrap();
        assert_eq!(ahead.bearing, 0.0);
        assert!(!cone.contains(Cell::new(8, 10)));
        for v in &cone.cells {
            let mirror = Cell::new(v.cell.col, 20 - v.cell.row);
            let m = cone.get(mirror).expect("mirror cell visible");
            assert!((m.bearing + v.bearing).abs() < 1e-12);
            assert!(v.bearing.abs() <= PI / 4.0 + 1e-12);
        }
    }

    #[test]
    fn walled_in_robot_sees_only_walls() {
        let mut map = Walls::empty(5, 5);
        let center = Cell::new(2, 2);
        for n in center.neighbors8() {
            map.set(n);
        }
        let cone = focal_cone(&Pose::new(2.5, 2.5, 0.3), &map, &fov(4.0)).unwrap();
        assert!(!cone.is_empty());
        for v in &cone.cells {
            assert!(v.terminal);
            assert_eq!(v.cell.chebyshev(center), 1);
        }
    }

    #[test]
    fn line_of_sight_blocked_by_wall() {
        let mut map = Walls::empty(6, 3);
        assert!(line_of_sight(&map, (0.5, 1.5), (5.5, 1.5)));
        map.set(Cell::new(3, 1));
        assert!(!line_of_sight(&map, (0.5, 1.5), (5.5, 1.5)));
        assert!(line_of_sight(&map, (0.5, 1.5), (3.5, 1.5)));
    }
}
