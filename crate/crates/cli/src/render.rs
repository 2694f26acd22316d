//! Netpbm rendering. Images are `W×H` pixels, one per cell, with grid row 0
//! at the bottom so that +y points up.

use std::fs;
use std::path::Path;

use banditnav::grid::{world_to_grid, Cell, GridSpec};
use banditnav::mapping::{CellState, MapSnapshot};

use crate::error::{CliError, CliResult};
use crate::records::{read_record, EpisodeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Layer {
    Occupancy,
    RelevanceMean,
    RelevanceVar,
    Trajectory,
}

pub const UNKNOWN: u8 = 128;
pub const FREE: u8 = 255;
pub const OCCUPIED: u8 = 0;
const PATH: [u8; 3] = [255, 0, 0];
const START: [u8; 3] = [0, 200, 0];
const END: [u8; 3] = [0, 0, 255];

fn load_snapshot(path: &Path) -> CliResult<MapSnapshot> {
    MapSnapshot::load(path).map_err(|e| match e {
        banditnav::Error::Io { path, source } => CliError::io(&path, source),
        other => CliError::io(path, format!("bad snapshot: {other}")),
    })
}

/// Either a snapshot file or an episode record pointing at one.
fn load_input(path: &Path) -> CliResult<(MapSnapshot, Option<EpisodeRecord>)> {
    if path.extension().is_some_and(|x| x == "json") {
        let record = read_record(path)?;
        // records live in <out>/episodes/, snapshot paths are relative to <out>
        let root = path.parent().and_then(Path::parent).unwrap_or(Path::new("."));
        let snap = load_snapshot(&root.join(&record.snapshot))?;
        Ok((snap, Some(record)))
    } else {
        Ok((load_snapshot(path)?, None))
    }
}

fn flip_rows(spec: &GridSpec, values: impl Fn(usize) -> u8) -> Vec<u8> {
    let (w, h) = (spec.width as usize, spec.height as usize);
    let mut out = Vec::with_capacity(w * h);
    for row in (0..h).rev() {
        out.extend((0..w).map(|col| values(row * w + col)));
    }
    out
}

pub fn occupancy_gray(snap: &MapSnapshot) -> Vec<u8> {
    flip_rows(snap.spec(), |i| match snap.occupancy.state_at(i) {
        CellState::Unknown => UNKNOWN,
        CellState::Free => FREE,
        CellState::Occupied => OCCUPIED,
    })
}

/// Linear min–max normalization to `0..=255`; a constant layer is mid-gray.
pub fn scaled_gray(spec: &GridSpec, values: &[f64]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    flip_rows(spec, |i| {
        if hi > lo {
            ((values[i] - lo) / (hi - lo) * 255.0).round() as u8
        } else {
            UNKNOWN
        }
    })
}

pub fn pgm(spec: &GridSpec, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn ppm(spec: &GridSpec, rgb: &[[u8; 3]]) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.extend(rgb.iter().flatten());
    out
}

/// Cells on the 8-connected line between two cells.
fn line(a: Cell, b: Cell) -> Vec<Cell> {
    let (dx, dy) = ((b.col - a.col).abs(), -(b.row - a.row).abs());
    let (sx, sy) = ((b.col - a.col).signum(), (b.row - a.row).signum());
    let (mut c, mut err) = (a, dx + dy);
    let mut out = vec![c];
    while c != b {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            c.col += sx;
        }
        if e2 <= dx {
            err += dx;
            c.row += sy;
        }
        out.push(c);
    }
    out
}

/// Occupancy background with the trajectory drawn over it.
pub fn trajectory_rgb(snap: &MapSnapshot, trajectory: &[[f64; 3]]) -> Vec<[u8; 3]> {
    let spec = snap.spec();
    let mut rgb: Vec<[u8; 3]> = occupancy_gray(snap).into_iter().map(|g| [g, g, g]).collect();
    let (w, h) = (spec.width as i32, spec.height as i32);
    let mut paint = |c: Cell, color: [u8; 3]| {
        if spec.contains(c) {
            rgb[((h - 1 - c.row) * w + c.col) as usize] = color;
        }
    };
    let cells: Vec<Cell> = trajectory
        .iter()
        .filter_map(|p| world_to_grid((p[0], p[1]), spec))
        .collect();
    for pair in cells.windows(2) {
        for c in line(pair[0], pair[1]) {
            paint(c, PATH);
        }
    }
    if let (Some(&first), Some(&last)) = (cells.first(), cells.last()) {
        paint(first, START);
        paint(last, END);
    }
    rgb
}

pub fn cmd_render(input: &Path, layer: Layer, out: &Path) -> CliResult<()> {
    let (snap, record) = load_input(input)?;
    let spec = *snap.spec();
    let bytes = match layer {
        Layer::Occupancy => pgm(&spec, &occupancy_gray(&snap)),
        Layer::RelevanceMean => pgm(&spec, &scaled_gray(&spec, snap.semantic.means())),
        Layer::RelevanceVar => pgm(&spec, &scaled_gray(&spec, snap.semantic.variances())),
        Layer::Trajectory => {
            let record = record.ok_or_else(|| {
                CliError::Config("layer trajectory needs an episode record (.json), not a bare snapshot".into())
            })?;
            ppm(&spec, &trajectory_rgb(&snap, &record.trajectory))
        }
    };
    fs::write(out, bytes).map_err(|e| CliError::io(out, e))
}
