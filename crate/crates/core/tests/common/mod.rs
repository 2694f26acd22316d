//! Independent reference implementations used by the integration tests.
//! None of these share code with the library beyond plain data types.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use banditnav::grid::{Cell, GridSpec, Pose};
use banditnav::mapping::{CellState, OccupancyMap};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// ---------------------------------------------------------------- random maps

/// Occupancy map with each cell independently free / occupied / unknown.
pub fn random_map(rng: &mut ChaCha8Rng, w: u32, h: u32, p_free: f64, p_occ: f64) -> OccupancyMap {
    let spec = GridSpec::new(w, h, 1.0, (0.0, 0.0)).unwrap();
    let mut occ = OccupancyMap::new(spec);
    for cell in spec.cells() {
        let u: f64 = rng.random();
        if u < p_free {
            occ.observe_cell(cell, false).unwrap();
        } else if u < p_free + p_occ {
            occ.observe_cell(cell, true).unwrap();
        }
    }
    occ
}

// ----------------------------------------------------------------- frontiers

/// Free cells with at least one in-bounds unknown 8-neighbor, by a plain scan.
pub fn frontier_cells_oracle(occ: &OccupancyMap) -> BTreeSet<(i32, i32)> {
    let spec = occ.spec();
    let mut out = BTreeSet::new();
    for r in 0..spec.height as i32 {
        for c in 0..spec.width as i32 {
            if occ.state(Cell::new(c, r)) != CellState::Free {
                continue;
            }
            let mut touches = false;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= spec.height as i32 || nc >= spec.width as i32 {
                        continue;
                    }
                    touches |= occ.state(Cell::new(nc, nr)) == CellState::Unknown;
                }
            }
            if touches {
                out.insert((r, c));
            }
        }
    }
    out
}

fn find(parent: &mut [usize], x: usize) -> usize {
    if parent[x] != x {
        let root = find(parent, parent[x]);
        parent[x] = root;
    }
    parent[x]
}

/// `(members, centroid)` of one cluster, cells as `(row, col)`.
pub type OracleCluster = (Vec<(i32, i32)>, (i32, i32));

/// Union-find components over all 8-adjacent pairs; returns `(cells, centroid)`
/// sorted by centroid, each as `(row, col)`.
pub fn clusters_oracle(cells: &BTreeSet<(i32, i32)>, min_size: usize) -> Vec<OracleCluster> {
    let list: Vec<(i32, i32)> = cells.iter().copied().collect();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let (a, b) = (list[i], list[j]);
            if (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 {
                let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(i32, i32)>> = BTreeMap::new();
    for (i, &cell) in list.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(cell);
    }
    let mut out: Vec<_> = groups
        .into_values()
        .filter(|g| g.len() >= min_size.max(1))
        .map(|mut g| {
            g.sort();
            let n = g.len() as f64;
            let mr = g.iter().map(|c| c.0 as f64).sum::<f64>() / n;
            let mc = g.iter().map(|c| c.1 as f64).sum::<f64>() / n;
            let centroid = *g
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 as f64 - mr).powi(2) + (a.1 as f64 - mc).powi(2);
                    let db = (b.0 as f64 - mr).powi(2) + (b.1 as f64 - mc).powi(2);
                    da.total_cmp(&db).then(a.cmp(b))
                })
                .unwrap();
            (g, centroid)
        })
        .collect();
    out.sort_by_key(|(_, c)| *c);
    out
}

// ------------------------------------------------------------- shortest paths

/// Path cost `a + b·√2` as the exact pair `(a, b)`.
pub type ExactCost = (u32, u32);

/// Exact comparison of `a1 + b1√2` and `a2 + b2√2` in integer arithmetic.
pub fn cmp_cost(x: ExactCost, y: ExactCost) -> Ordering {
    // compare p = a1 - a2 against q = (b2 - b1)√2
    let p = x.0 as i64 - y.0 as i64;
    let q = y.1 as i64 - x.1 as i64;
    let sign = |v: i64| v.cmp(&0);
    match (sign(p), sign(q)) {
        (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
        (sp, Ordering::Equal) => sp,
        (Ordering::Equal, sq) => sq.reverse(),
        (Ordering::Greater, Ordering::Less) => Ordering::Greater,
        (Ordering::Less, Ordering::Greater) => Ordering::Less,
        (Ordering::Greater, Ordering::Greater) => (p * p).cmp(&(2 * q * q)),
        (Ordering::Less, Ordering::Less) => (2 * q * q).cmp(&(p * p)),
    }
}

fn passable(occ: &OccupancyMap, r: i32, c: i32, unknown_ok: bool) -> bool {
    let spec = occ.spec();
    if r < 0 || c < 0 || r >= spec.height as i32 || c >= spec.width as i32 {
        return false;
    }
    match occ.state(Cell::new(c, r)) {
        CellState::Free => true,
        CellState::Occupied => false,
        CellState::Unknown => unknown_ok,
    }
}

/// Bellman-Ford relaxation over every cell until nothing changes. Diagonal
/// steps require both orthogonal cells they pass between to be passable.
pub fn shortest_cost_oracle(occ: &OccupancyMap, from: Cell, to: Cell, unknown_ok: bool) -> Option<ExactCost> {
    let spec = occ.spec();
    let (w, h) = (spec.width as i32, spec.height as i32);
    let idx = |r: i32, c: i32| (r * w + c) as usize;
    let mut best: Vec<Option<ExactCost>> = vec![None; (w * h) as usize];
    best[idx(from.row, from.col)] = Some((0, 0));
    loop {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                let Some(here) = best[idx(r, c)] else { continue };
                for dr in -1..=1i32 {
                    for dc in -1..=1i32 {
                        if (dr, dc) == (0, 0) || !passable(occ, r + dr, c + dc, unknown_ok) {
                            continue;
                        }
                        let diagonal = dr != 0 && dc != 0;
                        if diagonal && !(passable(occ, r + dr, c, unknown_ok) && passable(occ, r, c + dc, unknown_ok)) {
                            continue;
                        }
                        let cand = if diagonal { (here.0, here.1 + 1) } else { (here.0 + 1, here.1) };
                        let slot = &mut best[idx(r + dr, c + dc)];
                        if slot.is_none_or(|cur| cmp_cost(cand, cur) == Ordering::Less) {
                            *slot = Some(cand);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    best[idx(to.row, to.col)]
}

// -------------------------------------------------------------------- rays

/// Slab test of the segment `p + t·dir`, `t ∈ [0, len]`, against the closed
/// square of `cell`. Returns the entry distance.
pub fn segment_enters(spec: &GridSpec, p: (f64, f64), dir: (f64, f64), len: f64, cell: Cell) -> Option<f64> {
    let lo = (
        spec.origin.0 + cell.col as f64 * spec.resolution,
        spec.origin.1 + cell.row as f64 * spec.resolution,
    );
    let hi = (lo.0 + spec.resolution, lo.1 + spec.resolution);
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (o, d, a, b) in [(p.0, dir.0, lo.0, hi.0), (p.1, dir.1, lo.1, hi.1)] {
        if d == 0.0 {
            if o < a || o > b {
                return None;
            }
        } else {
            let (ta, tb) = ((a - o) / d, (b - o) / d);
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    (t0 <= t1 && t1 >= 0.0 && t0 <= len).then_some(t0.max(0.0))
}

/// Cells a ray visits, in order, by testing every cell of the grid. The
/// cell holding the start point is skipped and the ray stops after the first
/// blocked cell.
pub fn ray_oracle(
    spec: &GridSpec,
    blocked: &dyn Fn(Cell) -> bool,
    pose: &Pose,
    bearing: f64,
    range: f64,
) -> (Vec<(Cell, f64)>, bool) {
    let a = pose.heading + bearing;
    let dir = (a.cos(), a.sin());
    let p = pose.position();
    let mut hits: Vec<(Cell, f64)> = spec
        .cells()
        .filter_map(|c| segment_enters(spec, p, dir, range, c).map(|t| (c, t)))
        .filter(|&(_, t)| t > 0.0)
        .collect();
    hits.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    let mut out = Vec::new();
    for (c, t) in hits {
        out.push((c, t));
        if blocked(c) {
            return (out, true);
        }
    }
    (out, false)
}

// ------------------------------------------------------------------- stats

/// Monte-Carlo estimate of `E[max(X - incumbent, 0)]` for `X ~ N(mu, sigma²)`
/// and its standard error.
pub fn ei_monte_carlo(mu: f64, sigma: f64, incumbent: f64, n: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        let g = (mu + sigma * z - incumbent).max(0.0);
        s += g;
        s2 += g * g;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Precision-form posterior of a Gaussian prior after independent
/// measurements `(z, r)`.
pub fn precision_posterior(mu0: f64, var0: f64, measurements: &[(f64, f64)]) -> (f64, f64) {
    let mut precision = 1.0 / var0;
    let mut weighted = mu0 / var0;
    for &(z, r) in measurements {
        precision += 1.0 / r;
        weighted += z / r;
    }
    (weighted / precision, 1.0 / precision)
}

/// Correlation between sorted data and standard-normal quantiles at Blom
/// plotting positions.
pub fn qq_correlation(data: &[f64]) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = data.len();
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let qs: Vec<f64> = (1..=n)
        .map(|i| std.inverse_cdf((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let mq = qs.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, q) in xs.iter().zip(&qs) {
        sxy += (x - mx) * (q - mq);
        sxx += (x - mx).powi(2);
        syy += (q - mq).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}
