use crate::error::{Error, Result};
use crate::grid::{Cell, FocalCone, GridSpec};
use crate::sensor::RelevanceObservation;

/// Uninformed prior mean of every cell.
pub const PRIOR_MEAN: f64 = 0.5;
/// Prior variance of every cell.
pub const PRIOR_VARIANCE: f64 = 0.5;

/// Closed-form Gaussian fusion of a prior `(mean, var)` with a measurement
/// `(z, r)`. Returns the posterior mean and variance.
#[inline]
pub fn fuse(mean: f64, var: f64, z: f64, r: f64) -> (f64, f64) {
    let s = var + r;
    ((var * z + r * mean) / s, var * r / s)
}

/// Per-cell Gaussian belief over semantic relevance.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    spec: GridSpec,
    mu: Vec<f64>,
    var: Vec<f64>,
}

impl SemanticMap {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            mu: vec![PRIOR_MEAN; spec.len()],
            var: vec![PRIOR_VARIANCE; spec.len()],
            spec,
        }
    }

    pub(crate) fn from_parts(spec: GridSpec, mu: Vec<f64>, var: Vec<f64>) -> Self {
        Self { spec, mu, var }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    pub fn variances(&self) -> &[f64] {
        &self.var
    }

    /// Current `(mean, variance)` of one cell.
    pub fn query(&self, cell: Cell) -> Result<(f64, f64)> {
        let i = self.spec.index(cell).ok_or(Error::OutOfBounds(cell))?;
        Ok((self.mu[i], self.var[i]))
    }

    /// Fuses one measurement into every cell of the cone, using the variance
    /// of the ray that reached each cell. The map is untouched on error.
    pub fn update(&mut self, obs: &RelevanceObservation, cone: &FocalCone) -> Result<()> {
        if cone.spec != self.spec {
            return Err(Error::SpecMismatch {
                expected_w: self.spec.width,
                expected_h: self.spec.height,
                got_w: cone.spec.width,
                got_h: cone.spec.height,
            });
        }
        let mut staged = Vec::with_capacity(cone.cells.len());
        for v in &cone.cells {
            let i = self.spec.index(v.cell).ok_or(Error::OutOfBounds(v.cell))?;
            let r = obs.variance_at(v.bearing)?;
            if !(r > 0.0) {
                return Err(Error::DegenerateVariance(v.bearing));
            }
            staged.push((i, r));
        }
        for (i, r) in staged {
            let (m, s) = fuse(self.mu[i], self.var[i], obs.mean, r);
            self.mu[i] = m;
            self.var[i] = s;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Pose, VisibleCell};
    use crate::sensor::ConfidenceConvention;
    use proptest::prelude::*;

    fn spec() -> GridSpec {
        GridSpec::new(6, 6, 1.0, (0.0, 0.0)).unwrap()
    }

    /// Measurement whose per-ray variance on the optical axis is `var`.
    fn obs(mean: f64, var: f64) -> RelevanceObservation {
        RelevanceObservation {
            mean,
            ensemble_variance: var,
            fov: 1.0,
            convention: ConfidenceConvention::Vlfm,
        }
    }

    fn cone(cells: &[Cell]) -> FocalCone {
        FocalCone {
            spec: spec(),
            pose: Pose::new(0.5, 0.5, 0.0),
            cells: cells
                .iter()
                .map(|&cell| VisibleCell {
                    cell,
                    bearing: 0.0,
                    range: 1.0,
                    terminal: false,
                })
                .collect(),
        }
    }

    #[test]
    fn fresh_map_prior() {
        let map = SemanticMap::new(spec());
        assert_eq!(map.query(Cell::new(3, 4)).unwrap(), (0.5, 0.5));
        assert!(map.query(Cell::new(6, 0)).is_err());
    }

    #[test]
    fn equal_variance_update_averages() {
        let mut map = SemanticMap::new(spec());
        let c = Cell::new(1, 1);
        map.update(&obs(0.8, 0.5), &cone(&[c])).unwrap();
        let (m, v) = map.query(c).unwrap();
        assert!((m - 0.65).abs() < 1e-15);
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(map.query(Cell::new(2, 2)).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn measurement_at_prior_mean_is_fixed_point() {
        let mut map = SemanticMap::new(spec());
        let c = Cell::new(0, 0);
        map.update(&obs(0.5, 0.013), &cone(&[c])).unwrap();
        assert_eq!(map.query(c).unwrap().0, 0.5);
    }

    #[test]
    fn five_identical_updates_match_precision_form() {
        let mut map = SemanticMap::new(spec());
        let c = Cell::new(4, 2);
        for _ in 0..5 {
            map.update(&obs(0.9, 0.2), &cone(&[c])).unwrap();
        }
        let (m, v) = map.query(c).unwrap();
        // precision 1/0.5 + 5/0.2 = 27
        assert!((v - 1.0 / 27.0).abs() < 1e-12);
        assert!((m - (0.5 * 2.0 + 0.9 * 25.0) / 27.0).abs() < 1e-12);
    }

    #[test]
    fn peripheral_rays_weigh_less() {
        let mut map = SemanticMap::new(spec());
        let o = obs(1.0, 0.01);
        let mut c = cone(&[Cell::new(0, 0), Cell::new(1, 0)]);
        c.cells[1].bearing = 0.45;
        map.update(&o, &c).unwrap();
        let center = map.query(Cell::new(0, 0)).unwrap();
        let edge = map.query(Cell::new(1, 0)).unwrap();
        assert!(center.0 > edge.0);
        assert!(center.1 < edge.1);
    }

    #[test]
    fn failed_update_leaves_map_untouched() {
        let mut map = SemanticMap::new(spec());
        let mut c = cone(&[Cell::new(0, 0), Cell::new(1, 0)]);
        c.cells[1].bearing = 2.0; // outside the 1 rad FOV
        assert!(map.update(&obs(0.9, 0.1), &c).is_err());
        assert_eq!(map, SemanticMap::new(spec()));
    }

    proptest! {
        #[test]
        fn variance_shrinks_and_mean_is_convex(
            m0 in 0.0f64..1.0, v0 in 1e-3f64..1.0, z in -1.0f64..1.0, r in 1e-6f64..2.0,
        ) {
            let (m, v) = fuse(m0, v0, z, r);
            prop_assert!(v < v0);
            prop_assert!(m >= m0.min(z) - 1e-12 && m <= m0.max(z) + 1e-12);
        }

        #[test]
        fn fusion_commutes(
            z1 in -1.0f64..1.0, r1 in 1e-3f64..2.0, z2 in -1.0f64..1.0, r2 in 1e-3f64..2.0,
        ) {
            let (a1, b1) = fuse(PRIOR_MEAN, PRIOR_VARIANCE, z1, r1);
            let (a, b) = fuse(a1, b1, z2, r2);
            let (c1, d1) = fuse(PRIOR_MEAN, PRIOR_VARIANCE, z2, r2);
            let (c, d) = fuse(c1, d1, z1, r1);
            prop_assert!((a - c).abs() <= 1e-12);
            prop_assert!((b - d).abs() <= 1e-12);
        }
    }
}
