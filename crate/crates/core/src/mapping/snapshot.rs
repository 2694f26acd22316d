//! Binary map snapshots.
//!
//! Layout, little-endian: magic `GSMAP1`, `u32` width, `u32` height, `f64`
//! resolution, `f64` origin x, `f64` origin y, then three row-major `H×W`
//! blocks of `f64`: occupancy log-odds, relevance mean, relevance variance.

use std::io::{Read, Write};
use std::path::Path;

use super::{OccupancyMap, SemanticMap};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 6] = b"GSMAP1";

/// Both map layers at one point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSnapshot {
    pub occupancy: OccupancyMap,
    pub semantic: SemanticMap,
}

impl MapSnapshot {
    pub fn new(occupancy: &OccupancyMap, semantic: &SemanticMap) -> Result<Self> {
        occupancy.check_spec(semantic.spec())?;
        Ok(Self {
            occupancy: occupancy.clone(),
            semantic: semantic.clone(),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        self.occupancy.spec()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let spec = self.spec();
        let n = spec.len();
        let mut out = Vec::with_capacity(MAGIC.len() + 32 + 24 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&spec.width.to_le_bytes());
        out.extend_from_slice(&spec.height.to_le_bytes());
        for v in [spec.resolution, spec.origin.0, spec.origin.1] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for layer in [
            self.occupancy.log_odds(),
            self.semantic.means(),
            self.semantic.variances(),
        ] {
            for v in layer {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(MAGIC.len()).map_err(|_| Error::SnapshotVersion)? != MAGIC {
            return Err(Error::SnapshotVersion);
        }
        let width = r.u32()?;
        let height = r.u32()?;
        let resolution = r.f64()?;
        let origin = (r.f64()?, r.f64()?);
        let spec = GridSpec::new(width, height, resolution, origin)
            .map_err(|e| Error::SnapshotDimension(e.to_string()))?;
        let n = spec.len();
        let expected = n
            .checked_mul(24)
            .ok_or_else(|| Error::SnapshotDimension(format!("{width}x{height} is too large")))?;
        let remaining = bytes.len() - r.pos;
        if remaining < expected {
            return Err(Error::SnapshotTruncated);
        }
        if remaining > expected {
            return Err(Error::SnapshotDimension(format!(
                "{} trailing bytes after a {width}x{height} payload",
                remaining - expected
            )));
        }
        let mut layer = || -> Result<Vec<f64>> { (0..n).map(|_| r.f64()).collect() };
        let log_odds = layer()?;
        let mu = layer()?;
        let var = layer()?;
        Ok(Self {
            occupancy: OccupancyMap::from_log_odds(spec, log_odds),
            semantic: SemanticMap::from_parts(spec, mu, var),
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(Error::SnapshotTruncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
