//! Regular 2D grids holding scalar fields (DRF heights and cost maps).
//!
//! Cell `(ix, iy)` has its centre at `origin + (ix, iy) * res` and is
//! stored at index `iy * nx + ix` (row-major, rows along `y`).

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

const MAGIC: &[u8; 5] = b"AVGF1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub res: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Extent of the ego-centred grid rebuilt every frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub res: f64,
    pub ahead: f64,
    pub behind: f64,
    pub lateral: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            res: 0.25,
            ahead: 100.0,
            behind: 10.0,
            lateral: 12.0,
        }
    }
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, res: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = Self {
            origin_x,
            origin_y,
            res,
            nx,
            ny,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.res > 0.0 && self.res.is_finite()) {
            return Err(Error::Grid(format!("res must be positive, got {}", self.res)));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Grid(format!(
                "grid needs at least 2x2 cells, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::Grid("non-finite origin".into()));
        }
        Ok(())
    }

    /// Axis-aligned grid around `center` with the configured extent.
    pub fn ego_centered(center: Vec2, cfg: &GridConfig) -> Result<Self> {
        if !(cfg.res > 0.0) || cfg.ahead < 0.0 || cfg.behind < 0.0 || cfg.lateral <= 0.0 {
            return Err(Error::Grid(format!("invalid grid extent {cfg:?}")));
        }
        let nx = ((cfg.ahead + cfg.behind) / cfg.res).round() as usize;
        let ny = ((2.0 * cfg.lateral) / cfg.res).round() as usize;
        Self::new(
            center.x - cfg.behind + 0.5 * cfg.res,
            center.y - cfg.lateral + 0.5 * cfg.res,
            cfg.res,
            nx,
            ny,
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin_x + ix as f64 * self.res,
            self.origin_y + iy as f64 * self.res,
        )
    }

    pub fn center_of_index(&self, idx: usize) -> Vec2 {
        self.center(idx % self.nx, idx / self.nx)
    }

    /// Cell whose square contains `p` (cells are half-open on the upper side).
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin_x) / self.res + 0.5).floor();
        let fy = ((p.y - self.origin_y) / self.res + 0.5).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.cell_of(p).is_some()
    }

    /// Inclusive index ranges of cells whose centres may fall inside the
    /// box `[lo, hi]`; `None` when the box misses the grid.
    pub fn cell_range(&self, lo: Vec2, hi: Vec2) -> Option<((usize, usize), (usize, usize))> {
        let ix0 = ((lo.x - self.origin_x) / self.res).ceil().max(0.0);
        let iy0 = ((lo.y - self.origin_y) / self.res).ceil().max(0.0);
        let ix1 = ((hi.x - self.origin_x) / self.res)
            .floor()
            .min(self.nx as f64 - 1.0);
        let iy1 = ((hi.y - self.origin_y) / self.res)
            .floor()
            .min(self.ny as f64 - 1.0);
        if ix1 < ix0 || iy1 < iy0 {
            return None;
        }
        Some(((ix0 as usize, ix1 as usize), (iy0 as usize, iy1 as usize)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![0.0; spec.len()],
            spec,
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::Grid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.nx,
                spec.ny
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Grid(format!("field value {v} is not finite and >= 0")));
        }
        Ok(Self { spec, values })
    }

    /// Evaluate `f` at every cell centre. Cells are computed in parallel;
    /// each value depends only on its own centre, so the result does not
    /// depend on scheduling.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(Vec2) -> f64 + Sync,
    {
        let values = (0..spec.len())
            .into_par_iter()
            .map(|i| f(spec.center_of_index(i)))
            .collect();
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.spec.index(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        let i = self.spec.index(ix, iy);
        self.values[i] = v;
    }

    /// Raise a cell to at least `v`.
    pub fn raise(&mut self, ix: usize, iy: usize, v: f64) {
        let i = self.spec.index(ix, iy);
        if v > self.values[i] {
            self.values[i] = v;
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let s = &self.spec;
        writeln!(
            w,
            "# origin_x={} origin_y={} res={} nx={} ny={}",
            s.origin_x, s.origin_y, s.res, s.nx, s.ny
        )?;
        for row in self.values.chunks(s.nx) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let s = &self.spec;
        w.write_all(MAGIC)?;
        w.write_all(&s.origin_x.to_le_bytes())?;
        w.write_all(&s.origin_y.to_le_bytes())?;
        w.write_all(&s.res.to_le_bytes())?;
        w.write_all(&(s.nx as u64).to_le_bytes())?;
        w.write_all(&(s.ny as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |e: std::io::Error| Error::Format(format!("truncated grid dump: {e}"));
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(bad)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an AVGF1 grid dump".into()));
        }
        let mut b8 = [0u8; 8];
        let mut f = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8).map_err(bad)?;
            Ok(b8)
        };
        let origin_x = f64::from_le_bytes(f(&mut r)?);
        let origin_y = f64::from_le_bytes(f(&mut r)?);
        let res = f64::from_le_bytes(f(&mut r)?);
        let nx = u64::from_le_bytes(f(&mut r)?) as usize;
        let ny = u64::from_le_bytes(f(&mut r)?) as usize;
        let spec = GridSpec::new(origin_x, origin_y, res, nx, ny)?;
        let mut values = Vec::with_capacity(spec.len());
        for _ in 0..spec.len() {
            values.push(f64::from_le_bytes(f(&mut r)?));
        }
        Self::from_values(spec, values)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_binary(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(std::io::BufReader::new(file))
    }
}

pub(crate) fn ensure_same_spec(a: &GridField, b: &GridField) -> Result<()> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}
