use std::f64::consts::PI;
use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::project::{local_crs, PointSet};
use crate::error::{Error, Result};
use crate::geodata::{GridSpec, Raster};

/// KDE bandwidth per axis, in grid units (meters for local frames).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// Scott's rule, `h_k = sigma_k * n^(-1/6)` for two dimensions.
    Scott,
    Fixed { hx: f64, hy: f64 },
}

/// Resolves a bandwidth to concrete `(hx, hy)`.
pub fn resolve_bandwidth(ps: &PointSet, bw: Bandwidth) -> Result<(f64, f64)> {
    match bw {
        Bandwidth::Fixed { hx, hy } => {
            if !(hx.is_finite() && hy.is_finite() && hx > 0.0 && hy > 0.0) {
                return Err(Error::InvalidParams(format!("bandwidth must be positive, got ({hx}, {hy})")));
            }
            Ok((hx, hy))
        }
        Bandwidth::Scott => scott_bandwidth(ps),
    }
}

pub fn scott_bandwidth(ps: &PointSet) -> Result<(f64, f64)> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "automatic bandwidth needs at least 2 points".into(),
        ));
    }
    let sd = |sel: fn(&(f64, f64)) -> f64| {
        let m = ps.points().iter().map(sel).sum::<f64>() / n as f64;
        let ss: f64 = ps.points().iter().map(|p| (sel(p) - m).powi(2)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    };
    let (sx, sy) = (sd(|p| p.0), sd(|p| p.1));
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::InsufficientData(format!(
            "zero spread along the {} axis; set an explicit bandwidth",
            if sx == 0.0 { "x" } else { "y" }
        )));
    }
    let factor = (n as f64).powf(-1.0 / 6.0);
    Ok((sx * factor, sy * factor))
}

/// Grid covering the union extent of `sets`, padded by `pad` on every side and
/// snapped outward to multiples of `cell`. All sets must share one origin.
pub fn auto_grid(sets: &[&PointSet], cell: f64, pad: f64) -> Result<GridSpec> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InsufficientData("auto grid needs at least one point set".into()))?;
    if sets.iter().any(|s| s.origin() != first.origin()) {
        return Err(Error::InvalidParams("point sets use different projection origins".into()));
    }
    if !(cell.is_finite() && cell > 0.0 && pad.is_finite() && pad >= 0.0) {
        return Err(Error::InvalidParams(format!("invalid cell size {cell} or padding {pad}")));
    }
    let (mut xmin, mut ymin, mut xmax, mut ymax) = first.extent();
    for s in &sets[1..] {
        let (a, b, c, d) = s.extent();
        xmin = xmin.min(a);
        ymin = ymin.min(b);
        xmax = xmax.max(c);
        ymax = ymax.max(d);
    }
    let x0 = ((xmin - pad) / cell).floor() * cell;
    let y0 = ((ymax + pad) / cell).ceil() * cell;
    let width = (((xmax + pad) - x0) / cell).ceil().max(1.0) as usize;
    let height = ((y0 - (ymin - pad)) / cell).ceil().max(1.0) as usize;
    GridSpec::new(x0, y0, cell, -cell, width, height, local_crs(first.origin()))
}

#[inline]
fn gauss(u: f64, h: f64) -> f64 {
    let z = u / h;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * h)
}

/// Unnormalised density at each cell center: the mean over points of the
/// product of per-axis Gaussian kernels. Evaluated in full, no tail cutoff.
pub fn kde_density(ps: &PointSet, grid: &GridSpec, bw: Bandwidth) -> Result<Raster> {
    grid.validate()?;
    let (hx, hy) = resolve_bandwidth(ps, bw)?;
    let (w, h, n) = (grid.width, grid.height, ps.len());

    let mut kx = vec![0.0; n * w];
    let mut ky = vec![0.0; n * h];
    for (i, &(px, py)) in ps.points().iter().enumerate() {
        for c in 0..w {
            kx[i * w + c] = gauss(grid.cell_center(0, c).0 - px, hx);
        }
        for r in 0..h {
            ky[i * h + r] = gauss(grid.cell_center(r, 0).1 - py, hy);
        }
    }

    let inv_n = 1.0 / n as f64;
    let mut values = vec![0.0; w * h];
    values.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        for i in 0..n {
            let wy = ky[i * h + r];
            if wy == 0.0 {
                continue;
            }
            let gx = &kx[i * w..(i + 1) * w];
            for (v, &g) in row.iter_mut().zip(gx) {
                *v += wy * g;
            }
        }
        row.iter_mut().for_each(|v| *v *= inv_n);
    });
    Raster::new(grid.clone(), values, None, None)
}

/// Discrete probability mass over grid cells: non-negative, sums to 1, no nodata.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRaster(Raster);

impl DensityRaster {
    pub const MASS_TOLERANCE: f64 = 1e-9;

    pub fn from_raster(r: Raster) -> Result<Self> {
        if (0..r.values().len()).any(|i| !r.is_valid(i)) {
            return Err(Error::Validation("density raster has nodata cells".into()));
        }
        if r.values().iter().any(|&v| v < 0.0) {
            return Err(Error::Validation("density raster has negative cells".into()));
        }
        let mass: f64 = r.values().iter().sum();
        if (mass - 1.0).abs() > Self::MASS_TOLERANCE {
            return Err(Error::Validation(format!("density raster mass is {mass}, expected 1")));
        }
        Ok(DensityRaster(r))
    }

    /// Rescales a non-negative raster to unit mass.
    pub fn normalize(r: Raster) -> Result<Self> {
        let mass: f64 = r.values().iter().sum();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InsufficientData(format!(
                "cannot normalise raster with total {mass} (grid too far from the points?)"
            )));
        }
        let values = r.values().iter().map(|v| v / mass).collect();
        let r = Raster::new(r.grid().clone(), values, None, r.timestamp())?;
        DensityRaster::from_raster(r)
    }

    pub fn into_raster(self) -> Raster {
        self.0
    }
}

impl Deref for DensityRaster {
    type Target = Raster;

    fn deref(&self) -> &Raster {
        &self.0
    }
}

/// Gaussian KDE of the points on `grid`, renormalised to unit cell mass.
pub fn kde2d(ps: &PointSet, grid: &GridSpec, bw: Bandwidth) -> Result<DensityRaster> {
    DensityRaster::normalize(kde_density(ps, grid, bw)?)
}
