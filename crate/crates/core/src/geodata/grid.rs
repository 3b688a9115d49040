use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geo-referenced pixel grid. `(x0, y0)` is the outer corner of the top-left
/// cell; `dy` is negative for north-up rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub width: usize,
    pub height: usize,
    pub crs: String,
}

impl GridSpec {
    /// Builds and validates a grid.
    pub fn new(
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        width: usize,
        height: usize,
        crs: impl Into<String>,
    ) -> Result<Self> {
        let grid = GridSpec {
            x0,
            y0,
            dx,
            dy,
            width,
            height,
            crs: crs.into(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0.is_finite() && self.y0.is_finite()) {
            return Err(Error::Validation("grid origin must be finite".into()));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::Validation(format!("dx must be > 0, got {}", self.dx)));
        }
        if !(self.dy.is_finite() && self.dy != 0.0) {
            return Err(Error::Validation(format!("dy must be non-zero, got {}", self.dy)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Validation(format!(
                "grid must have at least one cell, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Area of one cell in squared grid units.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        (self.dx * self.dy).abs()
    }

    /// World coordinates of the center of cell `(row, col)`.
    #[inline]
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x0 + (col as f64 + 0.5) * self.dx,
            self.y0 + (row as f64 + 0.5) * self.dy,
        )
    }

    /// World coordinates of the outer corner at grid line `(row, col)`;
    /// `row` ranges over `0..=height`, `col` over `0..=width`.
    #[inline]
    pub fn corner(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x0 + col as f64 * self.dx,
            self.y0 + row as f64 * self.dy,
        )
    }

    /// Total footprint area of the grid.
    pub fn footprint_area(&self) -> f64 {
        (self.width as f64 * self.dx).abs() * (self.height as f64 * self.dy).abs()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Cell containing the world point, if inside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.x0) / self.dx).floor();
        let r = ((y - self.y0) / self.dy).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }
}
