use chrono::NaiveDate;

use super::GridSpec;
use crate::error::{Error, Result};

/// Nodata sentinel used when a caller does not pick one.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// Single-band raster on a [`GridSpec`]. Values are held in double precision;
/// the on-disk container stores them as 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    grid: GridSpec,
    values: Vec<f64>,
    nodata: Option<f64>,
    timestamp: Option<NaiveDate>,
}

impl Raster {
    pub fn new(
        grid: GridSpec,
        values: Vec<f64>,
        nodata: Option<f64>,
        timestamp: Option<NaiveDate>,
    ) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "raster has {} values, grid {}x{} requires {}",
                values.len(),
                grid.width,
                grid.height,
                grid.len()
            )));
        }
        if let Some(nd) = nodata {
            if !nd.is_finite() {
                return Err(Error::Validation(format!("nodata sentinel must be finite, got {nd}")));
            }
        }
        if let Some(i) = values
            .iter()
            .position(|&v| !v.is_finite() && Some(v) != nodata)
        {
            return Err(Error::Validation(format!(
                "value at index {i} is {} (only finite values or the nodata sentinel are allowed)",
                values[i]
            )));
        }
        Ok(Raster {
            grid,
            values,
            nodata,
            timestamp,
        })
    }

    /// Raster filled with one value.
    pub fn filled(grid: GridSpec, value: f64, nodata: Option<f64>) -> Result<Self> {
        let n = grid.len();
        Raster::new(grid, vec![value; n], nodata, None)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn nodata(&self) -> Option<f64> {
        self.nodata
    }

    #[inline]
    pub fn timestamp(&self) -> Option<NaiveDate> {
        self.timestamp
    }

    pub fn with_timestamp(mut self, timestamp: Option<NaiveDate>) -> Self {
        self.timestamp = timestamp;
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.grid.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.grid.height
    }

    /// True unless the value at `i` equals the nodata sentinel.
    #[inline]
    pub fn is_valid(&self, i: usize) -> bool {
        match self.nodata {
            Some(nd) => self.values[i] != nd,
            None => true,
        }
    }

    /// Value at flat index `i`, or `None` at nodata cells.
    #[inline]
    pub fn get(&self, i: usize) -> Option<f64> {
        if self.is_valid(i) {
            Some(self.values[i])
        } else {
            None
        }
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Option<f64> {
        self.get(self.grid.index(row, col))
    }

    pub fn valid_count(&self) -> usize {
        (0..self.values.len()).filter(|&i| self.is_valid(i)).count()
    }

    /// Same grid, nodata and timestamp, new values.
    pub fn map_values(&self, values: Vec<f64>) -> Result<Self> {
        Raster::new(self.grid.clone(), values, self.nodata, self.timestamp)
    }

    /// Builds a raster from optional per-cell values, writing `nodata` where
    /// a cell is `None`.
    pub fn from_options(
        grid: GridSpec,
        cells: impl IntoIterator<Item = Option<f64>>,
        nodata: f64,
        timestamp: Option<NaiveDate>,
    ) -> Result<Self> {
        let values = cells.into_iter().map(|c| c.unwrap_or(nodata)).collect();
        Raster::new(grid, values, Some(nodata), timestamp)
    }
}
