use chrono::NaiveDate;

use super::Raster;
use crate::error::{Error, Result};

/// Time-ordered rasters sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterStack {
    layers: Vec<Raster>,
    timestamps: Vec<NaiveDate>,
}

impl RasterStack {
    /// Builds a stack from `(date, raster)` pairs that are already in strictly
    /// increasing date order. Each layer's own timestamp is set to its date.
    pub fn new(entries: Vec<(NaiveDate, Raster)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InsufficientData("raster stack needs at least one layer".into()));
        }
        for (i, pair) in entries.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Timestamps(format!(
                    "layer {} ({}) does not follow layer {} ({})",
                    i + 1,
                    pair[1].0,
                    i,
                    pair[0].0
                )));
            }
        }
        let first_grid = entries[0].1.grid().clone();
        for (i, (_, r)) in entries.iter().enumerate().skip(1) {
            if *r.grid() != first_grid {
                return Err(Error::GridMismatch {
                    first: "layer 0".into(),
                    second: format!("layer {i}"),
                });
            }
        }
        let (timestamps, layers) = entries
            .into_iter()
            .map(|(t, r)| (t, r.with_timestamp(Some(t))))
            .unzip();
        Ok(RasterStack { layers, timestamps })
    }

    /// Like [`RasterStack::new`] but sorts by date first; duplicate dates are
    /// still rejected.
    pub fn from_unsorted(mut entries: Vec<(NaiveDate, Raster)>) -> Result<Self> {
        entries.sort_by_key(|(t, _)| *t);
        RasterStack::new(entries)
    }

    /// Builds a stack from rasters carrying their own timestamps.
    pub fn from_layers(layers: Vec<Raster>) -> Result<Self> {
        let entries = layers
            .into_iter()
            .enumerate()
            .map(|(i, r)| match r.timestamp() {
                Some(t) => Ok((t, r)),
                None => Err(Error::Timestamps(format!("layer {i} has no timestamp"))),
            })
            .collect::<Result<Vec<_>>>()?;
        RasterStack::new(entries)
    }

    #[inline]
    pub fn layers(&self) -> &[Raster] {
        &self.layers
    }

    #[inline]
    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    #[inline]
    pub fn grid(&self) -> &super::GridSpec {
        self.layers[0].grid()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, &Raster)> {
        self.timestamps.iter().copied().zip(self.layers.iter())
    }

    /// Applies `f` to every layer, keeping dates. The result must keep the grid.
    pub fn try_map(&self, mut f: impl FnMut(&Raster) -> Result<Raster>) -> Result<Self> {
        let entries = self
            .iter()
            .map(|(t, r)| f(r).map(|m| (t, m)))
            .collect::<Result<Vec<_>>>()?;
        RasterStack::new(entries)
    }
}
