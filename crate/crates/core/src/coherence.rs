//! Low-to-high interferometric coherence events.
//!
//! Each pixel's baseline is the mean of its first `baseline_n` valid values.
//! Pixels whose baseline is below `tau_low` are eligible; the event is the
//! first later layer that starts a run of `persistence_k` consecutive layers
//! at or above `tau_high`.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geodata::{days_since_epoch, GridSpec, Raster, RasterStack, DEFAULT_NODATA};
use crate::labeling::label_components;

/// A raster stack with every valid value in `[0, 1]`. Layer timestamps are
/// the later acquisition of each interferometric pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceStack(RasterStack);

impl CoherenceStack {
    pub fn new(stack: RasterStack) -> Result<Self> {
        for (t, r) in stack.iter() {
            if let Some(i) = (0..r.values().len()).find(|&i| r.get(i).is_some_and(|v| !(0.0..=1.0).contains(&v))) {
                return Err(Error::Validation(format!(
                    "coherence layer {t} has value {} outside [0, 1] at pixel {i}",
                    r.values()[i]
                )));
            }
        }
        Ok(CoherenceStack(stack))
    }

    pub fn stack(&self) -> &RasterStack {
        &self.0
    }

    pub fn into_inner(self) -> RasterStack {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub tau_low: f64,
    pub tau_high: f64,
    pub persistence_k: usize,
    pub baseline_n: usize,
    /// Calendar baseline: when set, the baseline uses layers dated before
    /// this date and events are searched from the first layer on or after it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_end: Option<NaiveDate>,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams {
            tau_low: 0.35,
            tau_high: 0.6,
            persistence_k: 2,
            baseline_n: 6,
            baseline_end: None,
        }
    }
}

impl EventParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.tau_low && self.tau_low < self.tau_high && self.tau_high <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= tau_low < tau_high <= 1, got {} and {}",
                self.tau_low, self.tau_high
            )));
        }
        if self.persistence_k == 0 || self.baseline_n == 0 {
            return Err(Error::InvalidParams("persistence_k and baseline_n must be >= 1".into()));
        }
        Ok(())
    }
}

/// First-event date per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMap {
    pub grid: GridSpec,
    pub timestamps: Vec<NaiveDate>,
    /// Index into `timestamps` of each pixel's event.
    pub event_index: Vec<Option<usize>>,
    /// Pixels with a computable baseline.
    pub valid: Vec<bool>,
}

impl EventMap {
    pub fn event_date(&self, i: usize) -> Option<NaiveDate> {
        self.event_index[i].map(|k| self.timestamps[k])
    }

    pub fn event_count(&self) -> usize {
        self.event_index.iter().filter(|e| e.is_some()).count()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.event_index.iter().map(Option::is_some).collect()
    }

    /// Event dates as days since 1970-01-01, nodata where there is no event.
    pub fn to_raster(&self) -> Result<Raster> {
        Raster::from_options(
            self.grid.clone(),
            (0..self.event_index.len()).map(|i| self.event_date(i).map(|d| days_since_epoch(d) as f64)),
            DEFAULT_NODATA,
            None,
        )
    }
}

/// Event index for one pixel series; `None` entries are nodata.
pub fn scan_series(series: &[Option<f64>], search_from: usize, params: &EventParams) -> (bool, Option<usize>) {
    let baseline: Vec<f64> = match params.baseline_end {
        Some(_) => series[..search_from].iter().flatten().copied().collect(),
        None => series.iter().flatten().take(params.baseline_n).copied().collect(),
    };
    if baseline.is_empty() || (params.baseline_end.is_none() && baseline.len() < params.baseline_n) {
        return (false, None);
    }
    let mean = baseline.iter().sum::<f64>() / baseline.len() as f64;
    if mean >= params.tau_low {
        return (true, None);
    }
    let k = params.persistence_k;
    let high = |v: &Option<f64>| v.is_some_and(|v| v >= params.tau_high);
    let hit = (search_from..series.len().saturating_sub(k - 1)).find(|&i| series[i..i + k].iter().all(high));
    (true, hit)
}

pub fn detect_low_to_high(stack: &CoherenceStack, params: &EventParams) -> Result<EventMap> {
    params.validate()?;
    let stack = stack.stack();
    let timestamps = stack.timestamps().to_vec();
    let search_from = match params.baseline_end {
        Some(end) => {
            let idx = timestamps.partition_point(|&t| t < end);
            if idx == 0 {
                return Err(Error::InsufficientData(format!("no coherence layers dated before {end}")));
            }
            idx
        }
        None => params.baseline_n,
    };
    if stack.len() < search_from + params.persistence_k {
        return Err(Error::InsufficientData(format!(
            "need at least {} coherence layers, found {}",
            search_from + params.persistence_k,
            stack.len()
        )));
    }

    let grid = stack.grid().clone();
    let layers = stack.layers();
    let scanned: Vec<(bool, Option<usize>)> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(layers.len()),
            |series, i| {
                series.clear();
                series.extend(layers.iter().map(|r| r.get(i)));
                scan_series(series, search_from, params)
            },
        )
        .collect();
    let (valid, event_index) = scanned.into_iter().unzip();
    Ok(EventMap {
        grid,
        timestamps,
        event_index,
        valid,
    })
}

/// One connected group of event pixels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventComponent {
    pub pixel_count: usize,
    pub area_m2: f64,
    pub first_event_date: NaiveDate,
    pub last_event_date: NaiveDate,
    /// Inclusive `(row_min, col_min, row_max, col_max)`.
    pub bbox_px: (usize, usize, usize, usize),
}

impl EventComponent {
    /// Closed counter-clockwise ring of the component's bounding box in world
    /// coordinates.
    pub fn ring(&self, grid: &GridSpec) -> Vec<[f64; 2]> {
        let (r0, c0, r1, c1) = self.bbox_px;
        let (xa, ya) = grid.corner(r0, c0);
        let (xb, yb) = grid.corner(r1 + 1, c1 + 1);
        let (xmin, xmax) = (xa.min(xb), xa.max(xb));
        let (ymin, ymax) = (ya.min(yb), ya.max(yb));
        vec![[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax], [xmin, ymin]]
    }
}

pub const DEFAULT_MIN_COMPONENT_PX: usize = 5;

/// 4-connected event components of at least `min_size_px` pixels, in scan
/// order of their first pixel.
pub fn event_components(events: &EventMap, min_size_px: usize) -> Vec<EventComponent> {
    let (w, h) = (events.grid.width, events.grid.height);
    let comps = label_components(&events.mask(), w, h);
    let n = comps.sizes.len();
    let mut bbox = vec![(usize::MAX, usize::MAX, 0usize, 0usize); n];
    let mut dates: Vec<Option<(NaiveDate, NaiveDate)>> = vec![None; n];
    for (i, &l) in comps.labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let k = l as usize - 1;
        let (r, c) = (i / w, i % w);
        let b = &mut bbox[k];
        *b = (b.0.min(r), b.1.min(c), b.2.max(r), b.3.max(c));
        let d = events.event_date(i).expect("labelled pixels carry events");
        dates[k] = Some(match dates[k] {
            None => (d, d),
            Some((lo, hi)) => (lo.min(d), hi.max(d)),
        });
    }
    let cell = events.grid.cell_area();
    (0..n)
        .filter(|&k| comps.sizes[k] >= min_size_px)
        .map(|k| {
            let (first, last) = dates[k].expect("non-empty component");
            EventComponent {
                pixel_count: comps.sizes[k],
                area_m2: comps.sizes[k] as f64 * cell,
                first_event_date: first,
                last_event_date: last,
                bbox_px: bbox[k],
            }
        })
        .collect()
}

/// GeoJSON FeatureCollection of bounding-box polygons of event components.
pub fn events_to_components(events: &EventMap, min_size_px: usize) -> Value {
    let features: Vec<Value> = event_components(events, min_size_px)
        .iter()
        .map(|c| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [c.ring(&events.grid)]},
                "properties": {
                    "pixel_count": c.pixel_count,
                    "area_m2": c.area_m2,
                    "first_event_date": c.first_event_date.to_string(),
                    "last_event_date": c.last_event_date.to_string(),
                },
            })
        })
        .collect();
    json!({
        "type": "FeatureCollection",
        "grid_crs": events.grid.crs,
        "features": features,
    })
}
