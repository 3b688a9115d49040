//! Log-ratio change detection on backscatter stacks.
//!
//! A per-pixel median over a reference date range is compared against test
//! composites formed from each pair of consecutive later acquisitions. A
//! pixel changes in a window when its log ratio exceeds the threshold; its
//! change date is the later acquisition of the first such window.

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{days_since_epoch, GridSpec, Raster, RasterStack, DEFAULT_NODATA};
use crate::labeling::sieve;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Backscatter drop: `log(ref / test)`.
    #[default]
    Decrease,
    /// Backscatter rise: `log(test / ref)`.
    Increase,
    /// `|log(test / ref)|`.
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputScale {
    /// Linear power.
    #[default]
    Linear,
    /// Decibels, converted with `10^(dB/10)`.
    Db,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
    Two,
}

impl LogBase {
    #[inline]
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
            LogBase::Two => x.log2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeParams {
    pub threshold: f64,
    pub direction: Direction,
    pub input_scale: InputScale,
    pub log_base: LogBase,
    /// New-change pixels a window needs before it can date the first detection.
    pub min_area_px: usize,
    /// 4-connected change clusters smaller than this are dropped from every
    /// window mask before accumulation. `1` keeps single pixels.
    pub min_cluster_px: usize,
    /// Reference range `[ref_start, ref_end)`.
    pub ref_start: NaiveDate,
    pub ref_end: NaiveDate,
}

impl ChangeParams {
    pub const DEFAULT_THRESHOLD: f64 = 0.4;
    pub const DEFAULT_MIN_AREA_PX: usize = 10;
    pub const DEFAULT_MIN_CLUSTER_PX: usize = 25;

    pub fn new(ref_start: NaiveDate, ref_end: NaiveDate) -> Self {
        ChangeParams {
            threshold: Self::DEFAULT_THRESHOLD,
            direction: Direction::default(),
            input_scale: InputScale::default(),
            log_base: LogBase::default(),
            min_area_px: Self::DEFAULT_MIN_AREA_PX,
            min_cluster_px: Self::DEFAULT_MIN_CLUSTER_PX,
            ref_start,
            ref_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParams(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if self.min_area_px == 0 || self.min_cluster_px == 0 {
            return Err(Error::InvalidParams("min_area_px and min_cluster_px must be >= 1".into()));
        }
        if self.ref_start >= self.ref_end {
            return Err(Error::InvalidParams(format!(
                "reference range [{}, {}) is empty",
                self.ref_start, self.ref_end
            )));
        }
        Ok(())
    }
}

/// Converts a dB raster to linear power.
pub fn db_to_linear(r: &Raster) -> Result<Raster> {
    let values = (0..r.values().len())
        .map(|i| match r.get(i) {
            Some(v) => 10f64.powf(v / 10.0),
            None => r.values()[i],
        })
        .collect();
    r.map_values(values)
}

fn median_of(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

/// Per-pixel median over layers dated in `[start, end)`, ignoring nodata.
/// Even counts average the two middle values; all-nodata pixels stay nodata.
pub fn median_composite(stack: &RasterStack, start: NaiveDate, end: NaiveDate) -> Result<Raster> {
    let selected: Vec<&Raster> = stack
        .iter()
        .filter(|(t, _)| *t >= start && *t < end)
        .map(|(_, r)| r)
        .collect();
    if selected.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no layers dated in [{start}, {end})"
        )));
    }
    let grid = stack.grid().clone();
    let nodata = output_nodata(&selected);
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(selected.len()),
            |buf, i| {
                buf.clear();
                buf.extend(selected.iter().filter_map(|r| r.get(i)));
                if buf.is_empty() {
                    nodata
                } else {
                    median_of(buf)
                }
            },
        )
        .collect();
    Raster::new(grid, values, Some(nodata), None)
}

fn output_nodata(layers: &[&Raster]) -> f64 {
    layers.iter().find_map(|r| r.nodata()).unwrap_or(DEFAULT_NODATA)
}

/// Mean of two consecutive acquisitions.
#[derive(Debug, Clone, PartialEq)]
pub struct TestComposite {
    pub first: NaiveDate,
    pub second: NaiveDate,
    pub raster: Raster,
}

/// Stride-1 composites of consecutive layer pairs with both dates after
/// `after`. Each pixel is the mean of its valid inputs.
pub fn pairwise_test_composites(stack: &RasterStack, after: NaiveDate) -> Result<Vec<TestComposite>> {
    let later: Vec<(NaiveDate, &Raster)> = stack.iter().filter(|(t, _)| *t > after).collect();
    if later.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 layers after {after}, found {}",
            later.len()
        )));
    }
    later
        .windows(2)
        .map(|pair| {
            let (t1, a) = pair[0];
            let (t2, b) = pair[1];
            let nodata = output_nodata(&[a, b]);
            let values = (0..a.values().len())
                .map(|i| match (a.get(i), b.get(i)) {
                    (Some(x), Some(y)) => 0.5 * (x + y),
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => nodata,
                })
                .collect();
            Ok(TestComposite {
                first: t1,
                second: t2,
                raster: Raster::new(a.grid().clone(), values, Some(nodata), Some(t2))?,
            })
        })
        .collect()
}

/// Thresholded log-ratio map for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeMap {
    pub grid: GridSpec,
    pub mask: Vec<bool>,
    /// Pixels valid in both inputs; `mask` is false elsewhere.
    pub valid: Vec<bool>,
    pub window: Option<(NaiveDate, NaiveDate)>,
}

impl ChangeMap {
    pub fn changed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// 0/1 raster with nodata at invalid pixels.
    pub fn to_raster(&self) -> Result<Raster> {
        let cells = self
            .mask
            .iter()
            .zip(&self.valid)
            .map(|(&m, &v)| v.then_some(if m { 1.0 } else { 0.0 }));
        Raster::from_options(self.grid.clone(), cells, DEFAULT_NODATA, self.window.map(|w| w.1))
    }
}

/// Changed area: true-pixel count times cell area.
pub fn area_of(map: &ChangeMap) -> f64 {
    map.changed_count() as f64 * map.grid.cell_area()
}

/// Changed area of a 0/1 mask raster (any valid non-zero cell counts).
pub fn area_of_mask(mask: &Raster) -> f64 {
    let n = (0..mask.values().len())
        .filter(|&i| mask.get(i).is_some_and(|v| v != 0.0))
        .count();
    n as f64 * mask.grid().cell_area()
}

/// Per-pixel log-ratio statistic thresholded at `params.threshold`.
pub fn log_ratio_change(reference: &Raster, test: &Raster, params: &ChangeParams) -> Result<ChangeMap> {
    if !(params.threshold.is_finite() && params.threshold > 0.0) {
        return Err(Error::InvalidParams(format!("threshold must be > 0, got {}", params.threshold)));
    }
    if reference.grid() != test.grid() {
        return Err(Error::GridMismatch {
            first: "reference".into(),
            second: "test".into(),
        });
    }
    let (reference, test) = match params.input_scale {
        InputScale::Linear => (reference.clone(), test.clone()),
        InputScale::Db => (db_to_linear(reference)?, db_to_linear(test)?),
    };
    let n = reference.values().len();
    let mut mask = vec![false; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        let (Some(r), Some(t)) = (reference.get(i), test.get(i)) else {
            continue;
        };
        if r <= 0.0 || t <= 0.0 {
            return Err(Error::Validation(format!(
                "non-positive linear power at pixel {i} (reference {r}, test {t})"
            )));
        }
        valid[i] = true;
        let stat = match params.direction {
            Direction::Decrease => params.log_base.log(r / t),
            Direction::Increase => params.log_base.log(t / r),
            Direction::Both => params.log_base.log(t / r).abs(),
        };
        mask[i] = stat > params.threshold;
    }
    Ok(ChangeMap {
        grid: reference.grid().clone(),
        mask,
        valid,
        window: test.timestamp().map(|t| (t, t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub new_pixels: usize,
    pub new_area_m2: f64,
    pub cumulative_area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSeries {
    pub rows: Vec<SeriesRow>,
    pub first_detection_date: Option<NaiveDate>,
    pub total_area_m2: f64,
}

impl ChangeSeries {
    /// `window_end_date,new_area_m2,cumulative_area_m2` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("window_end_date,new_area_m2,cumulative_area_m2\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.window_end, r.new_area_m2, r.cumulative_area_m2));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct ChangeDetection {
    pub reference: Raster,
    pub series: ChangeSeries,
    pub maps: Vec<ChangeMap>,
    /// 0/1, nodata where the reference is nodata.
    pub cumulative: Raster,
    /// Change date as days since 1970-01-01, nodata where unchanged.
    pub change_dates: Raster,
}

/// Runs the full reference/test/threshold procedure over a stack.
pub fn run_change_detection(stack: &RasterStack, params: &ChangeParams) -> Result<ChangeDetection> {
    params.validate()?;
    let linear;
    let stack = match params.input_scale {
        InputScale::Linear => stack,
        InputScale::Db => {
            linear = stack.try_map(db_to_linear)?;
            &linear
        }
    };
    let inner = ChangeParams {
        input_scale: InputScale::Linear,
        ..params.clone()
    };

    let reference = median_composite(stack, params.ref_start, params.ref_end)?;
    let after = params.ref_end - Duration::days(1);
    let composites = pairwise_test_composites(stack, after)?;

    let grid = stack.grid().clone();
    let (w, h) = (grid.width, grid.height);
    let cell = grid.cell_area();

    let maps: Vec<ChangeMap> = composites
        .par_iter()
        .map(|tc| {
            let mut m = log_ratio_change(&reference, &tc.raster, &inner)?;
            m.mask = sieve(&m.mask, w, h, params.min_cluster_px);
            m.window = Some((tc.first, tc.second));
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let mut changed_on: Vec<Option<NaiveDate>> = vec![None; grid.len()];
    let mut rows = Vec::with_capacity(maps.len());
    let mut cumulative_px = 0usize;
    let mut first_detection = None;
    for m in &maps {
        let (start, end) = m.window.expect("window set above");
        let mut new_px = 0usize;
        for (i, &hit) in m.mask.iter().enumerate() {
            if hit && changed_on[i].is_none() {
                changed_on[i] = Some(end);
                new_px += 1;
            }
        }
        cumulative_px += new_px;
        if first_detection.is_none() && new_px >= params.min_area_px {
            first_detection = Some(end);
        }
        rows.push(SeriesRow {
            window_start: start,
            window_end: end,
            new_pixels: new_px,
            new_area_m2: new_px as f64 * cell,
            cumulative_area_m2: cumulative_px as f64 * cell,
        });
    }

    let ref_valid: Vec<bool> = (0..grid.len()).map(|i| reference.is_valid(i)).collect();
    let cumulative = Raster::from_options(
        grid.clone(),
        (0..grid.len()).map(|i| ref_valid[i].then_some(if changed_on[i].is_some() { 1.0 } else { 0.0 })),
        DEFAULT_NODATA,
        None,
    )?;
    let change_dates = Raster::from_options(
        grid.clone(),
        changed_on.iter().map(|d| d.map(|d| days_since_epoch(d) as f64)),
        DEFAULT_NODATA,
        None,
    )?;
    Ok(ChangeDetection {
        reference,
        series: ChangeSeries {
            rows,
            first_detection_date: first_detection,
            total_area_m2: cumulative_px as f64 * cell,
        },
        maps,
        cumulative,
        change_dates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn grid(w: usize, h: usize) -> GridSpec {
        GridSpec::new(0.0, 0.0, 10.0, -10.0, w, h, "EPSG:32646").unwrap()
    }

    fn flat(v: f64) -> Raster {
        Raster::filled(grid(1, 1), v, Some(DEFAULT_NODATA)).unwrap()
    }

    fn params() -> ChangeParams {
        ChangeParams::new(d("2017-01-01"), d("2017-09-01"))
    }

    #[test]
    fn identical_images_do_not_change() {
        let m = log_ratio_change(&flat(0.3), &flat(0.3), &params()).unwrap();
        assert_eq!(m.changed_count(), 0);
    }

    #[test]
    fn halving_clears_threshold_but_thirty_percent_does_not() {
        assert_eq!(log_ratio_change(&flat(1.0), &flat(0.5), &params()).unwrap().changed_count(), 1);
        assert_eq!(log_ratio_change(&flat(1.0), &flat(0.7), &params()).unwrap().changed_count(), 0);
    }

    #[test]
    fn direction_matters() {
        let mut p = params();
        assert_eq!(log_ratio_change(&flat(1.0), &flat(2.0), &p).unwrap().changed_count(), 0);
        p.direction = Direction::Increase;
        assert_eq!(log_ratio_change(&flat(1.0), &flat(2.0), &p).unwrap().changed_count(), 1);
        p.direction = Direction::Both;
        assert_eq!(log_ratio_change(&flat(1.0), &flat(0.5), &p).unwrap().changed_count(), 1);
    }

    #[test]
    fn db_inputs_are_converted() {
        let mut p = params();
        p.input_scale = InputScale::Db;
        // -3 dB drop: ln(10^0.3) = 0.6908 > 0.4
        assert_eq!(log_ratio_change(&flat(-10.0), &flat(-13.0), &p).unwrap().changed_count(), 1);
        assert_eq!(log_ratio_change(&flat(-10.0), &flat(-11.0), &p).unwrap().changed_count(), 0);
    }

    #[test]
    fn non_positive_power_is_rejected() {
        assert!(log_ratio_change(&flat(1.0), &flat(0.0), &params()).is_err());
        assert!(log_ratio_change(&flat(1.0), &flat(DEFAULT_NODATA), &params()).is_ok());
    }

    #[test]
    fn median_handles_outliers_even_counts_and_nodata() {
        let layers = [1.0, 5.0, 100.0];
        let entries = layers
            .iter()
            .enumerate()
            .map(|(i, &v)| (d("2017-01-01") + Duration::days(i as i64), flat(v)))
            .collect();
        let s = RasterStack::new(entries).unwrap();
        assert_eq!(median_composite(&s, d("2017-01-01"), d("2017-02-01")).unwrap().values(), &[5.0]);
        assert_eq!(median_composite(&s, d("2017-01-01"), d("2017-01-03")).unwrap().values(), &[3.0]);
        assert!(median_composite(&s, d("2018-01-01"), d("2018-02-01")).is_err());

        let nd = RasterStack::new(vec![(d("2017-01-01"), flat(DEFAULT_NODATA))]).unwrap();
        let m = median_composite(&nd, d("2017-01-01"), d("2017-02-01")).unwrap();
        assert_eq!(m.get(0), None);
    }

    #[test]
    fn test_composites_are_pair_means() {
        let entries = [(1, 2.0), (2, 4.0), (3, 4.0), (4, DEFAULT_NODATA)]
            .iter()
            .map(|&(k, v)| (d("2017-10-01") + Duration::days(k), flat(v)))
            .collect();
        let s = RasterStack::new(entries).unwrap();
        let c = pairwise_test_composites(&s, d("2017-10-01")).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].raster.values(), &[3.0]);
        assert_eq!(c[1].raster.values(), &[4.0]);
        assert_eq!(c[2].raster.values(), &[4.0]);
        assert_eq!(c[2].second, d("2017-10-05"));
        assert!(pairwise_test_composites(&s, d("2017-10-04")).is_err());
    }

    #[test]
    fn area_counts_pixels() {
        let g = grid(10, 10);
        let empty = ChangeMap { grid: g.clone(), mask: vec![false; 100], valid: vec![true; 100], window: None };
        assert_eq!(area_of(&empty), 0.0);
        let full = ChangeMap { mask: vec![true; 100], ..empty };
        assert_eq!(area_of(&full), 10_000.0);
        assert_eq!(area_of_mask(&full.to_raster().unwrap()), 10_000.0);
    }

    #[test]
    fn step_change_is_dated_by_later_acquisition() {
        // 6x6 scene, the left 3x6 block drops by half from 2018-01-10 on.
        let g = grid(6, 6);
        let mut entries = Vec::new();
        for k in 0..10 {
            let t = d("2017-06-01") + Duration::days(30 * k);
            let values = (0..36)
                .map(|i| if i % 6 < 3 && t >= d("2018-01-10") { 0.5 } else { 1.0 })
                .collect();
            entries.push((t, Raster::new(g.clone(), values, None, None).unwrap()));
        }
        let stack = RasterStack::new(entries).unwrap();
        let mut p = ChangeParams::new(d("2017-06-01"), d("2017-09-01"));
        p.min_area_px = 10;
        p.min_cluster_px = 1;
        let out = run_change_detection(&stack, &p).unwrap();
        // Window (2017-12-28, 2018-01-27): mean 0.75, ln(1/0.75) = 0.288 -> no.
        // Window (2018-01-27, 2018-02-26): 0.5 -> ln 2 -> yes.
        assert_eq!(out.series.first_detection_date, Some(d("2018-02-26")));
        assert_eq!(out.series.total_area_m2, 18.0 * 100.0);
        let cum: Vec<f64> = out.series.rows.iter().map(|r| r.cumulative_area_m2).collect();
        assert!(cum.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(area_of_mask(&out.cumulative), out.series.total_area_m2);
        assert!(out.series.to_csv().contains("2018-02-26,1800,1800\n"));
    }
}
