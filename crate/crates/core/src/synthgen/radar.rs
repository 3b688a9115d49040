use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rng, Footprint};
use crate::error::{Error, Result};
use crate::geodata::io::write_json;
use crate::geodata::{write_stack, GridSpec, Raster, RasterStack, DEFAULT_NODATA};

fn default_grid(size: usize, cell: f64) -> GridSpec {
    GridSpec::new(200_000.0, 2_330_000.0, cell, -cell, size, size, "EPSG:32646").expect("valid grid")
}

fn cadence(start: NaiveDate, every_days: i64, n: usize) -> Vec<NaiveDate> {
    (0..n).map(|k| start + Duration::days(every_days * k as i64)).collect()
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    if dates.is_empty() {
        return Err(Error::InvalidParams("scene needs at least one date".into()));
    }
    if dates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("scene dates must be strictly increasing".into()));
    }
    Ok(())
}

/// f32-rounded values so that the in-memory stack equals what is written.
fn layer(grid: &GridSpec, values: Vec<f64>, t: NaiveDate) -> Result<Raster> {
    let values = values.into_iter().map(|v| v as f32 as f64).collect();
    Raster::new(grid.clone(), values, Some(DEFAULT_NODATA), Some(t))
}

fn write_scene<T: Serialize>(stack: &RasterStack, truth: &T, dir: &Path, prefix: &str) -> Result<PathBuf> {
    let manifest = write_stack(stack, dir, prefix)?;
    write_json(&dir.join("truth.json"), truth)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SarSceneSpec {
    pub grid: GridSpec,
    pub dates: Vec<NaiveDate>,
    /// Pre-change mean linear power.
    pub mu_pre: f64,
    pub footprint: Footprint,
    /// Footprint pixels from this date on carry the drop; `None` for no change.
    pub change_date: Option<NaiveDate>,
    pub drop_db: f64,
    /// Equivalent number of looks; speckle is Gamma(L, 1/L).
    pub enl: f64,
    pub seed: u64,
}

impl Default for SarSceneSpec {
    fn default() -> Self {
        let grid = default_grid(512, 10.0);
        let dates = cadence(NaiveDate::from_ymd_opt(2017, 1, 1).expect("valid date"), 12, 40);
        SarSceneSpec {
            footprint: Footprint::pixel_rect(&grid, 200, 150, 130, 100),
            change_date: Some(dates[20]),
            grid,
            dates,
            mu_pre: 0.05,
            drop_db: -3.0,
            enl: 4.0,
            seed: 1,
        }
    }
}

impl SarSceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        check_dates(&self.dates)?;
        self.footprint.validate()?;
        if !(self.mu_pre > 0.0 && self.mu_pre.is_finite()) {
            return Err(Error::InvalidParams("mu_pre must be > 0".into()));
        }
        if !(self.enl >= 1.0 && self.enl.is_finite()) {
            return Err(Error::InvalidParams("enl must be >= 1".into()));
        }
        if !self.drop_db.is_finite() {
            return Err(Error::InvalidParams("drop_db must be finite".into()));
        }
        if let Some(c) = self.change_date {
            if c < self.dates[0] || c > *self.dates.last().expect("non-empty") {
                return Err(Error::InvalidParams(format!("change date {c} outside the acquisition span")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackscatterTruth {
    pub seed: u64,
    pub dates: Vec<NaiveDate>,
    pub change_date: Option<NaiveDate>,
    /// First layer dated on or after the change date.
    pub change_index: Option<usize>,
    pub footprint_pixels: usize,
    pub footprint_area_m2: f64,
    pub mu_pre: f64,
    pub mu_post: f64,
    pub drop_db: f64,
    pub enl: f64,
}

#[derive(Debug, Clone)]
pub struct BackscatterScene {
    pub stack: RasterStack,
    pub footprint_mask: Vec<bool>,
    pub truth: BackscatterTruth,
}

impl BackscatterScene {
    /// Writes `sigma0_NNN` layers, `manifest.json` and `truth.json`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        write_scene(&self.stack, &self.truth, dir.as_ref(), "sigma0")
    }
}

/// Backscatter stack: `value = mean * X`, `X ~ Gamma(L, 1/L)`, with the mean
/// scaled by `10^(drop_db/10)` inside the footprint from the change date on.
pub fn gen_backscatter_stack(spec: &SarSceneSpec) -> Result<BackscatterScene> {
    spec.validate()?;
    let mask = spec.footprint.mask(&spec.grid);
    let mu_post = spec.mu_pre * 10f64.powf(spec.drop_db / 10.0);
    let speckle = Gamma::new(spec.enl, 1.0 / spec.enl).expect("enl validated");
    let layers: Vec<(NaiveDate, Raster)> = spec
        .dates
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = rng(spec.seed, k as u64 + 1);
            let changed = spec.change_date.is_some_and(|c| t >= c);
            let values = mask
                .iter()
                .map(|&inside| {
                    let mean = if changed && inside { mu_post } else { spec.mu_pre };
                    (mean * speckle.sample(&mut r)).max(f32::MIN_POSITIVE as f64)
                })
                .collect();
            Ok((t, layer(&spec.grid, values, t)?))
        })
        .collect::<Result<_>>()?;
    let footprint_pixels = mask.iter().filter(|&&m| m).count();
    let truth = BackscatterTruth {
        seed: spec.seed,
        dates: spec.dates.clone(),
        change_date: spec.change_date,
        change_index: spec.change_date.and_then(|c| spec.dates.iter().position(|&t| t >= c)),
        footprint_pixels,
        footprint_area_m2: footprint_pixels as f64 * spec.grid.cell_area(),
        mu_pre: spec.mu_pre,
        mu_post,
        drop_db: spec.drop_db,
        enl: spec.enl,
    };
    Ok(BackscatterScene {
        stack: RasterStack::new(layers)?,
        footprint_mask: mask,
        truth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceSceneSpec {
    pub grid: GridSpec,
    /// Later acquisition date of each pair.
    pub pair_dates: Vec<NaiveDate>,
    pub footprint: Footprint,
    /// First high-coherence pair inside the footprint; beyond the last pair
    /// (or `None`) the whole stack stays low.
    pub onset_index: Option<usize>,
    pub pre_mean: f64,
    pub post_mean: f64,
    /// Beta concentration `a + b`.
    pub concentration: f64,
    pub seed: u64,
}

impl Default for CoherenceSceneSpec {
    fn default() -> Self {
        let grid = default_grid(256, 20.0);
        CoherenceSceneSpec {
            footprint: Footprint::pixel_rect(&grid, 100, 80, 60, 100),
            grid,
            pair_dates: cadence(NaiveDate::from_ymd_opt(2018, 1, 13).expect("valid date"), 12, 24),
            onset_index: Some(12),
            pre_mean: 0.25,
            post_mean: 0.8,
            concentration: 20.0,
            seed: 1,
        }
    }
}

impl CoherenceSceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        check_dates(&self.pair_dates)?;
        self.footprint.validate()?;
        for (name, m) in [("pre_mean", self.pre_mean), ("post_mean", self.post_mean)] {
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::InvalidParams(format!("{name} must be in (0, 1), got {m}")));
            }
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InvalidParams("concentration must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTruth {
    pub seed: u64,
    pub pair_dates: Vec<NaiveDate>,
    pub onset_index: Option<usize>,
    pub onset_date: Option<NaiveDate>,
    pub footprint_pixels: usize,
    pub footprint_area_m2: f64,
    pub pre_mean: f64,
    pub post_mean: f64,
    pub footprint: Footprint,
}

#[derive(Debug, Clone)]
pub struct CoherenceScene {
    pub stack: RasterStack,
    pub footprint_mask: Vec<bool>,
    pub truth: CoherenceTruth,
}

impl CoherenceScene {
    /// Writes `coh_NNN` layers, `manifest.json` and `truth.json`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        write_scene(&self.stack, &self.truth, dir.as_ref(), "coh")
    }
}

fn beta_with_mean(mean: f64, concentration: f64) -> Beta<f64> {
    Beta::new(mean * concentration, (1.0 - mean) * concentration).expect("mean and concentration validated")
}

/// Coherence stack: `Beta(m k, (1 - m) k)` draws with `m = pre_mean`, except
/// footprint pixels from the onset pair on, which use `post_mean`.
pub fn gen_coherence_stack(spec: &CoherenceSceneSpec) -> Result<CoherenceScene> {
    spec.validate()?;
    let mask = spec.footprint.mask(&spec.grid);
    let low = beta_with_mean(spec.pre_mean, spec.concentration);
    let high = beta_with_mean(spec.post_mean, spec.concentration);
    let layers: Vec<(NaiveDate, Raster)> = spec
        .pair_dates
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = rng(spec.seed, k as u64 + 1);
            let post = spec.onset_index.is_some_and(|o| k >= o);
            let values = mask
                .iter()
                .map(|&inside| if post && inside { high.sample(&mut r) } else { low.sample(&mut r) })
                .collect();
            Ok((t, layer(&spec.grid, values, t)?))
        })
        .collect::<Result<_>>()?;
    let footprint_pixels = mask.iter().filter(|&&m| m).count();
    let onset_index = spec.onset_index.filter(|&o| o < spec.pair_dates.len());
    let truth = CoherenceTruth {
        seed: spec.seed,
        pair_dates: spec.pair_dates.clone(),
        onset_index,
        onset_date: onset_index.map(|o| spec.pair_dates[o]),
        footprint_pixels,
        footprint_area_m2: footprint_pixels as f64 * spec.grid.cell_area(),
        pre_mean: spec.pre_mean,
        post_mean: spec.post_mean,
        footprint: spec.footprint.clone(),
    };
    Ok(CoherenceScene {
        stack: RasterStack::new(layers)?,
        footprint_mask: mask,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sar() -> SarSceneSpec {
        let grid = default_grid(32, 10.0);
        let dates = cadence(NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(), 12, 6);
        SarSceneSpec {
            footprint: Footprint::pixel_rect(&grid, 4, 4, 8, 8),
            change_date: Some(dates[3]),
            grid,
            dates,
            ..SarSceneSpec::default()
        }
    }

    #[test]
    fn huge_enl_stays_near_the_mean() {
        let s = gen_backscatter_stack(&SarSceneSpec { enl: 1e6, ..small_sar() }).unwrap();
        let mu_post = s.truth.mu_post;
        for (k, r) in s.stack.layers().iter().enumerate() {
            for (i, &v) in r.values().iter().enumerate() {
                let mean = if k >= 3 && s.footprint_mask[i] { mu_post } else { 0.05 };
                assert!((v / mean - 1.0).abs() < 0.01);
            }
        }
        assert_eq!(s.truth.footprint_pixels, 64);
        assert_eq!(s.truth.change_index, Some(3));
    }

    #[test]
    fn backscatter_is_positive_and_deterministic() {
        let a = gen_backscatter_stack(&small_sar()).unwrap();
        let b = gen_backscatter_stack(&small_sar()).unwrap();
        assert_eq!(a.stack, b.stack);
        assert!(a.stack.layers().iter().all(|r| r.values().iter().all(|&v| v > 0.0)));
    }

    #[test]
    fn coherence_bounds_and_modes() {
        let grid = default_grid(16, 20.0);
        let spec = CoherenceSceneSpec {
            footprint: Footprint::pixel_rect(&grid, 0, 0, 16, 16),
            grid,
            pair_dates: cadence(NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), 12, 4),
            onset_index: Some(0),
            ..CoherenceSceneSpec::default()
        };
        let all_high = gen_coherence_stack(&spec).unwrap();
        let mean = |s: &CoherenceScene| {
            let v: Vec<f64> = s.stack.layers().iter().flat_map(|r| r.values().to_vec()).collect();
            assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((mean(&all_high) - 0.8).abs() < 0.03);
        let never = gen_coherence_stack(&CoherenceSceneSpec { onset_index: Some(99), ..spec }).unwrap();
        assert!((mean(&never) - 0.25).abs() < 0.03);
        assert_eq!(never.truth.onset_index, None);
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_backscatter_stack(&SarSceneSpec { mu_pre: 0.0, ..small_sar() }).is_err());
        assert!(gen_backscatter_stack(&SarSceneSpec { enl: 0.5, ..small_sar() }).is_err());
        assert!(gen_coherence_stack(&CoherenceSceneSpec { pre_mean: 1.0, ..CoherenceSceneSpec::default() }).is_err());
    }
}
