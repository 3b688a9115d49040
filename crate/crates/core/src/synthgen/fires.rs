use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::rng;
use super::settlements::gen_settlements;
use crate::error::{Error, Result};
use crate::fire_analysis::MonthDay;
use crate::firms::BBox;
use crate::geodata::io::{create_parent, write_json};
use crate::spatial_stats::EARTH_RADIUS_M;

/// Where the anomaly's settlement centers come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettlementSource {
    /// Same draw as `gen_settlements(n, bbox, seed)`.
    Generated { n: usize, seed: u64 },
    Explicit(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalySpec {
    pub year: i32,
    pub start: MonthDay,
    pub end: MonthDay,
    /// Exact number of injected events, spread uniformly over the window.
    pub count: u64,
    pub settlements: SettlementSource,
    pub sigma_anom_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FireSceneSpec {
    pub bbox: BBox,
    pub start_year: i32,
    pub years: u32,
    /// Mean daily detections in `peak_months`.
    pub peak_rate: f64,
    pub peak_months: Vec<u32>,
    /// Mean daily detections outside the peak months and the quiet window.
    pub shoulder_rate: f64,
    /// Inclusive zero-rate window, every year.
    pub quiet_start: MonthDay,
    pub quiet_end: MonthDay,
    /// Agricultural cluster centers `(lon, lat)`.
    pub agri_centers: Vec<[f64; 2]>,
    pub sigma_agri_m: f64,
    /// Share of detections labelled VIIRS; the rest are MODIS.
    pub viirs_fraction: f64,
    pub anomaly: Option<AnomalySpec>,
    pub seed: u64,
}

impl Default for FireSceneSpec {
    fn default() -> Self {
        FireSceneSpec {
            bbox: BBox {
                lon_min: 92.2,
                lat_min: 20.3,
                lon_max: 92.8,
                lat_max: 21.3,
            },
            start_year: 2014,
            years: 6,
            peak_rate: 10.0,
            peak_months: vec![11, 12, 1, 2, 3, 4],
            shoulder_rate: 2.0,
            quiet_start: MonthDay { month: 6, day: 15 },
            quiet_end: MonthDay { month: 9, day: 30 },
            agri_centers: vec![
                [92.28, 21.18],
                [92.35, 20.42],
                [92.72, 20.55],
                [92.68, 21.05],
                [92.45, 20.70],
                [92.30, 20.85],
            ],
            sigma_agri_m: 4000.0,
            viirs_fraction: 0.5,
            anomaly: Some(AnomalySpec {
                year: 2017,
                start: MonthDay { month: 8, day: 25 },
                end: MonthDay { month: 10, day: 31 },
                count: 167,
                settlements: SettlementSource::Generated { n: 25, seed: 7 },
                sigma_anom_m: 600.0,
            }),
            seed: 42,
        }
    }
}

impl FireSceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.years == 0 {
            return bad("years must be >= 1");
        }
        if !(self.peak_rate >= 0.0 && self.shoulder_rate >= 0.0 && self.peak_rate.is_finite() && self.shoulder_rate.is_finite()) {
            return bad("rates must be finite and >= 0");
        }
        if self.peak_months.iter().any(|m| !(1..=12).contains(m)) {
            return bad("peak months must be 1..=12");
        }
        if !(self.sigma_agri_m > 0.0 && self.sigma_agri_m.is_finite()) {
            return bad("sigma_agri_m must be > 0");
        }
        if !(0.0..=1.0).contains(&self.viirs_fraction) {
            return bad("viirs_fraction must be in [0, 1]");
        }
        if self.agri_centers.is_empty() && (self.peak_rate > 0.0 || self.shoulder_rate > 0.0) {
            return bad("non-zero rates need at least one agricultural center");
        }
        if let Some(a) = &self.anomaly {
            if a.year < self.start_year || a.year >= self.start_year + self.years as i32 {
                return bad("anomaly year outside the catalog span");
            }
            if a.start.in_year(a.year) > a.end.in_year(a.year) {
                return bad("anomaly window ends before it starts");
            }
            if !(a.sigma_anom_m > 0.0 && a.sigma_anom_m.is_finite()) {
                return bad("sigma_anom_m must be > 0");
            }
            if let SettlementSource::Explicit(c) = &a.settlements {
                if c.is_empty() && a.count > 0 {
                    return bad("anomaly needs at least one settlement center");
                }
            }
            if let SettlementSource::Generated { n: 0, .. } = a.settlements {
                if a.count > 0 {
                    return bad("anomaly needs at least one settlement center");
                }
            }
        }
        Ok(())
    }

    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.start_year, 1, 1).expect("valid year")
    }

    pub fn last_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.start_year + self.years as i32 - 1, 12, 31).expect("valid year")
    }

    /// Mean daily count of agricultural detections on `date`.
    pub fn rate_on(&self, date: NaiveDate) -> f64 {
        let y = date.year();
        if date >= self.quiet_start.in_year(y) && date <= self.quiet_end.in_year(y) {
            0.0
        } else if self.peak_months.contains(&date.month()) {
            self.peak_rate
        } else {
            self.shoulder_rate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventClass {
    Agricultural,
    Anomalous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayTruth {
    pub date: NaiveDate,
    pub agricultural: u64,
    pub anomalous: u64,
}

/// One CSV data row; `row` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTruth {
    pub row: usize,
    pub class: EventClass,
    pub in_bbox: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyTruth {
    pub year: i32,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub count: u64,
    /// Agricultural detections that fall inside the anomaly window.
    pub background_in_window: u64,
    pub settlement_centers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireTruth {
    pub seed: u64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub total: u64,
    pub agricultural_total: u64,
    pub anomalous_total: u64,
    pub in_bbox_total: u64,
    pub quiet_start: MonthDay,
    pub quiet_end: MonthDay,
    pub anomaly: Option<AnomalyTruth>,
    pub daily: Vec<DayTruth>,
    pub events: Vec<EventTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FireScene {
    /// FIRMS-style CSV text.
    pub csv: String,
    /// `(lon, lat)` of each data row as written.
    pub points: Vec<(f64, f64)>,
    pub truth: FireTruth,
}

impl FireScene {
    /// Writes `fires.csv` and `truth.json`; returns the CSV path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let csv = dir.join("fires.csv");
        create_parent(&csv)?;
        std::fs::write(&csv, &self.csv).map_err(|e| Error::io(&csv, e))?;
        write_json(&dir.join("truth.json"), &self.truth)?;
        Ok(csv)
    }

    pub fn points_of(&self, class: EventClass) -> Vec<(f64, f64)> {
        self.truth
            .events
            .iter()
            .filter(|e| e.class == class)
            .map(|e| self.points[e.row - 1])
            .collect()
    }
}

struct Draft {
    date: NaiveDate,
    minutes: u16,
    lon: f64,
    lat: f64,
    class: EventClass,
    viirs: bool,
    confidence: u8,
}

fn scatter(r: &mut ChaCha8Rng, center: [f64; 2], sigma_m: f64) -> (f64, f64) {
    let n = Normal::new(0.0, sigma_m).expect("sigma validated");
    let (dx, dy) = (n.sample(r), n.sample(r));
    let lat = center[1] + (dy / EARTH_RADIUS_M).to_degrees();
    let lon = center[0] + (dx / (EARTH_RADIUS_M * center[1].to_radians().cos())).to_degrees();
    // Written with five decimals; keep the in-memory value identical.
    let round = |v: f64| format!("{v:.5}").parse::<f64>().expect("formatted float");
    (round(lon.clamp(-180.0, 180.0)), round(lat.clamp(-90.0, 90.0)))
}

fn draft(r: &mut ChaCha8Rng, spec: &FireSceneSpec, date: NaiveDate, center: [f64; 2], sigma: f64, class: EventClass) -> Draft {
    let (lon, lat) = scatter(r, center, sigma);
    let viirs = r.random_bool(spec.viirs_fraction);
    Draft {
        date,
        minutes: r.random_range(0..1440),
        lon,
        lat,
        class,
        viirs,
        confidence: if viirs { r.random_range(0..2) } else { r.random_range(50..=100) },
    }
}

/// Generates a FIRMS-format catalog. Agricultural counts are Poisson per
/// day; the anomaly injects exactly `count` events on uniformly drawn days.
pub fn gen_fire_catalog(spec: &FireSceneSpec) -> Result<FireScene> {
    spec.validate()?;
    let (first, last) = (spec.first_day(), spec.last_day());
    let days: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).collect();

    let mut drafts = Vec::new();
    let mut agri = rng(spec.seed, 1);
    for &day in &days {
        let rate = spec.rate_on(day);
        if rate <= 0.0 {
            continue;
        }
        let n = Poisson::new(rate).expect("positive rate").sample(&mut agri) as u64;
        for _ in 0..n {
            let center = *spec.agri_centers.choose(&mut agri).expect("centers validated");
            drafts.push(draft(&mut agri, spec, day, center, spec.sigma_agri_m, EventClass::Agricultural));
        }
    }

    let mut anomaly_truth = None;
    if let Some(a) = &spec.anomaly {
        let centers: Vec<[f64; 2]> = match &a.settlements {
            SettlementSource::Generated { n, seed } => gen_settlements(*n, &spec.bbox, *seed)?
                .into_iter()
                .map(|(x, y)| [x, y])
                .collect(),
            SettlementSource::Explicit(c) => c.clone(),
        };
        let (start, end) = (a.start.in_year(a.year), a.end.in_year(a.year));
        let span = (end - start).num_days() + 1;
        let mut anom = rng(spec.seed, 2);
        for _ in 0..a.count {
            let day = start + chrono::Duration::days(anom.random_range(0..span));
            let center = *centers.choose(&mut anom).expect("centers validated");
            drafts.push(draft(&mut anom, spec, day, center, a.sigma_anom_m, EventClass::Anomalous));
        }
        let background = drafts
            .iter()
            .filter(|d| d.class == EventClass::Agricultural && d.date >= start && d.date <= end)
            .count() as u64;
        anomaly_truth = Some(AnomalyTruth {
            year: a.year,
            start,
            end,
            count: a.count,
            background_in_window: background,
            settlement_centers: centers,
        });
    }

    // Stable sort keeps generation order among equal timestamps.
    drafts.sort_by_key(|d| (d.date, d.minutes));

    let mut csv = String::from("latitude,longitude,acq_date,acq_time,satellite,instrument,confidence\n");
    let mut events = Vec::with_capacity(drafts.len());
    let mut points = Vec::with_capacity(drafts.len());
    let mut daily: Vec<DayTruth> = days
        .iter()
        .map(|&date| DayTruth { date, agricultural: 0, anomalous: 0 })
        .collect();
    for (k, d) in drafts.iter().enumerate() {
        let (satellite, instrument, confidence) = if d.viirs {
            ("N", "VIIRS", if d.confidence == 0 { "n".to_string() } else { "h".to_string() })
        } else {
            (if d.minutes < 720 { "Terra" } else { "Aqua" }, "MODIS", d.confidence.to_string())
        };
        csv.push_str(&format!(
            "{:.5},{:.5},{},{:02}{:02},{},{},{}\n",
            d.lat,
            d.lon,
            d.date,
            d.minutes / 60,
            d.minutes % 60,
            satellite,
            instrument,
            confidence
        ));
        points.push((d.lon, d.lat));
        events.push(EventTruth {
            row: k + 1,
            class: d.class,
            in_bbox: spec.bbox.contains(d.lon, d.lat),
        });
        let day = &mut daily[(d.date - first).num_days() as usize];
        match d.class {
            EventClass::Agricultural => day.agricultural += 1,
            EventClass::Anomalous => day.anomalous += 1,
        }
    }

    let count = |c: EventClass| events.iter().filter(|e| e.class == c).count() as u64;
    let truth = FireTruth {
        seed: spec.seed,
        start: first,
        end: last,
        total: events.len() as u64,
        agricultural_total: count(EventClass::Agricultural),
        anomalous_total: count(EventClass::Anomalous),
        in_bbox_total: events.iter().filter(|e| e.in_bbox).count() as u64,
        quiet_start: spec.quiet_start,
        quiet_end: spec.quiet_end,
        anomaly: anomaly_truth,
        daily,
        events,
    };
    Ok(FireScene { csv, points, truth })
}
