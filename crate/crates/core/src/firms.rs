//! FIRMS-style active-fire CSV catalogs.
//!
//! Columns are bound by (case-insensitive) header name, so MODIS and VIIRS
//! exports with different column orders parse the same way. Required columns
//! are `latitude`, `longitude` and `acq_date`; `acq_time`, `confidence`,
//! `instrument` and `satellite` are picked up when present.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NominalConfidence {
    Low,
    Nominal,
    High,
}

impl NominalConfidence {
    /// Numeric stand-in used only for threshold comparisons.
    pub fn as_score(self) -> f64 {
        match self {
            NominalConfidence::Low => 10.0,
            NominalConfidence::Nominal => 50.0,
            NominalConfidence::High => 90.0,
        }
    }
}

/// Detection confidence as reported by the source product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Confidence {
    Numeric(f64),
    Nominal(NominalConfidence),
    Absent,
}

impl Confidence {
    pub fn score(&self) -> Option<f64> {
        match *self {
            Confidence::Numeric(v) => Some(v),
            Confidence::Nominal(n) => Some(n.as_score()),
            Confidence::Absent => None,
        }
    }

    /// Absent confidence passes any threshold.
    pub fn passes(&self, min: f64) -> bool {
        self.score().is_none_or(|s| s >= min)
    }

    fn parse(raw: &str) -> std::result::Result<Self, String> {
        let s = raw.trim();
        if s.is_empty() {
            return Ok(Confidence::Absent);
        }
        match s.to_ascii_lowercase().as_str() {
            "l" | "low" => return Ok(Confidence::Nominal(NominalConfidence::Low)),
            "n" | "nominal" => return Ok(Confidence::Nominal(NominalConfidence::Nominal)),
            "h" | "high" => return Ok(Confidence::Nominal(NominalConfidence::High)),
            _ => {}
        }
        let v: f64 = s.parse().map_err(|_| format!("unrecognised confidence '{s}'"))?;
        if !(0.0..=100.0).contains(&v) {
            return Err(format!("confidence {v} outside 0..100"));
        }
        Ok(Confidence::Numeric(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireDetection {
    pub lat: f64,
    pub lon: f64,
    pub acq_date: NaiveDate,
    /// Minutes past midnight (UTC in FIRMS exports).
    pub acq_time: Option<u16>,
    pub confidence: Confidence,
    pub instrument: String,
    pub satellite: Option<String>,
}

/// Geographic bounding box in degrees; filtering is boundary-inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
}

impl BBox {
    pub fn new(lon_min: f64, lat_min: f64, lon_max: f64, lat_max: f64) -> Result<Self> {
        let b = BBox {
            lon_min,
            lat_min,
            lon_max,
            lat_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lon_min, self.lat_min, self.lon_max, self.lat_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.lon_min >= self.lon_max || self.lat_min >= self.lat_max {
            return Err(Error::InvalidParams(format!(
                "bbox requires lon_min < lon_max and lat_min < lat_max, got {self:?}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        (self.lon_min..=self.lon_max).contains(&lon) && (self.lat_min..=self.lat_max).contains(&lat)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.lon_min + self.lon_max),
            0.5 * (self.lat_min + self.lat_max),
        )
    }
}

impl std::str::FromStr for BBox {
    type Err = Error;

    /// `lon_min,lat_min,lon_max,lat_max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParams(format!("bbox '{s}' is not four numbers")))?;
        match parts[..] {
            [a, b, c, d] => BBox::new(a, b, c, d),
            _ => Err(Error::InvalidParams(format!("bbox '{s}' is not four numbers"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Fail on the first malformed row.
    #[default]
    Strict,
    /// Skip and count malformed rows.
    Lenient,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParseOptions {
    pub bbox: Option<BBox>,
    pub min_confidence: Option<f64>,
    /// Case-insensitive match against the instrument column.
    pub instrument: Option<String>,
    pub mode: ParseMode,
}

/// Parsed catalog with bookkeeping: `detections.len() + filtered + skipped`
/// equals the number of data rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FireCatalog {
    pub detections: Vec<FireDetection>,
    /// Malformed rows dropped in lenient mode.
    pub skipped: usize,
    /// Well-formed rows rejected by the bbox/confidence/instrument filters.
    pub filtered: usize,
}

struct Columns {
    lat: usize,
    lon: usize,
    date: usize,
    time: Option<usize>,
    confidence: Option<usize>,
    instrument: Option<usize>,
    satellite: Option<usize>,
}

impl Columns {
    fn bind(headers: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
        };
        let required = ["latitude", "longitude", "acq_date"];
        let missing: Vec<String> = required
            .iter()
            .filter(|n| find(n).is_none())
            .map(|n| n.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingColumns(missing));
        }
        Ok(Columns {
            lat: find("latitude").unwrap(),
            lon: find("longitude").unwrap(),
            date: find("acq_date").unwrap(),
            time: find("acq_time"),
            confidence: find("confidence"),
            instrument: find("instrument"),
            satellite: find("satellite"),
        })
    }
}

pub fn parse_firms_csv(path: impl AsRef<Path>, options: &ParseOptions) -> Result<FireCatalog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_firms_reader(file, options)
}

pub fn parse_firms_reader<R: Read>(reader: R, options: &ParseOptions) -> Result<FireCatalog> {
    if let Some(b) = &options.bbox {
        b.validate()?;
    }
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::MalformedRow { line: 1, reason: e.to_string() }),
    };
    if headers.is_empty() {
        return Err(Error::MissingColumns(vec![
            "latitude".into(),
            "longitude".into(),
            "acq_date".into(),
        ]));
    }
    let cols = Columns::bind(&headers)?;

    let mut out = FireCatalog::default();
    let mut record = csv::StringRecord::new();
    loop {
        let (line, parsed) = match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                (line, parse_row(&record, &cols))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                (line, Err(e.to_string()))
            }
        };
        match parsed {
            Ok(det) => {
                if keep(&det, options) {
                    out.detections.push(det);
                } else {
                    out.filtered += 1;
                }
            }
            Err(reason) => match options.mode {
                ParseMode::Strict => return Err(Error::MalformedRow { line, reason }),
                ParseMode::Lenient => out.skipped += 1,
            },
        }
    }
    Ok(out)
}

fn keep(det: &FireDetection, options: &ParseOptions) -> bool {
    if let Some(b) = &options.bbox {
        if !b.contains(det.lon, det.lat) {
            return false;
        }
    }
    if let Some(min) = options.min_confidence {
        if !det.confidence.passes(min) {
            return false;
        }
    }
    if let Some(inst) = &options.instrument {
        if !det.instrument.eq_ignore_ascii_case(inst) {
            return false;
        }
    }
    true
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, name: &str) -> std::result::Result<&'a str, String> {
    rec.get(idx)
        .map(str::trim)
        .ok_or_else(|| format!("missing {name} field"))
}

fn optional<'a>(rec: &'a csv::StringRecord, idx: Option<usize>) -> Option<&'a str> {
    idx.and_then(|i| rec.get(i)).map(str::trim).filter(|s| !s.is_empty())
}

fn parse_row(rec: &csv::StringRecord, cols: &Columns) -> std::result::Result<FireDetection, String> {
    let lat: f64 = field(rec, cols.lat, "latitude")?
        .parse()
        .map_err(|_| "latitude is not a number".to_string())?;
    let lon: f64 = field(rec, cols.lon, "longitude")?
        .parse()
        .map_err(|_| "longitude is not a number".to_string())?;
    if !(-90.0..=90.0).contains(&lat) {
        return Err(format!("latitude {lat} outside [-90, 90]"));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(format!("longitude {lon} outside [-180, 180]"));
    }
    let acq_date = parse_date(field(rec, cols.date, "acq_date")?)?;
    let acq_time = optional(rec, cols.time).map(parse_time).transpose()?;
    let confidence = match cols.confidence.and_then(|i| rec.get(i)) {
        Some(raw) => Confidence::parse(raw)?,
        None => Confidence::Absent,
    };
    let instrument = optional(rec, cols.instrument).unwrap_or("UNKNOWN").to_string();
    let satellite = optional(rec, cols.satellite).map(str::to_string);
    Ok(FireDetection {
        lat,
        lon,
        acq_date,
        acq_time,
        confidence,
        instrument,
        satellite,
    })
}

/// Strict `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    let b = s.as_bytes();
    let shape_ok = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shape_ok {
        return Err(format!("date '{s}' is not YYYY-MM-DD"));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("invalid calendar date '{s}'"))
}

/// `HHMM` (with optional leading zeros dropped, as in FIRMS archives) or `HH:MM`.
fn parse_time(s: &str) -> std::result::Result<u16, String> {
    let digits: String = if let Some((h, m)) = s.split_once(':') {
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(format!("acq_time '{s}' is not HHMM"));
        }
        format!("{h:0>2}{m}")
    } else {
        if s.is_empty() || s.len() > 4 {
            return Err(format!("acq_time '{s}' is not HHMM"));
        }
        format!("{s:0>4}")
    };
    if !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(format!("acq_time '{s}' is not HHMM"));
    }
    let hh: u16 = digits[..2].parse().unwrap();
    let mm: u16 = digits[2..].parse().unwrap();
    if hh > 23 || mm > 59 {
        return Err(format!("acq_time '{s}' out of range"));
    }
    Ok(hh * 60 + mm)
}

/// Detections with `start <= acq_date <= end`, in input order.
pub fn filter_by_dates(
    detections: &[FireDetection],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<FireDetection>> {
    if start > end {
        return Err(Error::InvertedRange { start, end });
    }
    Ok(detections
        .iter()
        .filter(|d| (start..=end).contains(&d.acq_date))
        .cloned()
        .collect())
}
