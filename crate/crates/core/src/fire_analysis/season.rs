//! Off-season (non-agricultural) windows: fixed month ranges or windows found
//! from the quiet gaps in the daily detection series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DailyCountSeries;
use crate::error::{Error, Result};

/// Calendar day without a year. Days past the end of a month clamp to its
/// last day when placed in a year (so `02-29` is 28 February in common years).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub fn new(month: u32, day: u32) -> Result<Self> {
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return Err(Error::InvalidParams(format!("invalid month-day {month:02}-{day:02}")));
        }
        Ok(MonthDay { month, day })
    }

    pub fn of(date: NaiveDate) -> Self {
        MonthDay {
            month: date.month(),
            day: date.day(),
        }
    }

    pub fn in_year(self, year: i32) -> NaiveDate {
        let last = last_day_of_month(year, self.month);
        NaiveDate::from_ymd_opt(year, self.month, self.day.min(last)).expect("clamped date is valid")
    }
}

pub(crate) fn last_day_of_month(year: i32, month: u32) -> u32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    NaiveDate::from_ymd_opt(ny, nm, 1)
        .and_then(|d| d.pred_opt())
        .map(|d| d.day())
        .expect("valid month")
}

impl fmt::Display for MonthDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

impl FromStr for MonthDay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, d) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidParams(format!("month-day '{s}' is not MM-DD")))?;
        let m = m.parse().map_err(|_| Error::InvalidParams(format!("bad month in '{s}'")))?;
        let d = d.parse().map_err(|_| Error::InvalidParams(format!("bad day in '{s}'")))?;
        MonthDay::new(m, d)
    }
}

impl Serialize for MonthDay {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthDay {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive month range within one calendar year, e.g. June..October.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub first: u32,
    pub last: u32,
}

impl MonthRange {
    pub fn new(first: u32, last: u32) -> Result<Self> {
        if !(1..=12).contains(&first) || !(1..=12).contains(&last) || first > last {
            return Err(Error::InvalidParams(format!(
                "month range {first}..{last} must satisfy 1 <= first <= last <= 12"
            )));
        }
        Ok(MonthRange { first, last })
    }

    pub fn start(&self) -> MonthDay {
        MonthDay { month: self.first, day: 1 }
    }

    pub fn end(&self) -> MonthDay {
        MonthDay { month: self.last, day: 31 }
    }
}

impl Default for MonthRange {
    /// June through October inclusive.
    fn default() -> Self {
        MonthRange { first: 6, last: 10 }
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    /// `6-10` or `6..10`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .or_else(|| s.split_once('-'))
            .ok_or_else(|| Error::InvalidParams(format!("month range '{s}' is not FIRST-LAST")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParams(format!("bad month in '{s}'")))
        };
        MonthRange::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeasonMode {
    Fixed,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonWindow {
    pub first: NaiveDate,
    pub last: NaiveDate,
    /// Set when no quiet run qualified and the fixed window was used instead.
    pub fallback: bool,
}

impl SeasonWindow {
    pub fn len_days(&self) -> i64 {
        (self.last - self.first).num_days() + 1
    }
}

/// One off-season window per calendar year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffSeasonWindows {
    pub mode: SeasonMode,
    pub windows: BTreeMap<i32, SeasonWindow>,
}

impl OffSeasonWindows {
    /// The same `start..=end` window in every year of `years`.
    pub fn uniform(
        years: impl IntoIterator<Item = i32>,
        start: MonthDay,
        end: MonthDay,
        mode: SeasonMode,
    ) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidParams(format!(
                "off-season {start}..{end} must lie within one calendar year"
            )));
        }
        let windows = years
            .into_iter()
            .map(|y| {
                (
                    y,
                    SeasonWindow {
                        first: start.in_year(y),
                        last: end.in_year(y),
                        fallback: false,
                    },
                )
            })
            .collect();
        Ok(OffSeasonWindows { mode, windows })
    }

    /// Fixed month window for every year whose window lies inside the series.
    pub fn fixed(series: &DailyCountSeries, months: MonthRange) -> Result<Self> {
        let years = (series.start().year()..=series.end().year()).filter(|&y| {
            series.contains(months.start().in_year(y)) && series.contains(months.end().in_year(y))
        });
        let w = OffSeasonWindows::uniform(years, months.start(), months.end(), SeasonMode::Fixed)?;
        if w.windows.is_empty() {
            return Err(Error::InsufficientData(
                "series covers no complete off-season window".into(),
            ));
        }
        Ok(w)
    }

    /// Median start and end month-days over the non-fallback windows (lower
    /// median for even counts). `None` when every window fell back or the
    /// medians cross.
    pub fn consensus(&self) -> Option<(MonthDay, MonthDay)> {
        let mut starts: Vec<MonthDay> = Vec::new();
        let mut ends: Vec<MonthDay> = Vec::new();
        for w in self.windows.values().filter(|w| !w.fallback) {
            starts.push(MonthDay::of(w.first));
            ends.push(MonthDay::of(w.last));
        }
        if starts.is_empty() {
            return None;
        }
        starts.sort();
        ends.sort();
        let mid = (starts.len() - 1) / 2;
        let (s, e) = (starts[mid], ends[mid]);
        (s <= e).then_some((s, e))
    }

    /// Applies [`consensus`](Self::consensus) to every year; years without a
    /// usable consensus keep the `fallback` window.
    pub fn consensus_windows(&self, fallback: MonthRange) -> Result<Self> {
        let years = self.windows.keys().copied();
        match self.consensus() {
            Some((s, e)) => OffSeasonWindows::uniform(years, s, e, SeasonMode::Auto),
            None => {
                let mut w =
                    OffSeasonWindows::uniform(years, fallback.start(), fallback.end(), SeasonMode::Auto)?;
                w.windows.values_mut().for_each(|w| w.fallback = true);
                Ok(w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoSeasonParams {
    /// Shortest quiet run accepted as an off-season.
    pub min_gap_days: usize,
    /// Odd width of the centered moving sum.
    pub smooth_window: usize,
    /// Moving-sum level regarded as quiet.
    pub eps: f64,
    /// Window used for years without a qualifying run.
    pub fallback: MonthRange,
}

impl Default for AutoSeasonParams {
    fn default() -> Self {
        AutoSeasonParams {
            min_gap_days: 14,
            smooth_window: 7,
            eps: 0.0,
            fallback: MonthRange::default(),
        }
    }
}

/// Finds each full calendar year's off-season as its longest quiet run.
///
/// A day is quiet when the centered moving sum of width `smooth_window`
/// (clipped at the series ends) is `<= eps`. Each quiet run is widened by the
/// smoothing half-width on both sides, which recovers the raw zero-run exactly
/// when `eps == 0`, then clipped to the year. The longest widened run of at
/// least `min_gap_days` days wins, earliest first on ties.
pub fn detect_off_season(series: &DailyCountSeries, params: &AutoSeasonParams) -> Result<OffSeasonWindows> {
    if params.smooth_window == 0 || params.smooth_window % 2 == 0 {
        return Err(Error::InvalidParams(format!(
            "smooth_window must be odd and positive, got {}",
            params.smooth_window
        )));
    }
    if params.min_gap_days == 0 {
        return Err(Error::InvalidParams("min_gap_days must be >= 1".into()));
    }
    let years = series.full_years();
    if years.is_empty() {
        return Err(Error::InsufficientData(format!(
            "series {}..{} spans no full calendar year",
            series.start(),
            series.end()
        )));
    }

    let half = params.smooth_window / 2;
    let counts = series.counts();
    let n = counts.len();
    let mut prefix = vec![0u64; n + 1];
    for (i, &c) in counts.iter().enumerate() {
        prefix[i + 1] = prefix[i] + c;
    }
    let quiet: Vec<bool> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            ((prefix[hi + 1] - prefix[lo]) as f64) <= params.eps
        })
        .collect();

    let mut windows = BTreeMap::new();
    for year in years {
        let y0 = series.index_of(NaiveDate::from_ymd_opt(year, 1, 1).unwrap()).unwrap();
        let y1 = series.index_of(NaiveDate::from_ymd_opt(year, 12, 31).unwrap()).unwrap();
        let mut best: Option<(usize, usize)> = None;
        let mut i = y0;
        while i <= y1 {
            if !quiet[i] {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < y1 && quiet[j + 1] {
                j += 1;
            }
            let a = i.saturating_sub(half).max(y0);
            let b = (j + half).min(y1);
            let len = b - a + 1;
            if len >= params.min_gap_days && best.is_none_or(|(ba, bb)| len > bb - ba + 1) {
                best = Some((a, b));
            }
            i = j + 1;
        }
        let window = match best {
            Some((a, b)) => SeasonWindow {
                first: series.date_at(a),
                last: series.date_at(b),
                fallback: false,
            },
            None => SeasonWindow {
                first: params.fallback.start().in_year(year),
                last: params.fallback.end().in_year(year),
                fallback: true,
            },
        };
        windows.insert(year, window);
    }
    Ok(OffSeasonWindows {
        mode: SeasonMode::Auto,
        windows,
    })
}

/// Total detections inside each year's window.
pub fn off_season_counts(
    series: &DailyCountSeries,
    windows: &OffSeasonWindows,
) -> Result<BTreeMap<i32, u64>> {
    windows
        .windows
        .iter()
        .map(|(&y, w)| series.sum_between(w.first, w.last).map(|c| (y, c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn series_from(start: &str, end: &str, mut f: impl FnMut(NaiveDate) -> u64) -> DailyCountSeries {
        let start = d(start);
        let n = (d(end) - start).num_days() as usize + 1;
        let counts = (0..n).map(|i| f(start + Duration::days(i as i64))).collect();
        DailyCountSeries::new(start, counts).unwrap()
    }

    #[test]
    fn month_day_clamps_and_parses() {
        let md: MonthDay = "02-29".parse().unwrap();
        assert_eq!(md.in_year(2017), d("2017-02-28"));
        assert_eq!(md.in_year(2016), d("2016-02-29"));
        assert!("13-01".parse::<MonthDay>().is_err());
        assert_eq!("6-10".parse::<MonthRange>().unwrap(), MonthRange::default());
        assert!("10-6".parse::<MonthRange>().is_err());
    }

    #[test]
    fn exact_zero_block_is_recovered_with_smoothing() {
        let s = series_from("2014-01-01", "2016-12-31", |t| {
            if (6..=10).contains(&t.month()) { 0 } else { 3 }
        });
        let w = detect_off_season(&s, &AutoSeasonParams::default()).unwrap();
        for y in 2014..=2016 {
            let win = w.windows[&y];
            assert_eq!(win.first, NaiveDate::from_ymd_opt(y, 6, 1).unwrap());
            assert_eq!(win.last, NaiveDate::from_ymd_opt(y, 10, 31).unwrap());
            assert!(!win.fallback);
        }
    }

    #[test]
    fn busy_series_falls_back_every_year() {
        let s = series_from("2014-01-01", "2015-12-31", |_| 1);
        let w = detect_off_season(&s, &AutoSeasonParams::default()).unwrap();
        assert_eq!(w.windows.len(), 2);
        for win in w.windows.values() {
            assert!(win.fallback);
            assert_eq!(MonthDay::of(win.first), MonthDay::new(6, 1).unwrap());
            assert_eq!(MonthDay::of(win.last), MonthDay::new(10, 31).unwrap());
        }
        assert_eq!(w.consensus(), None);
    }

    #[test]
    fn short_series_is_rejected() {
        let s = series_from("2014-02-01", "2015-01-31", |_| 0);
        assert!(matches!(
            detect_off_season(&s, &AutoSeasonParams::default()),
            Err(Error::InsufficientData(_))
        ));
        let even = AutoSeasonParams {
            smooth_window: 4,
            ..Default::default()
        };
        assert!(detect_off_season(&s, &even).is_err());
    }

    #[test]
    fn counts_inside_fixed_windows() {
        let s = series_from("2015-01-01", "2017-12-31", |t| u64::from(t == d("2017-07-04")));
        let w = OffSeasonWindows::fixed(&s, MonthRange::default()).unwrap();
        let counts = off_season_counts(&s, &w).unwrap();
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), vec![(2015, 0), (2016, 0), (2017, 1)]);
    }

    #[test]
    fn fixed_windows_skip_uncovered_years() {
        let s = series_from("2015-07-01", "2016-12-31", |_| 0);
        let w = OffSeasonWindows::fixed(&s, MonthRange::default()).unwrap();
        assert_eq!(w.windows.keys().copied().collect::<Vec<_>>(), vec![2016]);
    }

    #[test]
    fn consensus_uses_median_and_ignores_outlier_year() {
        let s = series_from("2014-01-01", "2016-12-31", |t| {
            let quiet = (MonthDay::new(6, 15).unwrap()..=MonthDay::new(9, 30).unwrap())
                .contains(&MonthDay::of(t));
            let burst = t.year() == 2015 && t >= d("2015-08-25");
            if quiet && !burst { 0 } else { 2 }
        });
        let w = detect_off_season(&s, &AutoSeasonParams::default()).unwrap();
        assert_eq!(w.windows[&2015].last, d("2015-08-24"));
        let (a, b) = w.consensus().unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("06-15".into(), "09-30".into()));
        let c = w.consensus_windows(MonthRange::default()).unwrap();
        assert_eq!(c.windows[&2015].last, d("2015-09-30"));
    }

    // Longest zero-run per year, brute force.
    fn brute_zero_runs(s: &DailyCountSeries, min_gap: usize) -> BTreeMap<i32, Option<(NaiveDate, NaiveDate)>> {
        let mut out = BTreeMap::new();
        for y in s.full_years() {
            let days: Vec<NaiveDate> = (0..s.len()).map(|i| s.date_at(i)).filter(|t| t.year() == y).collect();
            let mut best: Option<(NaiveDate, NaiveDate)> = None;
            for (ai, &a) in days.iter().enumerate() {
                for &b in &days[ai..] {
                    let all_zero = (0..=(b - a).num_days())
                        .all(|k| s.counts()[s.index_of(a + Duration::days(k)).unwrap()] == 0);
                    if !all_zero {
                        break;
                    }
                    let len = (b - a).num_days() as usize + 1;
                    if len >= min_gap && best.is_none_or(|(x, z)| len > (z - x).num_days() as usize + 1) {
                        best = Some((a, b));
                    }
                }
            }
            out.insert(y, best);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unsmoothed_detection_equals_maximal_zero_runs(
            seed in any::<u64>(),
            zero_bias in 1u64..6,
            min_gap in 1usize..10,
        ) {
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            let s = series_from("2015-11-20", "2017-12-31", |_| {
                let r = next();
                if r % (zero_bias + 1) != 0 { 0 } else { r % 4 }
            });
            let params = AutoSeasonParams { min_gap_days: min_gap, smooth_window: 1, eps: 0.0, ..Default::default() };
            let got = detect_off_season(&s, &params).unwrap();
            let want = brute_zero_runs(&s, min_gap);
            for (y, w) in &got.windows {
                match want[y] {
                    Some((a, b)) => {
                        prop_assert!(!w.fallback);
                        prop_assert_eq!((w.first, w.last), (a, b));
                    }
                    None => prop_assert!(w.fallback),
                }
            }
        }
    }
}
