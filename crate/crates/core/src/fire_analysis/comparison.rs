use chrono::{Duration, NaiveDate};
use serde::Serialize;

use super::season::last_day_of_month;
use super::DailyCountSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    /// Days since the season start.
    pub offset: usize,
    pub date_a: NaiveDate,
    pub count_a: u64,
    pub date_b: NaiveDate,
    pub count_b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailyComparison {
    pub year_a: i32,
    pub year_b: i32,
    pub rows: Vec<ComparisonRow>,
}

impl DailyComparison {
    /// `offset,count_<year_a>,count_<year_b>` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = format!("offset,count_{},count_{}\n", self.year_a, self.year_b);
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.offset, r.count_a, r.count_b));
        }
        s
    }
}

/// Nine-month season starting on the first of `start_month`; with the June
/// default it runs June 1 through the end of February.
fn season_span(year: i32, start_month: u32) -> (NaiveDate, NaiveDate) {
    let start = NaiveDate::from_ymd_opt(year, start_month, 1).expect("valid month");
    let end_month0 = start_month - 1 + 8;
    let (ey, em) = (year + (end_month0 / 12) as i32, end_month0 % 12 + 1);
    let end = NaiveDate::from_ymd_opt(ey, em, last_day_of_month(ey, em)).unwrap();
    (start, end)
}

/// Aligns two seasons day by day from their start; rows stop at the shorter
/// season (a leap-year February adds one day).
pub fn export_daily_comparison(
    series: &DailyCountSeries,
    year_a: i32,
    year_b: i32,
    season_start_month: u32,
) -> Result<DailyComparison> {
    if !(1..=12).contains(&season_start_month) {
        return Err(Error::InvalidParams(format!(
            "season start month {season_start_month} outside 1..12"
        )));
    }
    let (sa, ea) = season_span(year_a, season_start_month);
    let (sb, eb) = season_span(year_b, season_start_month);
    for (s, e) in [(sa, ea), (sb, eb)] {
        if !(series.contains(s) && series.contains(e)) {
            return Err(Error::InsufficientData(format!(
                "season {s}..{e} not covered by series {}..{}",
                series.start(),
                series.end()
            )));
        }
    }
    let n = ((ea - sa).num_days()).min((eb - sb).num_days()) as usize + 1;
    let counts = series.counts();
    let ia = series.index_of(sa).unwrap();
    let ib = series.index_of(sb).unwrap();
    let rows = (0..n)
        .map(|k| ComparisonRow {
            offset: k,
            date_a: sa + Duration::days(k as i64),
            count_a: counts[ia + k],
            date_b: sb + Duration::days(k as i64),
            count_b: counts[ib + k],
        })
        .collect();
    Ok(DailyComparison { year_a, year_b, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn ramp(start: &str, end: &str) -> DailyCountSeries {
        let n = (d(end) - d(start)).num_days() as usize + 1;
        DailyCountSeries::new(d(start), (0..n as u64).collect()).unwrap()
    }

    #[test]
    fn spans_june_through_february_truncated_to_shorter() {
        let s = ramp("2015-01-01", "2018-12-31");
        let c = export_daily_comparison(&s, 2016, 2015, 6).unwrap();
        // 2016-06-01..2017-02-28 is 273 days; 2015-06-01..2016-02-29 is 274.
        assert_eq!(c.rows.len(), 273);
        assert_eq!(c.rows[0].date_a, d("2016-06-01"));
        assert_eq!(c.rows.last().unwrap().date_a, d("2017-02-28"));
        assert_eq!(c.rows.last().unwrap().date_b, d("2016-02-28"));
    }

    #[test]
    fn same_year_gives_identical_columns() {
        let s = ramp("2016-01-01", "2017-12-31");
        let c = export_daily_comparison(&s, 2016, 2016, 6).unwrap();
        assert!(c.rows.iter().all(|r| r.count_a == r.count_b));
        assert!(c.to_csv().starts_with("offset,count_2016,count_2016\n0,"));
    }

    #[test]
    fn uncovered_season_errors() {
        let s = ramp("2016-01-01", "2016-12-31");
        assert!(export_daily_comparison(&s, 2016, 2016, 6).is_err());
    }
}
