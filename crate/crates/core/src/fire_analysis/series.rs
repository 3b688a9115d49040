use chrono::{Datelike, Duration, NaiveDate};

use crate::error::{Error, Result};
use crate::firms::FireDetection;

/// Detection counts for every day of a contiguous date range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyCountSeries {
    start: NaiveDate,
    counts: Vec<u64>,
}

impl DailyCountSeries {
    pub fn new(start: NaiveDate, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InsufficientData("daily series needs at least one day".into()));
        }
        Ok(DailyCountSeries { start, counts })
    }

    #[inline]
    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.start + Duration::days(self.counts.len() as i64 - 1)
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.start + Duration::days(i as i64)
    }

    /// Index of `date`, if covered.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let off = (date - self.start).num_days();
        (off >= 0 && (off as usize) < self.counts.len()).then_some(off as usize)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.index_of(date).is_some()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sum over `first..=last`; both ends must be covered.
    pub fn sum_between(&self, first: NaiveDate, last: NaiveDate) -> Result<u64> {
        match (self.index_of(first), self.index_of(last)) {
            (Some(a), Some(b)) if a <= b => Ok(self.counts[a..=b].iter().sum()),
            (Some(_), Some(_)) => Err(Error::InvertedRange { start: first, end: last }),
            _ => Err(Error::InsufficientData(format!(
                "range {first}..{last} not covered by series {}..{}",
                self.start,
                self.end()
            ))),
        }
    }

    /// Calendar years whose 1 January and 31 December are both covered.
    pub fn full_years(&self) -> Vec<i32> {
        (self.start.year()..=self.end().year())
            .filter(|&y| {
                let jan1 = NaiveDate::from_ymd_opt(y, 1, 1).unwrap();
                let dec31 = NaiveDate::from_ymd_opt(y, 12, 31).unwrap();
                self.contains(jan1) && self.contains(dec31)
            })
            .collect()
    }

    /// `date,count` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(16 * (self.counts.len() + 1));
        s.push_str("date,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.date_at(i), c));
        }
        s
    }
}

/// Per-day detection counts over `start..=end`; detections outside the range
/// are ignored.
pub fn daily_counts(
    detections: &[FireDetection],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<DailyCountSeries> {
    if start > end {
        return Err(Error::InvertedRange { start, end });
    }
    let n = (end - start).num_days() as usize + 1;
    let mut counts = vec![0u64; n];
    for det in detections {
        let off = (det.acq_date - start).num_days();
        if off >= 0 && (off as usize) < n {
            counts[off as usize] += 1;
        }
    }
    DailyCountSeries::new(start, counts)
}
