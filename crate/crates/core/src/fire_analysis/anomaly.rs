use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdKind {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyParams {
    pub z_threshold: f64,
    /// Include the scored year in its own mean/std. When false each year is
    /// scored against the other years only.
    pub include_target: bool,
    pub std_kind: StdKind,
}

impl Default for AnomalyParams {
    fn default() -> Self {
        AnomalyParams {
            z_threshold: 2.0,
            include_target: true,
            std_kind: StdKind::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearScore {
    pub year: i32,
    pub count: u64,
    pub z: f64,
    pub flagged: bool,
    /// Leave-one-out reference statistics; only set when `include_target` is false.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub years: Vec<YearScore>,
    /// Mean over all years.
    pub mean: f64,
    /// Standard deviation over all years.
    pub std: f64,
    pub params: AnomalyParams,
}

impl AnomalyReport {
    pub fn flagged_years(&self) -> Vec<i32> {
        self.years.iter().filter(|y| y.flagged).map(|y| y.year).collect()
    }

    pub fn score(&self, year: i32) -> Option<&YearScore> {
        self.years.iter().find(|y| y.year == year)
    }
}

/// Mean and standard deviation, summed left to right.
pub fn mean_std(values: &[f64], kind: StdKind) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match kind {
        StdKind::Population => n,
        StdKind::Sample => n - 1.0,
    };
    let std = if denom > 0.0 { (ss / denom).sqrt() } else { 0.0 };
    (mean, std)
}

/// `(count - mean) / std`, or 0 when `std` is 0.
#[inline]
pub fn zscore(count: f64, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        (count - mean) / std
    } else {
        0.0
    }
}

/// Scores every year's off-season count against the cross-year distribution.
pub fn anomaly_zscores(yearly: &BTreeMap<i32, u64>, params: &AnomalyParams) -> Result<AnomalyReport> {
    if yearly.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "anomaly scoring needs at least 2 years, got {}",
            yearly.len()
        )));
    }
    if !params.z_threshold.is_finite() {
        return Err(Error::InvalidParams("z_threshold must be finite".into()));
    }
    let counts: Vec<f64> = yearly.values().map(|&c| c as f64).collect();
    let (mean, std) = mean_std(&counts, params.std_kind);

    let years = yearly
        .iter()
        .enumerate()
        .map(|(i, (&year, &count))| {
            let (m, s, reference) = if params.include_target {
                (mean, std, false)
            } else {
                let others: Vec<f64> = counts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v)
                    .collect();
                let (m, s) = mean_std(&others, params.std_kind);
                (m, s, true)
            };
            let z = zscore(count as f64, m, s);
            YearScore {
                year,
                count,
                z,
                flagged: s > 0.0 && z >= params.z_threshold,
                reference_mean: reference.then_some(m),
                reference_std: reference.then_some(s),
            }
        })
        .collect();

    Ok(AnomalyReport {
        years,
        mean,
        std,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn yearly(counts: &[u64]) -> BTreeMap<i32, u64> {
        counts.iter().enumerate().map(|(i, &c)| (2012 + i as i32, c)).collect()
    }

    #[test]
    fn reported_yearly_statistics() {
        // Mean 29.75 with the target count 167 and the std implied by z = 2.7.
        let std = (167.0 - 29.75) / 2.7;
        assert!((std - 50.83_f64).abs() < 0.005);
        assert!((zscore(167.0, 29.75, 50.83) - 2.70).abs() < 0.01);
    }

    #[test]
    fn equal_years_score_zero() {
        let r = anomaly_zscores(&yearly(&[12, 12, 12, 12]), &AnomalyParams::default()).unwrap();
        assert!(r.years.iter().all(|y| y.z == 0.0 && !y.flagged));
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn matches_exact_integer_oracle() {
        // z_i = (N c_i - S) / sqrt(N Q - S^2) for population std; evaluated in
        // integer arithmetic up to the final division.
        let c: [i64; 6] = [10, 8, 12, 167, 9, 5];
        let n = c.len() as i64;
        let s: i64 = c.iter().sum();
        let q: i64 = c.iter().map(|v| v * v).sum();
        let denom = ((n * q - s * s) as f64).sqrt();
        let r = anomaly_zscores(&yearly(&[10, 8, 12, 167, 9, 5]), &AnomalyParams::default()).unwrap();
        assert!((r.mean - s as f64 / n as f64).abs() <= 1e-12 * r.mean);
        assert!((r.std - denom / n as f64).abs() <= 1e-12 * r.std);
        for (score, &ci) in r.years.iter().zip(&c) {
            let want = (n * ci - s) as f64 / denom;
            assert!((score.z - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {want}", score.z);
        }
        assert_eq!(r.flagged_years(), vec![2015]);
    }

    #[test]
    fn leave_one_out_excludes_target() {
        let params = AnomalyParams {
            include_target: false,
            ..Default::default()
        };
        let r = anomaly_zscores(&yearly(&[10, 12, 14, 100]), &params).unwrap();
        let s = r.score(2015).unwrap();
        assert_eq!(s.reference_mean, Some(12.0));
        let want = (100.0 - 12.0) / (8.0f64 / 3.0).sqrt();
        assert!((s.z - want).abs() < 1e-12);
        assert!(s.flagged);
    }

    #[test]
    fn needs_two_years() {
        assert!(anomaly_zscores(&yearly(&[5]), &AnomalyParams::default()).is_err());
    }

    proptest! {
        #[test]
        fn scaling_leaves_z_unchanged(counts in prop::collection::vec(0u64..500, 2..9), lambda in 1u64..20) {
            let a = anomaly_zscores(&yearly(&counts), &AnomalyParams::default()).unwrap();
            let scaled: Vec<u64> = counts.iter().map(|c| c * lambda).collect();
            let b = anomaly_zscores(&yearly(&scaled), &AnomalyParams::default()).unwrap();
            for (x, y) in a.years.iter().zip(&b.years) {
                prop_assert!((x.z - y.z).abs() < 1e-9);
            }
        }

        #[test]
        fn constant_shift_keeps_argmax(counts in prop::collection::vec(0u64..500, 2..9), k in 0u64..1000) {
            let argmax = |r: &AnomalyReport| {
                r.years.iter().fold((i32::MIN, f64::NEG_INFINITY), |acc, y| if y.z > acc.1 { (y.year, y.z) } else { acc }).0
            };
            let a = anomaly_zscores(&yearly(&counts), &AnomalyParams::default()).unwrap();
            let shifted: Vec<u64> = counts.iter().map(|c| c + k).collect();
            let b = anomaly_zscores(&yearly(&shifted), &AnomalyParams::default()).unwrap();
            prop_assume!(a.std > 0.0);
            // The maximum count is unique up to ties; compare counts at the argmax.
            let ca = a.score(argmax(&a)).unwrap().count;
            let cb = b.score(argmax(&b)).unwrap().count;
            prop_assert_eq!(ca + k, cb);
        }

        #[test]
        fn flags_follow_threshold(counts in prop::collection::vec(0u64..500, 2..9), thr in -1.0f64..3.0) {
            let params = AnomalyParams { z_threshold: thr, ..Default::default() };
            let r = anomaly_zscores(&yearly(&counts), &params).unwrap();
            for y in &r.years {
                prop_assert_eq!(y.flagged, r.std > 0.0 && y.z >= thr);
            }
        }
    }
}
