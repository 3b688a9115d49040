//! Mutual information between two co-registered rasters via the joint
//! histogram of their binned cell values:
//!
//! `I(A;B) = sum_x sum_y p(x,y) ln( p(x,y) / (p_A(x) p_B(y)) )`
//!
//! Each raster is binned into equal-width bins over its own value range; a
//! constant raster occupies a single bin. Results are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::Raster;

pub const DEFAULT_BINS: usize = 32;

/// Equal-width bin index of every valid cell (`None` at nodata).
pub fn bin_values(r: &Raster, bins: usize) -> Result<Vec<Option<usize>>> {
    if bins == 0 {
        return Err(Error::InvalidParams("bin count must be >= 1".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in (0..r.values().len()).filter_map(|i| r.get(i)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    Ok((0..r.values().len())
        .map(|i| {
            r.get(i).map(|v| {
                if span > 0.0 {
                    (((v - lo) / span * bins as f64).floor() as usize).min(bins - 1)
                } else {
                    0
                }
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub bins_a: usize,
    pub bins_b: usize,
    /// Cell-pair counts, row-major `bins_a × bins_b`.
    pub counts: Vec<u64>,
    /// `counts / total`.
    pub joint: Vec<f64>,
    /// Row sums of `joint`.
    pub marginal_a: Vec<f64>,
    /// Column sums of `joint`.
    pub marginal_b: Vec<f64>,
    pub total: u64,
}

impl JointHistogram {
    fn from_counts(bins_a: usize, bins_b: usize, counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData("no co-located valid cells".into()));
        }
        let n = total as f64;
        let joint: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let mut marginal_a = vec![0.0; bins_a];
        let mut marginal_b = vec![0.0; bins_b];
        for x in 0..bins_a {
            for y in 0..bins_b {
                let p = joint[x * bins_b + y];
                marginal_a[x] += p;
                marginal_b[y] += p;
            }
        }
        Ok(JointHistogram {
            bins_a,
            bins_b,
            counts,
            joint,
            marginal_a,
            marginal_b,
            total,
        })
    }

    fn row_counts(&self) -> Vec<u64> {
        (0..self.bins_a)
            .map(|x| self.counts[x * self.bins_b..(x + 1) * self.bins_b].iter().sum())
            .collect()
    }

    fn col_counts(&self) -> Vec<u64> {
        (0..self.bins_b)
            .map(|y| (0..self.bins_a).map(|x| self.counts[x * self.bins_b + y]).sum())
            .collect()
    }

    /// Mutual information in nats. Each term is evaluated from integer counts
    /// as `(c/N) ln(c N / (c_a c_b))`, so swapping the operands gives the same
    /// terms and a constant operand gives exactly zero.
    pub fn mutual_information(&self) -> f64 {
        let (rows, cols) = (self.row_counts(), self.col_counts());
        let n = self.total as u128;
        let mut mi = 0.0;
        for x in 0..self.bins_a {
            for y in 0..self.bins_b {
                let c = self.counts[x * self.bins_b + y];
                if c == 0 {
                    continue;
                }
                let num = c as u128 * n;
                let den = rows[x] as u128 * cols[y] as u128;
                if num != den {
                    mi += (c as f64 / n as f64) * (num as f64 / den as f64).ln();
                }
            }
        }
        mi
    }
}

/// Shannon entropy (nats) of a count vector.
fn entropy_of_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0 && c != n)
        .map(|&c| (c as f64 / n as f64) * (n as f64 / c as f64).ln())
        .sum()
}

pub fn joint_histogram(a: &Raster, b: &Raster, bins: usize) -> Result<JointHistogram> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch {
            first: "raster A".into(),
            second: "raster B".into(),
        });
    }
    let (ba, bb) = (bin_values(a, bins)?, bin_values(b, bins)?);
    let mut counts = vec![0u64; bins * bins];
    for (x, y) in ba.iter().zip(&bb) {
        if let (Some(x), Some(y)) = (x, y) {
            counts[x * bins + y] += 1;
        }
    }
    JointHistogram::from_counts(bins, bins, counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub mi_nats: f64,
    pub bins: usize,
    pub entropy_a: f64,
    pub entropy_b: f64,
    #[serde(skip)]
    pub histogram: Option<JointHistogram>,
}

/// MI of the binned values of two rasters on the same grid; cells that are
/// nodata in either raster are ignored.
pub fn mutual_information(a: &Raster, b: &Raster, bins: usize) -> Result<MutualInformation> {
    let h = joint_histogram(a, b, bins)?;
    Ok(MutualInformation {
        mi_nats: h.mutual_information(),
        bins,
        entropy_a: entropy_of_counts(&h.row_counts()),
        entropy_b: entropy_of_counts(&h.col_counts()),
        histogram: Some(h),
    })
}

/// Entropy (nats) of a raster's binned value distribution.
pub fn entropy(r: &Raster, bins: usize) -> Result<f64> {
    let mut counts = vec![0u64; bins.max(1)];
    for b in bin_values(r, bins)?.into_iter().flatten() {
        counts[b] += 1;
    }
    Ok(entropy_of_counts(&counts))
}
