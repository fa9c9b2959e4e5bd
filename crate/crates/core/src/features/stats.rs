//! Order statistics and percentile-relative aggregates.
//!
//! Percentiles use linear interpolation between closest ranks: on the sorted
//! sequence `s` of length `n`, the position is `h = p / 100 * (n - 1)` and the
//! value is `s[floor(h)] + (h - floor(h)) * (s[floor(h) + 1] - s[floor(h)])`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Percentile levels used by the aggregate features.
pub const PERCENTILE_LEVELS: [f64; 4] = [10.0, 25.0, 75.0, 90.0];

pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, p))
}

/// `sorted` must be ascending and non-empty. `p` is clamped to `[0, 100]`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of an empty sequence");
    let p = p.clamp(0.0, 100.0);
    let h = p / 100.0 * (n - 1) as f64;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard deviation with divisor `n`.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    libm::sqrt(var)
}

/// Sums, square sums and crossing counts relative to a threshold `t`.
///
/// "Above" and "below" are strict (`v > t`, `v < t`). A crossing is a strict
/// sign change of `v - t` between consecutive samples, where samples equal to
/// `t` carry the sign of the previous non-equal sample. `cross_above` counts
/// changes into the above region (upward), `cross_below` changes into the
/// below region (downward); their sum is [`sign_changes`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PercentileAggregates {
    pub sum_above: f64,
    pub sum_below: f64,
    pub sqsum_above: f64,
    pub sqsum_below: f64,
    pub cross_above: f64,
    pub cross_below: f64,
}

impl PercentileAggregates {
    pub fn at_threshold(values: &[f64], t: f64) -> Self {
        let mut agg = PercentileAggregates::default();
        let mut side: Option<bool> = None;
        for &v in values {
            if v > t {
                agg.sum_above += v;
                agg.sqsum_above += v * v;
            } else if v < t {
                agg.sum_below += v;
                agg.sqsum_below += v * v;
            }
            let now = if v > t {
                Some(true)
            } else if v < t {
                Some(false)
            } else {
                side
            };
            match (side, now) {
                (Some(false), Some(true)) => agg.cross_above += 1.0,
                (Some(true), Some(false)) => agg.cross_below += 1.0,
                _ => {}
            }
            side = now;
        }
        agg
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.sum_above, self.sum_below, self.sqsum_above, self.sqsum_below, self.cross_above, self.cross_below]
    }
}

/// Aggregates relative to the `p`-th percentile of `values` itself.
pub fn percentile_aggregates(values: &[f64], p: f64) -> Result<PercentileAggregates> {
    let t = percentile(values, p)?;
    Ok(PercentileAggregates::at_threshold(values, t))
}

/// Number of strict sign changes of `v - t` along the sequence.
pub fn sign_changes(values: &[f64], t: f64) -> usize {
    let a = PercentileAggregates::at_threshold(values, t);
    (a.cross_above + a.cross_below) as usize
}
