//! Deviations of ordered particles from their classical locations.

use serde::Serialize;

use crate::equilibrium::ClassicalLocations;
use crate::error::{Error, Result};
use crate::sampler::SampleSet;
use crate::stats::{linear_fit, median, quantile_sorted, LinearFit};

/// Per-index quantiles of `|lambda_k - gamma_k|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub n: usize,
    pub alpha: f64,
    /// Median deviation for `k = 1..=N` (stored 0-based).
    pub median: Vec<f64>,
    /// 0.99-quantile of the deviation per index.
    pub q99: Vec<f64>,
    /// 1-based inclusive bulk range `[ceil(alpha N), floor((1 - alpha) N)]`.
    pub bulk: (usize, usize),
    /// Median of all bulk deviations pooled over indices and samples.
    pub bulk_median: f64,
    pub n_samples: usize,
}

impl RigidityReport {
    pub fn is_bulk(&self, k: usize) -> bool {
        k >= self.bulk.0 && k <= self.bulk.1
    }
}

pub fn rigidity_report(s: &SampleSet, gamma: &ClassicalLocations, alpha: f64) -> Result<RigidityReport> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let n = s.n();
    if gamma.n() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: gamma.n(),
        });
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    let lo = ((alpha * n as f64).ceil() as usize).max(1);
    let hi = ((1.0 - alpha) * n as f64).floor() as usize;
    let mut median_k = Vec::with_capacity(n);
    let mut q99 = Vec::with_capacity(n);
    let mut pooled = Vec::new();
    let mut column = vec![0.0; s.len()];
    for k in 0..n {
        for (slot, c) in column.iter_mut().zip(&s.configs) {
            *slot = (c[k] - gamma.gamma[k]).abs();
        }
        column.sort_by(|a, b| a.total_cmp(b));
        median_k.push(quantile_sorted(&column, 0.5));
        q99.push(quantile_sorted(&column, 0.99));
        if k + 1 >= lo && k < hi {
            pooled.extend_from_slice(&column);
        }
    }
    let bulk_median = if pooled.is_empty() { f64::NAN } else { median(&pooled) };
    Ok(RigidityReport {
        n,
        alpha,
        median: median_k,
        q99,
        bulk: (lo, hi),
        bulk_median,
        n_samples: s.len(),
    })
}

/// Least-squares slope of `log(bulk median)` against `log N`; needs at least
/// three ladder points.
pub fn rigidity_ladder(reports: &[&RigidityReport]) -> Result<LinearFit> {
    if reports.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "an exponent fit needs at least 3 ladder points, got {}",
            reports.len()
        )));
    }
    let x: Vec<f64> = reports.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = reports.iter().map(|r| r.bulk_median.ln()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("bulk medians must be positive to fit an exponent".into()));
    }
    linear_fit(&x, &y)
}
