//! Small statistical helpers shared by the diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Target number of jackknife replicates.
pub const MIN_REPLICATES: usize = 20;

/// Mean and jackknife standard error of `values`.
///
/// Replicates come from [`replicate_labels`].
pub fn grouped_mean_stderr(values: &[f64], groups: &[usize]) -> Result<(f64, f64)> {
    let cvals: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (m, se) = grouped_mean_stderr_complex(&cvals, groups)?;
    Ok((m.re, se))
}

/// Complex version of [`grouped_mean_stderr`]; the error is
/// `sqrt(Var Re + Var Im)` of the mean.
pub fn grouped_mean_stderr_complex(values: &[Complex64], groups: &[usize]) -> Result<(Complex64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if values.len() != groups.len() {
        return Err(Error::ShapeMismatch {
            expected: values.len(),
            found: groups.len(),
        });
    }
    let labels = replicate_labels(groups);
    let n_rep = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sums = vec![Complex64::new(0.0, 0.0); n_rep];
    let mut counts = vec![0usize; n_rep];
    for (&v, &g) in values.iter().zip(&labels) {
        sums[g] += v;
        counts[g] += 1;
    }
    let total: Complex64 = sums.iter().sum();
    let n = values.len();
    let mean = total / n as f64;
    if n_rep < 2 {
        return Ok((mean, 0.0));
    }
    let loo: Vec<Complex64> = (0..n_rep)
        .map(|g| (total - sums[g]) / (n - counts[g]) as f64)
        .collect();
    let loo_mean: Complex64 = loo.iter().sum::<Complex64>() / n_rep as f64;
    let var = (n_rep - 1) as f64 / n_rep as f64 * loo.iter().map(|x| (x - loo_mean).norm_sqr()).sum::<f64>();
    Ok((mean, var.sqrt()))
}

/// Replicate index per sample for the jackknife.
///
/// Each chain is one replicate when there are at least [`MIN_REPLICATES`]
/// chains. With fewer, every chain is cut into contiguous batches so that
/// about that many replicates exist; a jackknife over a handful of chains
/// gives a very noisy error bar.
pub fn replicate_labels(groups: &[usize]) -> Vec<usize> {
    let mut distinct: Vec<usize> = groups.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let chain: Vec<usize> = groups
        .iter()
        .map(|g| distinct.binary_search(g).expect("label present"))
        .collect();
    let n_chains = distinct.len();
    if n_chains >= MIN_REPLICATES {
        return chain;
    }
    let per_chain_batches = MIN_REPLICATES.div_ceil(n_chains.max(1));
    let mut sizes = vec![0usize; n_chains];
    for &c in &chain {
        sizes[c] += 1;
    }
    let mut seen = vec![0usize; n_chains];
    let sparse: Vec<usize> = chain
        .iter()
        .map(|&c| {
            let batches = per_chain_batches.min(sizes[c]).max(1);
            let pos = seen[c];
            seen[c] += 1;
            c * per_chain_batches + pos * batches / sizes[c]
        })
        .collect();
    let mut used = sparse.clone();
    used.sort_unstable();
    used.dedup();
    sparse
        .iter()
        .map(|l| used.binary_search(l).expect("label present"))
        .collect()
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, p)
}

/// Type-7 quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Ordinary least squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("a line fit needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("line fit with identical abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        residual,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs two nonempty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
