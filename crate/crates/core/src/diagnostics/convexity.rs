//! Hessian bounds, block averages and concentration of linear statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sampler::target::theta_second;
use crate::sampler::{Configuration, LocalConstraint, SampleSet, MIN_GAP};

/// Mean of `lambda` over the 1-based block `[k-M, k+M]`.
pub fn block_average(c: &Configuration, k: usize, m: usize) -> Result<f64> {
    let n = c.len();
    if k < m + 1 || k + m > n {
        return Err(Error::WindowOutOfRange {
            first: k.saturating_sub(m),
            last: k + m,
            n,
        });
    }
    let block = &c.as_slice()[k - 1 - m..k + m];
    Ok(block.iter().sum::<f64>() / block.len() as f64)
}

fn check_gaps(x: &[f64]) -> Result<()> {
    if let Some(i) = x.windows(2).position(|w| w[1] - w[0] <= MIN_GAP) {
        return Err(Error::DegenerateGap {
            index: i,
            next: i + 1,
            threshold: MIN_GAP,
        });
    }
    Ok(())
}

/// `v* (Hess H) v` for the Hamiltonian with `mu ~ exp(-N H)`:
/// `(beta/N) sum_{i<j} (v_i - v_j)^2/(lambda_i - lambda_j)^2 + (beta/2) sum V''(lambda_i) v_i^2`.
pub fn hessian_quadratic_form(p: &Potential, beta: f64, c: &Configuration, v: &[f64]) -> Result<f64> {
    let x = c.as_slice();
    let n = x.len();
    if v.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: v.len(),
        });
    }
    check_gaps(x)?;
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dv = v[i] - v[j];
            let dx = x[i] - x[j];
            pair += dv * dv / (dx * dx);
        }
    }
    let field: f64 = x.iter().zip(v).map(|(&l, &vi)| p.second_derivative(l) * vi * vi).sum();
    Ok(beta / n as f64 * pair + 0.5 * beta * field)
}

/// Both sides of the local convexity bound on a constrained block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalHessianFloor {
    /// `v* (Hess H_1) v` with `H_1 = phi/N - (beta/N) sum_{block pairs} log|lambda_i - lambda_j|`.
    pub lhs: f64,
    /// `(beta/2) (N^(1-2 eps)/i_M^2) sum_{i,j} (v_i - v_j)^2`, which the
    /// pairwise estimate guarantees.
    pub rhs: f64,
    /// The same with `i_M` in place of `i_M^2`; not implied by the pairwise
    /// estimate and violated for some configurations.
    pub rhs_single_power: f64,
}

/// `v` is indexed over the block `[k-M, k+M]`.
pub fn local_hessian_floor(
    constraint: &LocalConstraint,
    beta: f64,
    c: &Configuration,
    v: &[f64],
) -> Result<LocalHessianFloor> {
    let x = c.as_slice();
    let n = x.len();
    constraint.validate(n)?;
    let i_m = constraint.block_len();
    if v.len() != i_m {
        return Err(Error::ShapeMismatch {
            expected: i_m,
            found: v.len(),
        });
    }
    let block = &x[constraint.block()];
    check_gaps(block)?;
    let nf = n as f64;
    let scale = constraint.scale(n);
    let mut log_part = 0.0;
    let mut theta_part = 0.0;
    let mut diff_sq = 0.0;
    for i in 0..i_m {
        for j in i + 1..i_m {
            let dv = v[i] - v[j];
            let dx = block[i] - block[j];
            log_part += dv * dv / (dx * dx);
            theta_part += dv * dv * theta_second(scale * dx);
            diff_sq += dv * dv;
        }
    }
    let lhs = beta / nf * log_part + beta / nf * scale * scale * theta_part;
    let base = beta * nf.powf(1.0 - 2.0 * constraint.eps);
    // sum over ordered pairs is twice the sum over i < j
    Ok(LocalHessianFloor {
        lhs,
        rhs: base / (i_m * i_m) as f64 * diff_sq,
        rhs_single_power: base / i_m as f64 * diff_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub x: f64,
    /// Fraction of samples with `|f - mean f| > x`.
    pub empirical_tail: f64,
    pub bound: f64,
}

/// `2 exp(-(beta/4) N^(2-2 eps) x^2 / (i_M |v|^2))`.
pub fn concentration_bound(constraint: &LocalConstraint, beta: f64, n: usize, v_norm_sq: f64, x: f64) -> f64 {
    let nf = n as f64;
    2.0 * (-(beta / 4.0) * nf.powf(2.0 - 2.0 * constraint.eps) * x * x
        / (constraint.block_len() as f64 * v_norm_sq))
        .exp()
}

/// Empirical tails of `f = sum_{i in block} v_i lambda_i` against the
/// concentration bound, for samples of the constrained target.
pub fn concentration_check(
    s: &SampleSet,
    constraint: &LocalConstraint,
    v: &[f64],
    x_grid: &[f64],
) -> Result<Vec<ConcentrationRow>> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let n = s.n();
    constraint.validate(n)?;
    if v.len() != constraint.block_len() {
        return Err(Error::ShapeMismatch {
            expected: constraint.block_len(),
            found: v.len(),
        });
    }
    let total: f64 = v.iter().sum();
    let v_norm_sq: f64 = v.iter().map(|a| a * a).sum();
    if total.abs() > 1e-12 * v_norm_sq.sqrt().max(1.0) || v_norm_sq == 0.0 {
        return Err(Error::InvalidArgument("v must be a nonzero vector with zero sum".into()));
    }
    let block = constraint.block();
    let f: Vec<f64> = s
        .configs
        .iter()
        .map(|c| c.as_slice()[block.clone()].iter().zip(v).map(|(l, w)| l * w).sum())
        .collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let mut dev: Vec<f64> = f.iter().map(|x| (x - mean).abs()).collect();
    dev.sort_by(|a, b| a.total_cmp(b));
    Ok(x_grid
        .iter()
        .map(|&x| {
            let above = dev.len() - dev.partition_point(|&d| d <= x);
            ConcentrationRow {
                x,
                empirical_tail: above as f64 / dev.len() as f64,
                bound: concentration_bound(constraint, s.meta.beta, n, v_norm_sq, x),
            }
        })
        .collect())
}
