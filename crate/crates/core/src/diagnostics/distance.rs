//! Monte Carlo estimates of distances between measures.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{penalty_phi, penalty_phi_gradient, LocalConstraint, SampleSet};
use crate::stats::grouped_mean_stderr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// `D(mu | omega) = (1/2N) E_mu |grad phi|^2` for `d mu / d omega ~ exp(phi)`,
/// with `mu` represented by `s` and `grad_phi` the gradient of `phi`.
pub fn dirichlet_form_estimate<F>(s: &SampleSet, grad_phi: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let two_n = 2.0 * s.n() as f64;
    let values: Vec<f64> = s
        .configs
        .par_iter()
        .map(|c| grad_phi(c.as_slice()).iter().map(|g| g * g).sum::<f64>() / two_n)
        .collect();
    let (value, stderr) = grouped_mean_stderr(&values, &s.chain_ids)?;
    Ok(Estimate { value, stderr })
}

/// [`dirichlet_form_estimate`] of `mu` against its locally constrained
/// transform, where `phi` is the gap penalty.
pub fn dirichlet_form_constrained(s: &SampleSet, constraint: &LocalConstraint) -> Result<Estimate> {
    if !s.is_empty() {
        constraint.validate(s.n())?;
    }
    let beta = s.meta.beta;
    dirichlet_form_estimate(s, |x| penalty_phi_gradient(constraint, beta, x))
}

/// Upper bound `E_1[H_2 - H_1] + E_2[H_1 - H_2]` on the relative entropy
/// `S(mu_1 | mu_2)` for `mu_i ~ exp(-H_i)`, from samples `s1 ~ mu_1` and
/// `s2 ~ mu_2`. Additive constants in the `H_i` cancel.
pub fn entropy_upper_bound<H1, H2>(s1: &SampleSet, s2: &SampleSet, h1: H1, h2: H2) -> Result<Estimate>
where
    H1: Fn(&[f64]) -> f64 + Sync,
    H2: Fn(&[f64]) -> f64 + Sync,
{
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let first: Vec<f64> = s1.configs.par_iter().map(|c| h2(c.as_slice()) - h1(c.as_slice())).collect();
    let second: Vec<f64> = s2.configs.par_iter().map(|c| h1(c.as_slice()) - h2(c.as_slice())).collect();
    let (a, ea) = grouped_mean_stderr(&first, &s1.chain_ids)?;
    let (b, eb) = grouped_mean_stderr(&second, &s2.chain_ids)?;
    Ok(Estimate {
        value: a + b,
        stderr: ea.hypot(eb),
    })
}

/// Entropy bound between `mu` (samples `s_mu`) and its constrained transform
/// (samples `s_omega`), where `H_omega - H_mu = phi`.
pub fn entropy_constrained(s_mu: &SampleSet, s_omega: &SampleSet, constraint: &LocalConstraint) -> Result<Estimate> {
    let beta = s_mu.meta.beta;
    entropy_upper_bound(s_mu, s_omega, |_| 0.0, |x| penalty_phi(constraint, beta, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_gaussian_beta_set, Configuration};

    #[test]
    fn zero_penalty_gives_zero_dirichlet_form() {
        let s = sample_gaussian_beta_set(10, 2.0, 20, 2, 1).unwrap();
        let d = dirichlet_form_estimate(&s, |x| vec![0.0; x.len()]).unwrap();
        assert_eq!((d.value, d.stderr), (0.0, 0.0));
    }

    #[test]
    fn one_coordinate_penalty() {
        let c = Configuration::new(vec![0.5, 2.0]).unwrap();
        let s = SampleSet::from_configs(vec![c], 2.0, "").unwrap();
        // phi = lambda_1^2 / 2 => |grad phi|^2 = lambda_1^2
        let d = dirichlet_form_estimate(&s, |x| vec![x[0], 0.0]).unwrap();
        assert!((d.value - 0.25 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn flat_penalty_region_gives_zero() {
        // tightly packed block: every theta argument inside [-1, 1]
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 1e-3).collect();
        let s = SampleSet::from_configs(vec![Configuration::new(x).unwrap()], 2.0, "").unwrap();
        let con = LocalConstraint { k: 25, m: 5, eps: 0.1 };
        assert_eq!(dirichlet_form_constrained(&s, &con).unwrap().value, 0.0);
    }

    #[test]
    fn entropy_bound_cancels_constants() {
        let a = sample_gaussian_beta_set(6, 2.0, 30, 3, 1).unwrap();
        let b = sample_gaussian_beta_set(6, 2.0, 30, 3, 2).unwrap();
        let h = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let same = entropy_upper_bound(&a, &b, h, h).unwrap();
        assert_eq!(same.value, 0.0);
        let shifted = entropy_upper_bound(&a, &b, h, |x| h(x) + 3.5).unwrap();
        assert!(shifted.value.abs() < 1e-12);
        assert!(entropy_upper_bound(&a, &b, h, |x| 2.0 * h(x)).unwrap().value.is_finite());
    }
}
