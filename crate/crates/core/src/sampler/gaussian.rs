//! Exact sampling for `V(x) = x^2` through the Dumitriu-Edelman tridiagonal
//! model.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use super::{chain_rng, Configuration, SampleMeta, SampleSet};
use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

/// One draw of the beta-Hermite ensemble scaled to the law
/// `exp(beta sum log|Delta| - (N beta / 2) sum lambda^2)`.
///
/// The matrix has `N(0,1)` diagonal and `chi_{beta(N-i)} / sqrt 2`
/// off-diagonal entries; its spectrum is multiplied by `1/sqrt(N beta)`.
pub fn sample_gaussian_beta<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let diag: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|i| {
            let dof = beta * (n - i) as f64;
            let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom");
            (chi2.sample(rng) / 2.0).sqrt()
        })
        .collect();
    let t = SymTridiagonal::new(diag, offdiag)?;
    let scale = 1.0 / (n as f64 * beta).sqrt();
    let mut ev = t.eigenvalues()?;
    for x in &mut ev {
        *x *= scale;
    }
    // ties have probability zero but rounding can still produce them
    Configuration::new(ev)
}

/// `draws` independent configurations split over `n_streams` RNG streams,
/// generated in parallel and concatenated in stream order.
pub fn sample_gaussian_beta_set(
    n: usize,
    beta: f64,
    draws: usize,
    n_streams: usize,
    seed: u64,
) -> Result<SampleSet> {
    if draws == 0 {
        return Err(Error::EmptySampleSet);
    }
    let n_streams = n_streams.clamp(1, draws);
    let per_stream: Vec<usize> = (0..n_streams)
        .map(|s| draws / n_streams + usize::from(s < draws % n_streams))
        .collect();
    let chunks: Vec<Result<Vec<Configuration>>> = per_stream
        .par_iter()
        .enumerate()
        .map(|(stream, &count)| {
            let mut rng = chain_rng(seed, stream as u64);
            (0..count).map(|_| sample_gaussian_beta(n, beta, &mut rng)).collect()
        })
        .collect();
    let mut configs = Vec::with_capacity(draws);
    let mut chain_ids = Vec::with_capacity(draws);
    for (stream, chunk) in chunks.into_iter().enumerate() {
        let chunk = chunk?;
        chain_ids.extend(std::iter::repeat_n(stream, chunk.len()));
        configs.extend(chunk);
    }
    Ok(SampleSet {
        configs,
        chain_ids,
        meta: SampleMeta {
            seed,
            n,
            beta,
            acceptance: vec![1.0; n_streams],
            step_sizes: Vec::new(),
            window: None,
            constraint: None,
            description: format!("tridiagonal beta-Hermite N={n} beta={beta}"),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = chain_rng(0, 0);
        assert!(sample_gaussian_beta(0, 2.0, &mut rng).is_err());
        assert!(sample_gaussian_beta(3, 0.0, &mut rng).is_err());
        assert!(sample_gaussian_beta(3, f64::NAN, &mut rng).is_err());
        assert_eq!(sample_gaussian_beta_set(3, 2.0, 0, 1, 0), Err(Error::EmptySampleSet));
    }

    #[test]
    fn single_particle_is_gaussian_with_variance_one_over_beta() {
        // N = 1: density exp(-beta lambda^2 / 2)
        let s = sample_gaussian_beta_set(1, 4.0, 40_000, 4, 1).unwrap();
        let var = s.configs.iter().map(|c| c[0] * c[0]).sum::<f64>() / s.len() as f64;
        assert!((var - 0.25).abs() < 0.01, "{var}");
    }

    #[test]
    fn two_particle_gap_law_at_beta_two() {
        // density of g = lambda_2 - lambda_1 for N = 2, beta = 2 is
        // proportional to g^2 exp(-g^2): E[g^2] = 3/2, E[g] = 2/sqrt(pi)
        let s = sample_gaussian_beta_set(2, 2.0, 100_000, 4, 5).unwrap();
        let gaps: Vec<f64> = s.configs.iter().map(|c| c[1] - c[0]).collect();
        let m1 = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let m2 = gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64;
        assert!((m1 - 2.0 / std::f64::consts::PI.sqrt()).abs() < 0.01, "{m1}");
        assert!((m2 - 1.5).abs() < 0.02, "{m2}");
    }

    #[test]
    fn large_n_fills_the_semicircle_support() {
        let mut rng = chain_rng(9, 0);
        let c = sample_gaussian_beta(400, 2.0, &mut rng).unwrap();
        let b = 2f64.sqrt();
        assert!((c[0] + b).abs() < 0.1 && (c[399] - b).abs() < 0.1);
        let second_moment = c.as_slice().iter().map(|x| x * x).sum::<f64>() / 400.0;
        // semicircle on [-sqrt 2, sqrt 2] has second moment 1/2
        assert!((second_moment - 0.5).abs() < 0.02);
    }

    #[test]
    fn streams_are_deterministic() {
        let a = sample_gaussian_beta_set(5, 1.0, 10, 3, 42).unwrap();
        let b = sample_gaussian_beta_set(5, 1.0, 10, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.chain_ids, vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
    }
}
