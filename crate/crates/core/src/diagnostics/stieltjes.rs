//! Empirical Stieltjes transforms and the first loop equation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sampler::SampleSet;
use crate::stats::{grouped_mean_stderr_complex, replicate_labels};

/// Monte Carlo estimates of the loop-equation ingredients at one `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesEstimate {
    pub z: Complex64,
    pub n: usize,
    pub beta: f64,
    /// `E (1/N) sum 1/(z - lambda_i)`
    pub m_hat: Complex64,
    /// `E -(1/N) sum (z - lambda_i)^-2`
    pub m_prime_hat: Complex64,
    /// `E X^2 - (E X)^2` for `X = sum 1/(z - lambda_i)`, no modulus.
    pub k_hat: Complex64,
    /// `E |X|^2 - |E X|^2`, reported only.
    pub variance_abs: f64,
    /// `k_hat / N^2 + (2/beta - 1) m_prime_hat / N`
    pub c_hat: Complex64,
    /// Empirical minus equilibrium average of `(V'(z) - V'(t))/(z - t)`.
    pub b_hat: Complex64,
    /// Jackknife standard error of `m_hat`.
    pub stderr: f64,
    pub n_samples: usize,
}

struct PerSample {
    x: Complex64,
    x_prime: Complex64,
    dd: Complex64,
}

fn per_sample(s: &SampleSet, p: &Potential, z: Complex64) -> Vec<PerSample> {
    s.configs
        .par_iter()
        .map(|c| {
            let mut x = Complex64::new(0.0, 0.0);
            let mut x_prime = Complex64::new(0.0, 0.0);
            let mut dd = Complex64::new(0.0, 0.0);
            for &l in c.as_slice() {
                let inv = 1.0 / (z - l);
                x += inv;
                x_prime -= inv * inv;
                dd += p.derivative_divided_difference(z, l);
            }
            PerSample { x, x_prime, dd }
        })
        .collect()
}

fn assemble(
    rows: &[&PerSample],
    z: Complex64,
    n: usize,
    beta: f64,
    dd_equilibrium: Complex64,
) -> StieltjesEstimate {
    let count = rows.len() as f64;
    let nf = n as f64;
    let mean_x: Complex64 = rows.iter().map(|r| r.x).sum::<Complex64>() / count;
    let mean_x2: Complex64 = rows.iter().map(|r| r.x * r.x).sum::<Complex64>() / count;
    let mean_abs2: f64 = rows.iter().map(|r| r.x.norm_sqr()).sum::<f64>() / count;
    let m_prime_hat = rows.iter().map(|r| r.x_prime).sum::<Complex64>() / (count * nf);
    let k_hat = mean_x2 - mean_x * mean_x;
    let c_hat = k_hat / (nf * nf) + (2.0 / beta - 1.0) * m_prime_hat / nf;
    let b_hat = rows.iter().map(|r| r.dd).sum::<Complex64>() / (count * nf) - dd_equilibrium;
    StieltjesEstimate {
        z,
        n,
        beta,
        m_hat: mean_x / nf,
        m_prime_hat,
        k_hat,
        variance_abs: mean_abs2 - mean_x.norm_sqr(),
        c_hat,
        b_hat,
        stderr: 0.0,
        n_samples: rows.len(),
    }
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.im != 0.0 && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("z must be finite and off the real axis, got {z}")));
    }
    Ok(())
}

/// Sample averages of the loop-equation quantities at `z`.
pub fn empirical_stieltjes(
    s: &SampleSet,
    p: &Potential,
    eq: &EquilibriumMeasure,
    z: Complex64,
) -> Result<StieltjesEstimate> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    check_z(z)?;
    let rows = per_sample(s, p, z);
    let refs: Vec<&PerSample> = rows.iter().collect();
    let mut est = assemble(&refs, z, s.n(), s.meta.beta, eq.divided_difference_moment(z));
    let m_values: Vec<Complex64> = rows.iter().map(|r| r.x / s.n() as f64).collect();
    est.stderr = grouped_mean_stderr_complex(&m_values, &s.chain_ids)?.1;
    Ok(est)
}

/// One estimate per replicate (chain, or contiguous batch for a single
/// chain), for judging the spread of nonlinear quantities such as the loop
/// residual.
pub fn empirical_stieltjes_replicates(
    s: &SampleSet,
    p: &Potential,
    eq: &EquilibriumMeasure,
    z: Complex64,
) -> Result<Vec<StieltjesEstimate>> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    check_z(z)?;
    let rows = per_sample(s, p, z);
    let labels = replicate_labels(&s.chain_ids);
    let n_rep = labels.iter().copied().max().map_or(0, |m| m + 1);
    let dd = eq.divided_difference_moment(z);
    Ok((0..n_rep)
        .map(|g| {
            let group: Vec<&PerSample> = rows.iter().zip(&labels).filter(|(_, &l)| l == g).map(|(r, _)| r).collect();
            assemble(&group, z, s.n(), s.meta.beta, dd)
        })
        .collect())
}

/// `(m_hat - m)^2 + s (m_hat - m) + b_hat - c_hat` with `m`, `s` from the
/// equilibrium measure at `est.z`.
pub fn loop_residual(est: &StieltjesEstimate, eq: &EquilibriumMeasure) -> Complex64 {
    let d = est.m_hat - eq.stieltjes_m(est.z);
    d * d + eq.s_function(est.z) * d + est.b_hat - est.c_hat
}

/// Root mean square of [`loop_residual`] over replicate estimates.
pub fn loop_residual_rms(reps: &[StieltjesEstimate], eq: &EquilibriumMeasure) -> f64 {
    if reps.is_empty() {
        return f64::NAN;
    }
    (reps.iter().map(|e| loop_residual(e, eq).norm_sqr()).sum::<f64>() / reps.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_gaussian_beta_set, Configuration};

    fn gauss() -> (Potential, EquilibriumMeasure) {
        let p = Potential::quadratic(1.0).unwrap();
        let eq = EquilibriumMeasure::solve(&p).unwrap();
        (p, eq)
    }

    #[test]
    fn single_particle_single_sample() {
        let (p, eq) = gauss();
        let s = SampleSet::from_configs(vec![Configuration::new(vec![0.0]).unwrap()], 2.0, "point").unwrap();
        let e = empirical_stieltjes(&s, &p, &eq, Complex64::new(0.0, 1.0)).unwrap();
        assert!((e.m_hat - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(e.k_hat, Complex64::new(0.0, 0.0));
        assert_eq!(e.stderr, 0.0);
        // beta = 2 removes the derivative term
        assert_eq!(e.c_hat, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let (p, eq) = gauss();
        let s = SampleSet::from_configs(vec![Configuration::new(vec![0.0]).unwrap()], 2.0, "").unwrap();
        assert!(empirical_stieltjes(&s, &p, &eq, Complex64::new(0.5, 0.0)).is_err());
        let mut empty = s.clone();
        empty.configs.clear();
        empty.chain_ids.clear();
        assert_eq!(
            empirical_stieltjes(&empty, &p, &eq, Complex64::new(0.0, 1.0)),
            Err(Error::EmptySampleSet)
        );
    }

    #[test]
    fn quadratic_potential_has_zero_b_hat() {
        let (p, eq) = gauss();
        let s = sample_gaussian_beta_set(16, 1.0, 50, 2, 3).unwrap();
        let e = empirical_stieltjes(&s, &p, &eq, Complex64::new(0.2, 0.3)).unwrap();
        assert!(e.b_hat.norm() < 1e-13);
    }

    #[test]
    fn conjugate_symmetry() {
        let (p, eq) = gauss();
        let s = sample_gaussian_beta_set(10, 2.0, 40, 2, 8).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let a = empirical_stieltjes(&s, &p, &eq, z).unwrap();
        let b = empirical_stieltjes(&s, &p, &eq, z.conj()).unwrap();
        assert!((a.m_hat.conj() - b.m_hat).norm() < 1e-15);
        assert!((a.k_hat.conj() - b.k_hat).norm() < 1e-12);
    }

    #[test]
    fn residual_fixed_point_and_beta_two_identity() {
        let (p, eq) = gauss();
        let z = Complex64::new(0.1, 0.4);
        let s = sample_gaussian_beta_set(12, 2.0, 30, 3, 1).unwrap();
        let mut e = empirical_stieltjes(&s, &p, &eq, z).unwrap();
        e.m_hat = eq.stieltjes_m(z);
        let r = loop_residual(&e, &eq);
        assert!((r + e.k_hat / 144.0).norm() < 1e-13);
        e.b_hat = Complex64::new(0.0, 0.0);
        e.c_hat = Complex64::new(0.0, 0.0);
        assert!(loop_residual(&e, &eq).norm() < 1e-15);
    }

    #[test]
    fn replicates_cover_all_samples() {
        let (p, eq) = gauss();
        let s = sample_gaussian_beta_set(8, 2.0, 60, 3, 4).unwrap();
        let reps = empirical_stieltjes_replicates(&s, &p, &eq, Complex64::new(0.0, 0.5)).unwrap();
        assert!(reps.len() >= 3);
        assert_eq!(reps.iter().map(|r| r.n_samples).sum::<usize>(), 60);
        assert!(loop_residual_rms(&reps, &eq).is_finite());
    }
}
