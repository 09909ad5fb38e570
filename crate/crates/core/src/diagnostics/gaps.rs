//! Windowed gap observables and the universality comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::{GapKernel, ProductKernel};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::sampler::SampleSet;
use crate::stats::grouped_mean_stderr;

/// How a spacing is turned into the kernel argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapScaling {
    /// `G(N (lambda_i - lambda_{i+1}) / rho)` with prefactor `1/(K rho)`;
    /// the `n`-tuple version carries `1/rho^n`.
    #[default]
    Literal,
    /// Unfolded spacings `N rho (lambda_{i+1} - lambda_i)` with prefactor `1/K`,
    /// so the typical argument is 1.
    Unfolded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStatistic {
    pub l: usize,
    pub k: usize,
    pub rho_e: f64,
    pub kernel: String,
    pub scaling: GapScaling,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// `(1/(K rho)) sum_{i=L+1}^{L+K} G(N (lambda_i - lambda_{i+1}) / rho)`
/// averaged over the samples (indices 1-based).
///
/// For samples drawn from the window target with the same `(L, K)` the last
/// term would reference the fixed `lambda_{L+K+1}` and is taken to be zero.
pub fn gap_statistic(
    s: &SampleSet,
    l: usize,
    k: usize,
    rho_e: f64,
    kernel: &GapKernel,
    scaling: GapScaling,
) -> Result<GapStatistic> {
    let product = ProductKernel(vec![*kernel]);
    let mut g = gap_mtuple_statistic(s, l, k, rho_e, &[1], &product, scaling)?;
    g.kernel = kernel.id();
    Ok(g)
}

/// Average over `i = L+1..=L+K` of the tuple observable built from
/// `N (lambda_{i+m_{j-1}} - lambda_{i+m_j}) / rho` with `m_0 = 0`, scaled by
/// `1/rho^n` (or the unfolded analogue).
pub fn gap_mtuple_statistic(
    s: &SampleSet,
    l: usize,
    k: usize,
    rho_e: f64,
    offsets: &[usize],
    kernel: &ProductKernel,
    scaling: GapScaling,
) -> Result<GapStatistic> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if !(rho_e.is_finite() && rho_e > 0.0) {
        return Err(Error::InvalidArgument(format!("rho(E) must be positive, got {rho_e}")));
    }
    if offsets.is_empty() || offsets.len() != kernel.dim() {
        return Err(Error::ShapeMismatch {
            expected: kernel.dim(),
            found: offsets.len(),
        });
    }
    if offsets.iter().any(|&m| m == 0) || offsets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("offsets must be positive and non-decreasing".into()));
    }
    let n = s.n();
    let reach = *offsets.last().expect("nonempty");
    if l + k + reach > n {
        return Err(Error::WindowOutOfRange {
            first: l + 1,
            last: l + k,
            n,
        });
    }
    // last index whose value is random in windowed data
    let windowed = s.meta.window == Some((l, k));
    let last_free = l + k;
    let nf = n as f64;
    let dim = offsets.len() as i32;
    let (arg_scale, prefactor) = match scaling {
        GapScaling::Literal => (nf / rho_e, 1.0 / (k as f64 * rho_e.powi(dim))),
        GapScaling::Unfolded => (-nf * rho_e, 1.0 / k as f64),
    };

    let values: Vec<f64> = s
        .configs
        .par_iter()
        .map(|c| {
            let lam = c.as_slice();
            let mut args = vec![0.0; offsets.len()];
            let mut total = 0.0;
            for i in (l + 1)..=(l + k) {
                if windowed && i + reach > last_free {
                    continue;
                }
                let mut prev = lam[i - 1];
                for (a, &m) in args.iter_mut().zip(offsets) {
                    let next = lam[i + m - 1];
                    *a = arg_scale * (prev - next);
                    prev = next;
                }
                total += kernel.eval(&args);
            }
            prefactor * total
        })
        .collect();
    let (value, stderr) = grouped_mean_stderr(&values, &s.chain_ids)?;
    Ok(GapStatistic {
        l,
        k,
        rho_e,
        kernel: kernel.id(),
        scaling,
        value,
        stderr,
        n_samples: s.len(),
    })
}

/// One side of a universality comparison: samples plus the equilibrium
/// measure of the potential they were drawn from.
#[derive(Debug, Clone, Copy)]
pub struct GapEnsemble<'a> {
    pub samples: &'a SampleSet,
    pub equilibrium: &'a EquilibriumMeasure,
    /// Reference energy inside the support.
    pub energy: f64,
}

impl GapEnsemble<'_> {
    /// Window start placing `[L+1, L+K]` symmetrically around the particle
    /// index `N int_A^E rho`, kept inside the valid range. Centering removes
    /// the first-order drift of the density across the window.
    pub fn window_start(&self, k: usize) -> Result<usize> {
        let n = self.samples.n();
        if k + 1 > n {
            return Err(Error::WindowOutOfRange { first: 1, last: k, n });
        }
        let center = n as f64 * self.equilibrium.cdf(self.energy);
        let l = (center - 0.5 * k as f64).round().max(0.0) as usize;
        Ok(l.min(n - k - 1))
    }

    pub fn density(&self) -> f64 {
        self.equilibrium.density(self.energy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityComparison {
    /// Target statistic minus reference statistic.
    pub delta: f64,
    pub combined_stderr: f64,
    pub target: GapStatistic,
    pub reference: GapStatistic,
}

/// Gap statistic of `target` minus that of `reference`, each with its window
/// placed by its own CDF at its own energy and normalized by its own density.
pub fn universality_compare(
    target: &GapEnsemble<'_>,
    reference: &GapEnsemble<'_>,
    k: usize,
    kernel: &GapKernel,
    scaling: GapScaling,
) -> Result<UniversalityComparison> {
    let (a, b) = target.equilibrium.support();
    let (a2, b2) = reference.equilibrium.support();
    if !(target.energy > a && target.energy < b && reference.energy > a2 && reference.energy < b2) {
        return Err(Error::InvalidArgument("reference energies must lie inside the supports".into()));
    }
    let t = gap_statistic(target.samples, target.window_start(k)?, k, target.density(), kernel, scaling)?;
    let r = gap_statistic(
        reference.samples,
        reference.window_start(k)?,
        k,
        reference.density(),
        kernel,
        scaling,
    )?;
    Ok(UniversalityComparison {
        delta: t.value - r.value,
        combined_stderr: t.stderr.hypot(r.stderr),
        target: t,
        reference: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::sampler::{sample_gaussian_beta_set, Configuration};

    fn equally_spaced(n: usize, step: f64) -> SampleSet {
        let c = Configuration::new((0..n).map(|i| i as f64 * step).collect()).unwrap();
        SampleSet::from_configs(vec![c], 2.0, "lattice").unwrap()
    }

    #[test]
    fn constant_gaps_give_kernel_value_over_rho() {
        let n = 50;
        let rho = 0.4;
        let g0 = 1.3;
        // N * step / rho = g0
        let s = equally_spaced(n, g0 * rho / n as f64);
        let kernel = GapKernel::bump(2.0);
        let st = gap_statistic(&s, 10, 7, rho, &kernel, GapScaling::Literal).unwrap();
        assert!((st.value - kernel.eval(g0) / rho).abs() < 1e-12);
    }

    #[test]
    fn kernel_support_kills_large_gaps() {
        let s = equally_spaced(30, 1.0);
        let kernel = GapKernel::Bump { center: 0.5, width: 0.5 };
        let st = gap_statistic(&s, 3, 5, 1.0, &kernel, GapScaling::Literal).unwrap();
        assert_eq!(st.value, 0.0);
    }

    #[test]
    fn window_range_is_checked() {
        let s = equally_spaced(10, 0.1);
        let kernel = GapKernel::default();
        assert!(matches!(
            gap_statistic(&s, 5, 5, 1.0, &kernel, GapScaling::Literal),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(gap_statistic(&s, 4, 5, 1.0, &kernel, GapScaling::Literal).is_ok());
    }

    #[test]
    fn windowed_data_drops_the_dangling_term() {
        let mut s = equally_spaced(12, 0.05);
        let kernel = GapKernel::bump(2.0);
        let full = gap_statistic(&s, 3, 4, 1.0, &kernel, GapScaling::Unfolded).unwrap();
        s.meta.window = Some((3, 4));
        let win = gap_statistic(&s, 3, 4, 1.0, &kernel, GapScaling::Unfolded).unwrap();
        assert!((win.value - full.value * 3.0 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn single_offset_tuple_matches_gap_statistic() {
        let s = sample_gaussian_beta_set(40, 2.0, 50, 2, 2).unwrap();
        let kernel = GapKernel::bump(2.0);
        for scaling in [GapScaling::Literal, GapScaling::Unfolded] {
            let a = gap_statistic(&s, 10, 8, 0.45, &kernel, scaling).unwrap();
            let b = gap_mtuple_statistic(&s, 10, 8, 0.45, &[1], &ProductKernel(vec![kernel]), scaling).unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn equal_offsets_see_zero_differences() {
        let s = equally_spaced(20, 0.1);
        let k = GapKernel::bump(2.0);
        // second coordinate is lambda_{i+1} - lambda_{i+1} = 0
        let tup = gap_mtuple_statistic(&s, 2, 4, 1.0, &[1, 1], &ProductKernel(vec![k, k]), GapScaling::Unfolded).unwrap();
        let one = gap_statistic(&s, 2, 4, 1.0, &k, GapScaling::Unfolded).unwrap();
        assert!((tup.value - one.value * k.eval(0.0)).abs() < 1e-15);
    }

    #[test]
    fn translation_and_relabeling_invariance() {
        let s = sample_gaussian_beta_set(30, 2.0, 40, 2, 7).unwrap();
        let kernel = GapKernel::bump(2.0);
        let base = gap_statistic(&s, 5, 10, 0.45, &kernel, GapScaling::Literal).unwrap();
        let mut shifted = s.clone();
        for c in &mut shifted.configs {
            *c = Configuration::new(c.as_slice().iter().map(|x| x + 0.37).collect()).unwrap();
        }
        let t = gap_statistic(&shifted, 5, 10, 0.45, &kernel, GapScaling::Literal).unwrap();
        assert!((t.value - base.value).abs() < 1e-12);
        let mut rev = s.clone();
        rev.configs.reverse();
        rev.chain_ids.reverse();
        let r = gap_statistic(&rev, 5, 10, 0.45, &kernel, GapScaling::Literal).unwrap();
        assert!((r.value - base.value).abs() < 1e-12);
    }

    #[test]
    fn gaussian_self_comparison() {
        let eq = EquilibriumMeasure::solve(&Potential::quadratic(1.0).unwrap()).unwrap();
        let a = sample_gaussian_beta_set(200, 2.0, 400, 4, 1).unwrap();
        let b = sample_gaussian_beta_set(200, 2.0, 400, 4, 2).unwrap();
        let kernel = GapKernel::bump(2.0);
        let cmp = universality_compare(
            &GapEnsemble { samples: &a, equilibrium: &eq, energy: -0.3 },
            &GapEnsemble { samples: &b, equilibrium: &eq, energy: 0.2 },
            14,
            &kernel,
            GapScaling::Unfolded,
        )
        .unwrap();
        assert!(cmp.delta.abs() < 3.0 * cmp.combined_stderr + 1e-12, "{cmp:?}");
        assert!(cmp.target.l < cmp.reference.l);
    }
}
