//! Metropolis-adjusted Langevin chains on the ordered simplex.
//!
//! Only the free coordinates move. A proposal that breaks the ordering,
//! leaves the window or truncation interval, or creates a gap below
//! [`MIN_GAP`] is rejected outright; the target vanishes there, so the
//! accept/reject step keeps detailed balance on the simplex.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{chain_rng, ChainConfig, Configuration, SampleMeta, SampleSet, TargetSpec, MIN_GAP};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};

/// Minimum spacing enforced when building a starting configuration.
const INIT_MIN_GAP: f64 = 1e-9;

/// Callback receiving `(chain, stored configurations so far)`.
pub type CheckpointHook<'a> = dyn Fn(usize, &[Configuration]) + Sync + 'a;

/// Runs `cfg.n_chains` independent chains from `init` in parallel and merges
/// them in chain order.
pub fn run_chain(target: &TargetSpec, init: &Configuration, cfg: &ChainConfig) -> Result<SampleSet> {
    run_chain_with_checkpoints(target, init, cfg, 0, None)
}

/// Like [`run_chain`], calling `hook` every `every_accepted` accepted moves
/// of each chain (0 disables checkpoints).
pub fn run_chain_with_checkpoints(
    target: &TargetSpec,
    init: &Configuration,
    cfg: &ChainConfig,
    every_accepted: usize,
    hook: Option<&CheckpointHook<'_>>,
) -> Result<SampleSet> {
    target.validate()?;
    cfg.validate()?;
    if init.len() != target.n {
        return Err(Error::ShapeMismatch {
            expected: target.n,
            found: init.len(),
        });
    }
    if !target.log_density_unnormalized(init).is_finite() {
        return Err(Error::InfeasibleInit);
    }

    let runs: Vec<ChainRun> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|chain| run_single(target, init, cfg, chain, every_accepted, hook))
        .collect();

    let mut configs = Vec::new();
    let mut chain_ids = Vec::new();
    let mut acceptance = Vec::with_capacity(runs.len());
    let mut step_sizes = Vec::with_capacity(runs.len());
    for (chain, run) in runs.into_iter().enumerate() {
        chain_ids.extend(std::iter::repeat_n(chain, run.samples.len()));
        configs.extend(run.samples);
        acceptance.push(run.acceptance);
        step_sizes.push(run.step_size);
    }
    Ok(SampleSet {
        configs,
        chain_ids,
        meta: SampleMeta {
            seed: cfg.base_seed,
            n: target.n,
            beta: target.beta,
            acceptance,
            step_sizes,
            window: target.window.as_ref().map(|w| (w.l(), w.k())),
            constraint: target.constraint,
            description: describe(target),
        },
    })
}

fn describe(target: &TargetSpec) -> String {
    let mut parts = vec![format!(
        "beta-ensemble N={} beta={} V={:?}",
        target.n,
        target.beta,
        target.potential.kind()
    )];
    if let Some(w) = &target.window {
        parts.push(format!("window L={} K={}", w.l(), w.k()));
    }
    if let Some(c) = &target.confinement {
        parts.push(format!("confinement tau={}", c.tau));
    }
    if let Some(c) = &target.constraint {
        parts.push(format!("constraint k={} M={} eps={}", c.k, c.m, c.eps));
    }
    if let Some(t) = &target.truncation {
        parts.push(format!("truncation R={}", t.r));
    }
    parts.join("; ")
}

struct ChainRun {
    samples: Vec<Configuration>,
    acceptance: f64,
    step_size: f64,
}

/// Dual averaging of log step size toward a target acceptance rate.
struct DualAveraging {
    mu: f64,
    target: f64,
    h_bar: f64,
    log_step: f64,
    log_step_bar: f64,
    t: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(step: f64, target: f64) -> Self {
        DualAveraging {
            mu: (10.0 * step).ln(),
            target,
            h_bar: 0.0,
            log_step: step.ln(),
            log_step_bar: step.ln(),
            t: 0.0,
        }
    }

    fn update(&mut self, accept_prob: f64) -> f64 {
        self.t += 1.0;
        let w = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept_prob);
        self.log_step = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.t.powf(-Self::KAPPA);
        self.log_step_bar = eta * self.log_step + (1.0 - eta) * self.log_step_bar;
        self.log_step.exp()
    }

    fn final_step(&self) -> f64 {
        self.log_step_bar.exp()
    }
}

fn run_single(
    target: &TargetSpec,
    init: &Configuration,
    cfg: &ChainConfig,
    chain: usize,
    every_accepted: usize,
    hook: Option<&CheckpointHook<'_>>,
) -> ChainRun {
    let mut rng = chain_rng(cfg.base_seed, chain as u64);
    let n = target.n;
    let free = target.free_range();

    let mut x = init.as_slice().to_vec();
    let mut grad = vec![0.0; n];
    let mut lp = target.evaluate(&x, Some(&mut grad), true);

    let mut proposal = x.clone();
    let mut grad_prop = vec![0.0; n];

    let mut step = if cfg.step_size > 0.0 {
        cfg.step_size
    } else {
        0.5 / (n as f64 * target.beta.sqrt())
    };
    let mut adapter = cfg.adapt.then(|| DualAveraging::new(step, cfg.target_accept));

    let mut samples = Vec::with_capacity((cfg.n_steps - cfg.burn_in) / cfg.thin + 1);
    let mut accepted_after_burn_in = 0usize;
    let mut accepted_total = 0usize;

    for iteration in 0..cfg.n_steps {
        if iteration == cfg.burn_in {
            if let Some(a) = &adapter {
                step = a.final_step();
            }
            adapter = None;
        }
        let drift = 0.5 * step * step;
        for i in free.clone() {
            let noise: f64 = rng.sample(StandardNormal);
            proposal[i] = x[i] + drift * grad[i] + step * noise;
        }
        let feasible = proposal_is_feasible(target, &proposal, free.clone());
        let mut accept_prob = 0.0;
        let mut accept = false;
        if feasible {
            let lp_prop = target.evaluate(&proposal, Some(&mut grad_prop), true);
            // log q(x | x') - log q(x' | x)
            let mut forward = 0.0;
            let mut backward = 0.0;
            for i in free.clone() {
                let f = proposal[i] - x[i] - drift * grad[i];
                let b = x[i] - proposal[i] - drift * grad_prop[i];
                forward += f * f;
                backward += b * b;
            }
            let log_ratio = lp_prop - lp + (forward - backward) / (2.0 * step * step);
            accept_prob = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
            let u: f64 = rng.random();
            if u < accept_prob {
                accept = true;
                lp = lp_prop;
                std::mem::swap(&mut grad, &mut grad_prop);
                x[free.clone()].copy_from_slice(&proposal[free.clone()]);
            }
        }
        if !accept {
            proposal[free.clone()].copy_from_slice(&x[free.clone()]);
        }
        if let Some(a) = adapter.as_mut() {
            step = a.update(accept_prob);
        }
        if accept {
            accepted_total += 1;
            if iteration >= cfg.burn_in {
                accepted_after_burn_in += 1;
            }
            if every_accepted > 0 && accepted_total % every_accepted == 0 {
                if let Some(h) = hook {
                    h(chain, &samples);
                }
            }
        }
        if iteration >= cfg.burn_in && (iteration - cfg.burn_in) % cfg.thin == cfg.thin - 1 {
            debug_assert!(target.is_feasible(&x));
            samples.push(Configuration::from_vec_unchecked(x.clone()));
        }
    }

    ChainRun {
        samples,
        acceptance: accepted_after_burn_in as f64 / (cfg.n_steps - cfg.burn_in) as f64,
        step_size: step,
    }
}

fn proposal_is_feasible(target: &TargetSpec, x: &[f64], free: std::ops::Range<usize>) -> bool {
    let lo = free.start.saturating_sub(1);
    let hi = (free.end + 1).min(x.len());
    // ordering across the free block and its fixed neighbours
    if x[lo..hi].windows(2).any(|w| !(w[1] - w[0] >= MIN_GAP)) {
        return false;
    }
    if let Some(t) = &target.truncation {
        if x[free].iter().any(|v| !(v.abs() < t.r)) {
            return false;
        }
    }
    true
}

/// Starting configuration at the midpoint quantiles `(j - 1/2)/N` of the
/// equilibrium measure, clipped into the window and truncation bounds.
pub fn init_from_classical_locations(eq: &EquilibriumMeasure, target: &TargetSpec) -> Configuration {
    let n = target.n;
    let mut x = eq.midpoint_locations(n);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    if let Some(t) = &target.truncation {
        lo = -t.r;
        hi = t.r;
    }
    let free = target.free_range();
    if let Some(w) = &target.window {
        let b = &w.boundary;
        for (j, y) in b.indexed() {
            x[j - 1] = y;
        }
        lo = lo.max(b.left_wall());
        hi = hi.min(b.right_wall());
    }
    let k = free.len();
    if k > 0 {
        let margin = INIT_MIN_GAP.max(1e-6 * (hi - lo).min(1.0));
        let (lo_in, hi_in) = (lo + margin, hi - margin);
        for v in &mut x[free.clone()] {
            *v = v.clamp(lo_in, hi_in);
        }
        // enforce the minimum gap left to right, then pull back from the top
        for i in free.clone() {
            let floor = if i == free.start {
                if lo.is_finite() { lo_in } else { f64::NEG_INFINITY }
            } else {
                x[i - 1] + INIT_MIN_GAP
            };
            if x[i] < floor {
                x[i] = floor;
            }
        }
        for i in free.clone().rev() {
            let ceil = if i + 1 == free.end {
                if hi.is_finite() { hi_in } else { f64::INFINITY }
            } else {
                x[i + 1] - INIT_MIN_GAP
            };
            if x[i] > ceil {
                x[i] = ceil;
            }
        }
    }
    Configuration::from_vec_unchecked(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::sampler::{BoundaryCondition, LocalConstraint};

    fn gauss(beta: f64, n: usize) -> TargetSpec {
        TargetSpec::new(Potential::quadratic(1.0).unwrap(), beta, n)
    }

    fn solve(p: &Potential) -> EquilibriumMeasure {
        EquilibriumMeasure::solve(p).unwrap()
    }

    #[test]
    fn single_particle_gaussian_moments() {
        let t = gauss(2.0, 1);
        let cfg = ChainConfig {
            step_size: 0.8,
            n_steps: 200_000,
            burn_in: 2_000,
            thin: 1,
            n_chains: 2,
            base_seed: 11,
            ..ChainConfig::default()
        };
        let init = Configuration::new(vec![0.0]).unwrap();
        let s = run_chain(&t, &init, &cfg).unwrap();
        let xs: Vec<f64> = s.configs.iter().map(|c| c[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        // density exp(-lambda^2): variance 1/2; autocorrelation inflates the error
        // of the mean, 0.02 is several effective standard errors
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 0.5).abs() < 0.025, "var {var}");
        assert!(s.meta.acceptance.iter().all(|&a| a > 0.3 && a < 0.9));
    }

    #[test]
    fn window_samples_stay_inside_walls() {
        let p = Potential::quadratic(1.0).unwrap();
        let eq = solve(&p);
        let n = 20;
        let base = Configuration::new(eq.midpoint_locations(n)).unwrap();
        let bc = BoundaryCondition::from_configuration(&base, 8, 4).unwrap();
        let (lo, hi) = (bc.left_wall(), bc.right_wall());
        let t = gauss(2.0, n).with_window(bc);
        let init = init_from_classical_locations(&eq, &t);
        let cfg = ChainConfig {
            n_steps: 5_000,
            burn_in: 500,
            thin: 5,
            n_chains: 2,
            base_seed: 3,
            ..ChainConfig::default()
        };
        let s = run_chain(&t, &init, &cfg).unwrap();
        assert_eq!(s.meta.window, Some((8, 4)));
        for c in &s.configs {
            assert!(t.is_feasible(c.as_slice()));
            for &x in &c.as_slice()[8..12] {
                assert!(x > lo && x < hi);
            }
        }
    }

    #[test]
    fn init_examples() {
        let p = Potential::quadratic(1.0).unwrap();
        let eq = solve(&p);
        let init = init_from_classical_locations(&eq, &gauss(2.0, 3));
        assert!(init[1].abs() < 1e-12);
        assert!((init[0] + init[2]).abs() < 1e-12);

        let t = gauss(2.0, 50).with_truncation(1.0);
        let init = init_from_classical_locations(&eq, &t);
        assert!(init.as_slice().iter().all(|x| x.abs() < 1.0));
        assert!(t.log_density_unnormalized(&init).is_finite());

        // boundary whose walls are tighter than the classical locations
        let mut y: Vec<f64> = eq.midpoint_locations(10);
        y.drain(3..7);
        y[2] = -0.01;
        y[3] = 0.01;
        let bc = BoundaryCondition::new(3, 4, y).unwrap();
        let t = gauss(2.0, 10).with_window(bc);
        let init = init_from_classical_locations(&eq, &t);
        assert!(t.log_density_unnormalized(&init).is_finite());
        assert!(init.as_slice()[3..7].iter().all(|&x| x > -0.01 && x < 0.01));
    }

    #[test]
    fn infeasible_init_is_rejected() {
        let t = gauss(2.0, 2).with_truncation(1.0);
        let init = Configuration::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(run_chain(&t, &init, &ChainConfig::default()), Err(Error::InfeasibleInit));
    }

    #[test]
    fn runs_are_reproducible_across_thread_counts() {
        let p = Potential::quartic(1.0, 0.5).unwrap();
        let eq = solve(&p);
        let t = TargetSpec::new(p, 1.0, 12).with_constraint(LocalConstraint { k: 6, m: 2, eps: 0.1 });
        let init = init_from_classical_locations(&eq, &t);
        let cfg = ChainConfig {
            n_steps: 2_000,
            burn_in: 200,
            thin: 3,
            n_chains: 4,
            base_seed: 99,
            ..ChainConfig::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_chain(&t, &init, &cfg).unwrap());
        let b = three.install(|| run_chain(&t, &init, &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 4 * 600);
    }

    #[test]
    fn checkpoints_fire_on_accepted_moves() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let t = gauss(2.0, 4);
        let eq = solve(&t.potential);
        let init = init_from_classical_locations(&eq, &t);
        let cfg = ChainConfig {
            n_steps: 3_000,
            burn_in: 100,
            base_seed: 1,
            ..ChainConfig::default()
        };
        let calls = AtomicUsize::new(0);
        let hook = |_chain: usize, _s: &[Configuration]| {
            calls.fetch_add(1, Ordering::Relaxed);
        };
        let s = run_chain_with_checkpoints(&t, &init, &cfg, 500, Some(&hook)).unwrap();
        let accepted = (s.meta.acceptance[0] * 2_900.0).round() as usize;
        assert!(calls.load(Ordering::Relaxed) >= accepted / 500);
    }
}
