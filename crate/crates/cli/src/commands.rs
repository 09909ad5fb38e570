//! The subcommands. Each returns the paths it wrote plus a JSON summary for
//! the run manifest.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use loggas_core::diagnostics::{
    concentration_check, empirical_stieltjes, gap_mtuple_statistic, good_set_check, loop_residual, rigidity_ladder,
    rigidity_report, universality_compare, GapEnsemble, GapScaling, GoodSetParams, ProductKernel, Verdict,
};
use loggas_core::sampler::{
    init_from_classical_locations, run_chain_with_checkpoints, sample_gaussian_beta_set, BoundaryCondition,
    LocalConstraint,
};
use loggas_core::samples_io::{read_binary, write_binary, write_csv};
use loggas_core::{
    ChainConfig, Configuration, EquilibriumMeasure, Potential, PotentialKind, SampleSet, SolveOptions, TargetSpec,
};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{hex, ExperimentConfig, SamplerKind};
use crate::error::CliError;
use crate::output::{create, histogram_svg, num, Csv};

pub struct RunOutput {
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

pub fn solve_equilibrium(kind: &PotentialKind, quadrature: usize) -> Result<EquilibriumMeasure, CliError> {
    let p = Potential::new(kind.clone())?;
    Ok(EquilibriumMeasure::solve_with(
        &p,
        SolveOptions {
            quadrature_order: quadrature,
            ..SolveOptions::default()
        },
    )?)
}

/// `eq`: density and CDF table, optionally followed by classical locations.
pub fn eq(
    kind: &PotentialKind,
    quadrature: usize,
    points: usize,
    gamma: Option<usize>,
    out: &Path,
    config_hash: &str,
) -> Result<RunOutput, CliError> {
    let eq = solve_equilibrium(kind, quadrature)?;
    let mut csv = Csv::new(config_hash, "t,rho,cdf");
    for (t, rho, cdf) in eq.table(points) {
        csv.row(&[num(t), num(rho), num(cdf)]);
    }
    if let Some(n) = gamma {
        if n == 0 {
            return Err(CliError::schema("--gamma", "needs at least one particle"));
        }
        csv.section(&format!("classical locations, N = {n}"), "j,gamma");
        for (j, g) in eq.classical_locations(n).gamma.iter().enumerate() {
            csv.row(&[(j + 1).to_string(), num(*g)]);
        }
    }
    csv.write(out)?;
    let (a, b) = eq.support();
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "support": [a, b], "rho_at_center": eq.density(eq.center()) }),
    })
}

/// Builds the target described by `cfg` at `n` particles.
pub fn build_target(cfg: &ExperimentConfig, n: usize, eq: &EquilibriumMeasure) -> Result<TargetSpec, CliError> {
    let mut t = TargetSpec::new(cfg.build_potential(), cfg.beta, n);
    if let Some(w) = &cfg.window {
        let y = match &w.values {
            Some(v) => v.clone(),
            None => {
                let mid = eq.midpoint_locations(n);
                mid[..w.l].iter().chain(&mid[w.l + w.k..]).copied().collect()
            }
        };
        t = t.with_window(BoundaryCondition::new(w.l, w.k, y)?);
    }
    if let Some(c) = &cfg.confinement {
        let centers = c.centers.clone().unwrap_or_else(|| eq.midpoint_locations(n));
        t = t.with_confinement(c.tau, centers);
    }
    if cfg.constraint.enabled {
        t = t.with_constraint(constraint(cfg, n));
    }
    if let Some(r) = cfg.truncation {
        t = t.with_truncation(r);
    }
    t.validate()?;
    Ok(t)
}

pub fn constraint(cfg: &ExperimentConfig, n: usize) -> LocalConstraint {
    LocalConstraint {
        k: cfg.constraint.k.unwrap_or(n / 2),
        m: cfg.constraint.m,
        eps: cfg.constraint.eps,
    }
}

fn checkpoint_path(base: &Path, chain: usize) -> PathBuf {
    let mut name = base.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".chain{chain}.ckpt"));
    base.with_file_name(name)
}

/// Draws samples as configured. MALA runs write per-chain checkpoints next
/// to `checkpoint_base` when one is given.
pub fn draw_samples(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
    checkpoint_base: Option<&Path>,
) -> Result<SampleSet, CliError> {
    let c = &cfg.chain;
    match c.sampler {
        SamplerKind::Tridiagonal => {
            let mut s = sample_gaussian_beta_set(n, cfg.beta, c.draws, c.streams, seed)?;
            // the tridiagonal model targets V = x^2; V = a x^2 rescales by 1/sqrt(a)
            if let PotentialKind::Quadratic { a } = cfg.potential {
                if a != 1.0 {
                    let scale = a.sqrt().recip();
                    for conf in &mut s.configs {
                        *conf = Configuration::new(conf.as_slice().iter().map(|x| x * scale).collect())?;
                    }
                }
            }
            Ok(s)
        }
        SamplerKind::Mala => {
            let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
            let target = build_target(cfg, n, &eq)?;
            let init = init_from_classical_locations(&eq, &target);
            let chain_cfg = ChainConfig {
                step_size: c.step_size,
                n_steps: c.n_steps,
                burn_in: c.burn_in,
                thin: c.thin,
                n_chains: c.n_chains,
                base_seed: seed,
                adapt: c.adapt,
                target_accept: c.target_accept,
            };
            let hash = cfg.hash();
            let beta = cfg.beta;
            let window = target.window.as_ref().map(|w| (w.l(), w.k()));
            let hook = |chain: usize, configs: &[Configuration]| {
                let Some(base) = checkpoint_base else { return };
                if configs.is_empty() {
                    return;
                }
                let Ok(mut s) = SampleSet::from_configs(configs.to_vec(), beta, "checkpoint") else {
                    return;
                };
                s.meta.window = window;
                let path = checkpoint_path(base, chain);
                let tmp = path.with_extension("ckpt.tmp");
                let written = create(&tmp)
                    .map_err(|e| e.to_string())
                    .and_then(|mut w| write_binary(&mut w, &s, hash).map_err(|e| e.to_string()))
                    .and_then(|_| std::fs::rename(&tmp, &path).map_err(|e| e.to_string()));
                if let Err(e) = written {
                    eprintln!("warning: checkpoint {} failed: {e}", path.display());
                }
            };
            let every = if checkpoint_base.is_some() { c.checkpoint_every } else { 0 };
            Ok(run_chain_with_checkpoints(&target, &init, &chain_cfg, every, Some(&hook))?)
        }
    }
}

/// Reads `--samples` or draws a fresh set at the configured `n`.
pub fn obtain_samples(cfg: &ExperimentConfig, samples: Option<&Path>) -> Result<SampleSet, CliError> {
    match samples {
        Some(path) => read_samples(cfg, path),
        None => draw_samples(cfg, cfg.primary_n(), cfg.base_seed, None),
    }
}

pub fn read_samples(cfg: &ExperimentConfig, path: &Path) -> Result<SampleSet, CliError> {
    let f = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (header, s) = read_binary(&mut BufReader::new(f), cfg.beta).map_err(|source| CliError::Samples {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(n) = cfg.n {
        if n != header.n {
            return Err(CliError::schema("n", format!("config says {n} but {} holds N = {}", path.display(), header.n)));
        }
    }
    if header.config_hash != cfg.hash() && header.config_hash != [0; 32] {
        eprintln!(
            "note: {} was produced by config {}, not this one",
            path.display(),
            hex(&header.config_hash)
        );
    }
    if s.is_empty() {
        return Err(loggas_core::Error::EmptySampleSet.into());
    }
    Ok(s)
}

/// `sample`: binary (or CSV) sample file.
pub fn sample(cfg: &ExperimentConfig, out: &Path, as_csv: bool) -> Result<RunOutput, CliError> {
    let checkpoints = (cfg.chain.sampler == SamplerKind::Mala && cfg.chain.checkpoint_every > 0).then_some(out);
    let s = draw_samples(cfg, cfg.primary_n(), cfg.base_seed, checkpoints)?;
    let mut w = create(out)?;
    let io = |source: std::io::Error| CliError::Io {
        path: out.to_path_buf(),
        source,
    };
    if as_csv {
        use std::io::Write;
        writeln!(w, "# config_hash={}", cfg.hash_hex()).map_err(io)?;
        write_csv(&mut w, &s).map_err(io)?;
        w.flush().map_err(io)?;
    } else {
        write_binary(&mut w, &s, cfg.hash()).map_err(|source| CliError::Samples {
            path: out.to_path_buf(),
            source,
        })?;
        use std::io::Write;
        w.flush().map_err(io)?;
    }
    // a finished run supersedes its checkpoints
    if checkpoints.is_some() {
        for chain in 0..cfg.chain.n_chains {
            let _ = std::fs::remove_file(checkpoint_path(out, chain));
        }
    }
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({
            "n": s.n(),
            "count": s.len(),
            "chains": s.n_chains(),
            "acceptance": s.meta.acceptance,
            "step_sizes": s.meta.step_sizes,
            "target": s.meta.description,
        }),
    })
}

/// CSV field in double quotes; kernel ids contain commas.
fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn default_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

fn scaling_name(s: GapScaling) -> &'static str {
    match s {
        GapScaling::Literal => "literal",
        GapScaling::Unfolded => "unfolded",
    }
}

/// `gaps`: windowed gap statistics, one row per scaling.
pub fn gaps(
    cfg: &ExperimentConfig,
    samples: Option<&Path>,
    out: &Path,
    svg: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let s = obtain_samples(cfg, samples)?;
    let n = s.n();
    let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
    let g = &cfg.gaps;
    let k = g.k.unwrap_or_else(|| default_k(n));
    let ens = GapEnsemble {
        samples: &s,
        equilibrium: &eq,
        energy: g.energy,
    };
    let l = match g.l {
        Some(l) => l,
        None => ens.window_start(k)?,
    };
    let rho = eq.density(g.energy);
    if !(rho > 0.0) {
        return Err(CliError::schema("gaps.energy", format!("{} lies outside the support", g.energy)));
    }
    let kernel = ProductKernel(vec![cfg.kernel; g.offsets.len()]);
    let mut csv = Csv::new(&cfg.hash_hex(), "scaling,kernel,L,K,value,stderr");
    let mut rows = Vec::new();
    for &scaling in &g.scalings {
        let st = gap_mtuple_statistic(&s, l, k, rho, &g.offsets, &kernel, scaling)?;
        csv.row(&[
            scaling_name(scaling).into(),
            quoted(&st.kernel),
            l.to_string(),
            k.to_string(),
            num(st.value),
            num(st.stderr),
        ]);
        rows.push(json!({ "scaling": scaling_name(scaling), "value": st.value, "stderr": st.stderr }));
    }
    csv.write(out)?;
    let mut outputs = vec![out.to_path_buf()];
    if let Some(path) = svg {
        let spacings: Vec<f64> = s
            .configs
            .iter()
            .flat_map(|c| {
                let x = c.as_slice();
                (l..(l + k).min(n - 1)).map(move |i| n as f64 * rho * (x[i + 1] - x[i]))
            })
            .collect();
        let title = format!("unfolded spacings, N = {n}, E = {}, window {}..{}", g.energy, l + 1, l + k);
        let text = histogram_svg(&spacings, 0.0, 4.0, g.bins, &title, &cfg.hash_hex());
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        outputs.push(path.to_path_buf());
    }
    Ok(RunOutput {
        outputs,
        summary: json!({ "n": n, "samples": s.len(), "l": l, "k": k, "rho": rho, "rows": rows }),
    })
}

/// `loop`: empirical Stieltjes transform and loop residual along `E + i eta`.
pub fn loop_equation(cfg: &ExperimentConfig, samples: Option<&Path>, out: &Path) -> Result<RunOutput, CliError> {
    let s = obtain_samples(cfg, samples)?;
    let p = cfg.build_potential();
    let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
    let mut csv = Csv::new(&cfg.hash_hex(), "re_z,im_z,re_m_hat,im_m_hat,abs_residual,stderr");
    let mut worst: f64 = 0.0;
    for &e in &cfg.loop_eq.energies {
        let z = Complex64::new(e, cfg.loop_eq.eta);
        let est = empirical_stieltjes(&s, &p, &eq, z)?;
        let r = loop_residual(&est, &eq).norm();
        worst = worst.max(r);
        csv.row(&[num(z.re), num(z.im), num(est.m_hat.re), num(est.m_hat.im), num(r), num(est.stderr)]);
    }
    csv.write(out)?;
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "n": s.n(), "samples": s.len(), "max_abs_residual": worst }),
    })
}

/// `rigidity`: per-index deviation quantiles, over the ladder when given.
pub fn rigidity(cfg: &ExperimentConfig, samples: Option<&Path>, out: &Path) -> Result<RunOutput, CliError> {
    let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
    let sets: Vec<SampleSet> = match samples {
        Some(path) => vec![read_samples(cfg, path)?],
        None => cfg
            .ladder()
            .into_iter()
            .map(|n| draw_samples(cfg, n, cfg.base_seed, None))
            .collect::<Result<_, _>>()?,
    };
    let mut reports = Vec::new();
    for s in &sets {
        reports.push(rigidity_report(s, &eq.classical_locations(s.n()), cfg.rigidity_alpha)?);
    }
    let mut csv = Csv::new(&cfg.hash_hex(), "n,k,median,q99");
    for r in &reports {
        for k in 0..r.n {
            csv.row(&[r.n.to_string(), (k + 1).to_string(), num(r.median[k]), num(r.q99[k])]);
        }
    }
    let refs: Vec<_> = reports.iter().collect();
    let fit = if reports.len() >= 3 {
        let fit = rigidity_ladder(&refs)?;
        csv.comment(&format!(
            "ladder slope={} intercept={} residual={}",
            num(fit.slope),
            num(fit.intercept),
            num(fit.residual)
        ));
        Some(fit)
    } else {
        None
    };
    csv.write(out)?;
    let medians: Vec<_> = reports.iter().map(|r| json!({ "n": r.n, "bulk_median": r.bulk_median })).collect();
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "bulk_medians": medians, "fit": fit }),
    })
}

/// `compare`: the configured ensemble against the Gaussian tridiagonal
/// reference at the same `beta` and `N`.
pub fn compare(cfg: &ExperimentConfig, samples: Option<&Path>, out: &Path) -> Result<RunOutput, CliError> {
    let s = obtain_samples(cfg, samples)?;
    let n = s.n();
    let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
    let gauss_eq = solve_equilibrium(&PotentialKind::Quadratic { a: 1.0 }, cfg.quadrature)?;
    let c = &cfg.compare;
    let reference = sample_gaussian_beta_set(
        n,
        cfg.beta,
        c.reference_draws,
        c.reference_streams,
        cfg.base_seed.wrapping_add(1),
    )?;
    let k = c.k.unwrap_or_else(|| default_k(n));
    let target = GapEnsemble {
        samples: &s,
        equilibrium: &eq,
        energy: c.energy,
    };
    let refe = GapEnsemble {
        samples: &reference,
        equilibrium: &gauss_eq,
        energy: c.reference_energy,
    };
    let mut csv = Csv::new(
        &cfg.hash_hex(),
        "scaling,kernel,K,L_target,L_reference,target,reference,delta,stderr",
    );
    let mut rows = Vec::new();
    for &scaling in &cfg.gaps.scalings {
        let u = universality_compare(&target, &refe, k, &cfg.kernel, scaling)?;
        csv.row(&[
            scaling_name(scaling).into(),
            quoted(&u.target.kernel),
            k.to_string(),
            u.target.l.to_string(),
            u.reference.l.to_string(),
            num(u.target.value),
            num(u.reference.value),
            num(u.delta),
            num(u.combined_stderr),
        ]);
        rows.push(json!({ "scaling": scaling_name(scaling), "delta": u.delta, "stderr": u.combined_stderr }));
    }
    csv.write(out)?;
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "n": n, "target_samples": s.len(), "reference_samples": reference.len(), "rows": rows }),
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "violated",
        Verdict::Unknown => "unknown",
    }
}

/// `goodset`: each sampled configuration checked as a boundary condition.
pub fn goodset(
    cfg: &ExperimentConfig,
    samples: Option<&Path>,
    conditional: Option<&Path>,
    out: &Path,
) -> Result<RunOutput, CliError> {
    let s = obtain_samples(cfg, samples)?;
    let n = s.n();
    let eq = solve_equilibrium(&cfg.potential, cfg.quadrature)?;
    let gamma = eq.classical_locations(n);
    let gs = &cfg.goodset;
    let k = gs.k.or(cfg.window.as_ref().map(|w| w.k)).unwrap_or_else(|| default_k(n));
    let l = gs
        .l
        .or(cfg.window.as_ref().map(|w| w.l))
        .unwrap_or_else(|| (n.saturating_sub(k)) / 2);
    let params = GoodSetParams {
        delta: gs.delta,
        eps0: gs.eps0,
        kappa: gs.kappa,
        l,
        k,
    };
    let cond = conditional.map(|p| read_samples(cfg, p)).transpose()?;
    let mut csv = Csv::new(
        &cfg.hash_hex(),
        "sample,near_classical,globally_close,conditional_second_moment,edge_gaps,worst_index,worst_deviation,good",
    );
    let mut good = 0;
    for (i, c) in s.configs.iter().enumerate() {
        let y = BoundaryCondition::from_configuration(c, l, k)?;
        let r = good_set_check(&y, &gamma, &params, cond.as_ref())?;
        if r.is_good() {
            good += 1;
        }
        csv.row(&[
            i.to_string(),
            r.near_classical.to_string(),
            r.globally_close.to_string(),
            format!("estimated_{}", verdict_name(r.conditional_second_moment)),
            r.edge_gaps.to_string(),
            r.worst_index.to_string(),
            num(r.worst_deviation),
            r.is_good().to_string(),
        ]);
    }
    csv.comment(&format!("good {good} of {}", s.len()));
    csv.write(out)?;
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "l": l, "k": k, "good": good, "checked": s.len() }),
    })
}

/// `concentration`: empirical tails of `v . lambda` on the constrained block
/// against the Gaussian-type bound.
pub fn concentration(cfg: &ExperimentConfig, samples: Option<&Path>, out: &Path) -> Result<RunOutput, CliError> {
    if !cfg.constraint.enabled {
        return Err(CliError::schema("constraint", "concentration needs a [constraint] section"));
    }
    let s = obtain_samples(cfg, samples)?;
    let con = constraint(cfg, s.n());
    let v = match &cfg.concentration.v {
        Some(v) => v.clone(),
        None => {
            let mut v = vec![0.0; con.block_len()];
            v[con.m] = 1.0;
            v[con.m + 1] = -1.0;
            v
        }
    };
    if v.len() != con.block_len() {
        return Err(CliError::schema(
            "concentration.v",
            format!("expected 2m + 1 = {} entries, got {}", con.block_len(), v.len()),
        ));
    }
    let rows = concentration_check(&s, &con, &v, &cfg.concentration.x)?;
    let mut csv = Csv::new(&cfg.hash_hex(), "x,empirical_tail,bound");
    let mut violations = 0;
    for r in &rows {
        if r.empirical_tail > r.bound {
            violations += 1;
        }
        csv.row(&[num(r.x), num(r.empirical_tail), num(r.bound)]);
    }
    csv.write(out)?;
    Ok(RunOutput {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "n": s.n(), "samples": s.len(), "rows_above_bound": violations }),
    })
}
