//! Experiment configuration files.
//!
//! A config is TOML with a few flat top-level keys and one table per
//! concern:
//!
//! ```toml
//! potential = "quartic"    # quadratic | quartic | custom
//! a = 1.0
//! b = 0.05
//! beta = 2.0
//! n = 200
//! base_seed = 7
//!
//! [chain]
//! n_steps = 20000
//! burn_in = 2000
//! thin = 10
//! n_chains = 4
//! ```
//!
//! Every key has a default except `beta` and `n` (or `n_ladder`). Unknown keys
//! are rejected, with a suggestion when a known key is close.

use std::fmt;
use std::path::Path;

use loggas_core::diagnostics::{GapKernel, GapScaling};
use loggas_core::sampler::LocalConstraint;
use loggas_core::{Potential, PotentialKind};
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

pub const DEFAULT_QUADRATURE: usize = 256;
pub const DEFAULT_EPS: f64 = LocalConstraint::DEFAULT_EPS;
pub const DEFAULT_TARGET_ACCEPT: f64 = 0.57;
pub const DEFAULT_CHECKPOINT_EVERY: usize = 10_000;

const TOP_KEYS: &[&str] = &[
    "potential", "a", "b", "coeffs", "quadrature", "beta", "n", "n_ladder", "base_seed",
];

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "chain",
        &[
            "sampler", "step_size", "n_steps", "burn_in", "thin", "n_chains", "adapt", "target_accept", "draws",
            "streams", "checkpoint_every",
        ],
    ),
    ("window", &["l", "k", "values"]),
    ("constraint", &["k", "m", "eps"]),
    ("confinement", &["tau", "centers"]),
    ("truncation", &["r"]),
    ("kernel", &["kind", "width", "center", "sigma", "omega"]),
    ("gaps", &["energy", "l", "k", "offsets", "scaling", "bins"]),
    ("loop", &["eta", "energies"]),
    ("rigidity", &["alpha"]),
    ("compare", &["energy", "reference_energy", "reference_draws", "reference_streams", "k"]),
    ("goodset", &["delta", "eps0", "kappa", "l", "k"]),
    ("concentration", &["x", "v"]),
];

/// One problem with a config, tied to the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Mala,
    /// Exact draws from the tridiagonal model; quadratic potential only.
    Tridiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSection {
    pub sampler: SamplerKind,
    pub step_size: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub adapt: bool,
    pub target_accept: f64,
    pub draws: usize,
    pub streams: usize,
    /// Accepted moves between checkpoint writes; 0 disables them.
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSection {
    pub l: usize,
    pub k: usize,
    /// Exterior particles; classical locations when absent.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintSection {
    /// Whether the target carries the gap penalty.
    pub enabled: bool,
    /// Block center; `N/2` when absent.
    pub k: Option<usize>,
    pub m: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfinementSection {
    pub tau: f64,
    pub centers: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapsSection {
    pub energy: f64,
    pub l: Option<usize>,
    pub k: Option<usize>,
    pub offsets: Vec<usize>,
    pub scalings: Vec<GapScaling>,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSection {
    pub eta: f64,
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSection {
    pub energy: f64,
    pub reference_energy: f64,
    pub reference_draws: usize,
    pub reference_streams: usize,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodsetSection {
    pub delta: f64,
    pub eps0: f64,
    pub kappa: f64,
    pub l: Option<usize>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSection {
    pub x: Vec<f64>,
    /// Test vector over the block; `(1, -1)` at the center when absent.
    pub v: Option<Vec<f64>>,
}

/// A validated config with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub potential: PotentialKind,
    pub quadrature: usize,
    pub beta: f64,
    pub n: Option<usize>,
    pub n_ladder: Vec<usize>,
    pub base_seed: u64,
    pub chain: ChainSection,
    pub window: Option<WindowSection>,
    pub constraint: ConstraintSection,
    pub confinement: Option<ConfinementSection>,
    pub truncation: Option<f64>,
    pub kernel: GapKernel,
    pub gaps: GapsSection,
    #[serde(rename = "loop")]
    pub loop_eq: LoopSection,
    pub rigidity_alpha: f64,
    pub compare: CompareSection,
    pub goodset: GoodsetSection,
    pub concentration: ConcentrationSection,
}

impl ExperimentConfig {
    /// SHA-256 of the resolved config, so two files that differ only in
    /// spelled-out defaults hash alike.
    pub fn hash(&self) -> [u8; 32] {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).into()
    }

    pub fn hash_hex(&self) -> String {
        hex(&self.hash())
    }

    pub fn build_potential(&self) -> Potential {
        Potential::new(self.potential.clone()).expect("validated at parse time")
    }

    /// The particle count, or the first rung of the ladder.
    pub fn primary_n(&self) -> usize {
        self.n.or_else(|| self.n_ladder.first().copied()).expect("validated at parse time")
    }

    /// `n_ladder` if given, otherwise just `n`.
    pub fn ladder(&self) -> Vec<usize> {
        if self.n_ladder.is_empty() {
            vec![self.primary_n()]
        } else {
            self.n_ladder.clone()
        }
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        CliError::Schema(vec![SchemaError {
            key: "<file>".into(),
            message: e.message().to_string(),
        }])
    })?;
    let mut errors = Vec::new();
    check_unknown_keys(&table, &mut errors);
    let cfg = resolve(&table, &mut errors);
    if errors.is_empty() {
        Ok(cfg.expect("no errors means a config"))
    } else {
        Err(CliError::Schema(errors))
    }
}

fn suggest(key: &str, known: &[&str]) -> String {
    let best = known
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((score, k)) if score > 0.8 => format!("unknown key; did you mean `{k}`?"),
        _ => format!("unknown key; expected one of {}", known.join(", ")),
    }
}

fn check_unknown_keys(table: &Table, errors: &mut Vec<SchemaError>) {
    let section_names: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
    let mut all_top: Vec<&str> = TOP_KEYS.to_vec();
    all_top.extend(&section_names);
    for (key, value) in table {
        if let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == key) {
            match value {
                Value::Table(inner) => {
                    for k in inner.keys() {
                        if !keys.contains(&k.as_str()) {
                            errors.push(SchemaError {
                                key: format!("{key}.{k}"),
                                message: suggest(k, keys),
                            });
                        }
                    }
                }
                _ => errors.push(SchemaError {
                    key: key.clone(),
                    message: "expected a table".into(),
                }),
            }
        } else if !TOP_KEYS.contains(&key.as_str()) {
            errors.push(SchemaError {
                key: key.clone(),
                message: suggest(key, &all_top),
            });
        }
    }
}

/// Typed access to one table, recording errors under dotted key names.
struct Fields<'a> {
    table: Option<&'a Table>,
    prefix: &'static str,
}

impl<'a> Fields<'a> {
    fn new(root: &'a Table, section: &'static str) -> Self {
        Fields {
            table: root.get(section).and_then(Value::as_table),
            prefix: section,
        }
    }

    fn root(root: &'a Table) -> Self {
        Fields {
            table: Some(root),
            prefix: "",
        }
    }

    fn present(&self) -> bool {
        self.table.is_some()
    }

    fn name(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn err(&self, errors: &mut Vec<SchemaError>, key: &str, message: impl Into<String>) {
        errors.push(SchemaError {
            key: self.name(key),
            message: message.into(),
        });
    }

    fn f64(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.err(errors, key, "expected a finite number");
                None
            }
        }
    }

    fn usize(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<usize> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            _ => {
                self.err(errors, key, "expected a non-negative integer");
                None
            }
        }
    }

    fn u64(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<u64> {
        self.usize(key, errors).map(|v| v as u64)
    }

    fn bool(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<bool> {
        match self.raw(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.err(errors, key, "expected true or false");
                None
            }
        }
    }

    fn str(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                self.err(errors, key, "expected a string");
                None
            }
        }
    }

    fn f64_list(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<Vec<f64>> {
        let arr = match self.raw(key)? {
            Value::Array(a) => a,
            _ => {
                self.err(errors, key, "expected an array of numbers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(x) if x.is_finite() => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.err(errors, key, "expected an array of finite numbers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn usize_list(&self, key: &str, errors: &mut Vec<SchemaError>) -> Option<Vec<usize>> {
        let arr = match self.raw(key)? {
            Value::Array(a) => a,
            _ => {
                self.err(errors, key, "expected an array of integers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Integer(i) if *i >= 0 => out.push(*i as usize),
                _ => {
                    self.err(errors, key, "expected an array of non-negative integers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn positive(&self, key: &str, default: f64, errors: &mut Vec<SchemaError>) -> f64 {
        match self.f64(key, errors) {
            Some(x) if x > 0.0 => x,
            Some(x) => {
                self.err(errors, key, format!("must be positive, got {x}"));
                default
            }
            None => default,
        }
    }

    fn count(&self, key: &str, default: usize, errors: &mut Vec<SchemaError>) -> usize {
        match self.usize(key, errors) {
            Some(0) => {
                self.err(errors, key, "must be at least 1");
                default
            }
            Some(v) => v,
            None => default,
        }
    }
}

fn resolve(root: &Table, errors: &mut Vec<SchemaError>) -> Option<ExperimentConfig> {
    let top = Fields::root(root);

    let potential = resolve_potential(&top, errors);
    let quadrature = top.count("quadrature", DEFAULT_QUADRATURE, errors);
    let beta = match top.f64("beta", errors) {
        Some(b) if b > 0.0 => b,
        Some(b) => {
            top.err(errors, "beta", format!("must be positive, got {b}"));
            1.0
        }
        None => {
            if top.raw("beta").is_none() {
                top.err(errors, "beta", "missing required key");
            }
            1.0
        }
    };
    let n = match top.usize("n", errors) {
        Some(0) => {
            top.err(errors, "n", "must be at least 1");
            None
        }
        other => other,
    };
    let n_ladder = top.usize_list("n_ladder", errors).unwrap_or_default();
    if n_ladder.iter().any(|&v| v < 2) {
        top.err(errors, "n_ladder", "every entry must be at least 2");
    }
    if n.is_none() && n_ladder.is_empty() && top.raw("n").is_none() {
        top.err(errors, "n", "missing required key (or give `n_ladder`)");
    }
    let base_seed = top.u64("base_seed", errors).unwrap_or(0);

    let c = Fields::new(root, "chain");
    let sampler = match c.str("sampler", errors) {
        None | Some("mala") => SamplerKind::Mala,
        Some("tridiagonal") => SamplerKind::Tridiagonal,
        Some(other) => {
            c.err(errors, "sampler", format!("unknown sampler {other:?}; use \"mala\" or \"tridiagonal\""));
            SamplerKind::Mala
        }
    };
    let target_accept = match c.f64("target_accept", errors) {
        Some(t) if t > 0.0 && t < 1.0 => t,
        Some(t) => {
            c.err(errors, "target_accept", format!("must lie in (0, 1), got {t}"));
            DEFAULT_TARGET_ACCEPT
        }
        None => DEFAULT_TARGET_ACCEPT,
    };
    let chain = ChainSection {
        sampler,
        step_size: c.f64("step_size", errors).unwrap_or(0.0),
        n_steps: c.count("n_steps", 10_000, errors),
        burn_in: c.usize("burn_in", errors).unwrap_or(1_000),
        thin: c.count("thin", 1, errors),
        n_chains: c.count("n_chains", 1, errors),
        adapt: c.bool("adapt", errors).unwrap_or(true),
        target_accept,
        draws: c.count("draws", 1_000, errors),
        streams: c.count("streams", 20, errors),
        checkpoint_every: c.usize("checkpoint_every", errors).unwrap_or(DEFAULT_CHECKPOINT_EVERY),
    };
    if chain.burn_in >= chain.n_steps {
        c.err(errors, "burn_in", format!("must be smaller than n_steps ({})", chain.n_steps));
    }

    let w = Fields::new(root, "window");
    let window = if w.present() {
        let l = w.usize("l", errors);
        let k = w.usize("k", errors);
        if l.is_none() {
            w.err(errors, "l", "missing required key");
        }
        if k.is_none() {
            w.err(errors, "k", "missing required key");
        }
        Some(WindowSection {
            l: l.unwrap_or(0),
            k: k.unwrap_or(0),
            values: w.f64_list("values", errors),
        })
    } else {
        None
    };

    let con = Fields::new(root, "constraint");
    let eps = match con.f64("eps", errors) {
        Some(e) if (0.0..1.0).contains(&e) => e,
        Some(e) => {
            con.err(errors, "eps", format!("must lie in [0, 1), got {e}"));
            DEFAULT_EPS
        }
        None => DEFAULT_EPS,
    };
    let constraint = ConstraintSection {
        enabled: con.present(),
        k: con.usize("k", errors),
        m: con.usize("m", errors).unwrap_or(10),
        eps,
    };

    let conf = Fields::new(root, "confinement");
    let confinement = conf.present().then(|| ConfinementSection {
        tau: conf.positive("tau", 1.0, errors),
        centers: conf.f64_list("centers", errors),
    });

    let tr = Fields::new(root, "truncation");
    let truncation = if tr.present() {
        let r = tr.positive("r", 1.0, errors);
        if tr.raw("r").is_none() {
            tr.err(errors, "r", "missing required key");
        }
        Some(r)
    } else {
        None
    };

    let kernel = resolve_kernel(&Fields::new(root, "kernel"), errors);

    let g = Fields::new(root, "gaps");
    let scalings = match g.str("scaling", errors) {
        None | Some("both") => vec![GapScaling::Literal, GapScaling::Unfolded],
        Some("literal") => vec![GapScaling::Literal],
        Some("unfolded") => vec![GapScaling::Unfolded],
        Some(other) => {
            g.err(errors, "scaling", format!("unknown scaling {other:?}; use literal, unfolded or both"));
            vec![GapScaling::Literal]
        }
    };
    let offsets = g.usize_list("offsets", errors).unwrap_or_else(|| vec![1]);
    if offsets.is_empty() || offsets.windows(2).any(|p| p[1] <= p[0]) || offsets[0] == 0 {
        g.err(errors, "offsets", "must be a nonempty strictly increasing list of positive integers");
    }
    let gaps = GapsSection {
        energy: g.f64("energy", errors).unwrap_or(0.0),
        l: g.usize("l", errors),
        k: g.usize("k", errors),
        offsets,
        scalings,
        bins: g.count("bins", 40, errors),
    };

    let lp = Fields::new(root, "loop");
    let loop_eq = LoopSection {
        eta: lp.positive("eta", 0.1, errors),
        energies: lp.f64_list("energies", errors).unwrap_or_else(|| vec![-1.0, -0.5, 0.0, 0.5, 1.0]),
    };

    let rg = Fields::new(root, "rigidity");
    let rigidity_alpha = match rg.f64("alpha", errors) {
        Some(a) if a > 0.0 && a < 0.5 => a,
        Some(a) => {
            rg.err(errors, "alpha", format!("must lie in (0, 1/2), got {a}"));
            0.1
        }
        None => 0.1,
    };

    let cmp = Fields::new(root, "compare");
    let compare = CompareSection {
        energy: cmp.f64("energy", errors).unwrap_or(0.0),
        reference_energy: cmp.f64("reference_energy", errors).unwrap_or(0.0),
        reference_draws: cmp.count("reference_draws", 2_000, errors),
        reference_streams: cmp.count("reference_streams", 20, errors),
        k: cmp.usize("k", errors),
    };

    let gs = Fields::new(root, "goodset");
    let goodset = GoodsetSection {
        delta: gs.positive("delta", 0.1, errors),
        eps0: gs.positive("eps0", 0.5, errors),
        kappa: gs.positive("kappa", 0.2, errors),
        l: gs.usize("l", errors),
        k: gs.usize("k", errors),
    };
    if !(goodset.kappa < 0.5) {
        gs.err(errors, "kappa", "must be below 1/2");
    }

    let cc = Fields::new(root, "concentration");
    let concentration = ConcentrationSection {
        x: cc
            .f64_list("x", errors)
            .unwrap_or_else(|| (1..=20).map(|i| 0.01 * i as f64).collect()),
        v: cc.f64_list("v", errors),
    };

    let cfg = ExperimentConfig {
        potential: potential?,
        quadrature,
        beta,
        n,
        n_ladder,
        base_seed,
        chain,
        window,
        constraint,
        confinement,
        truncation,
        kernel,
        gaps,
        loop_eq,
        rigidity_alpha,
        compare,
        goodset,
        concentration,
    };
    if errors.is_empty() {
        cross_check(&cfg, errors);
    }
    Some(cfg)
}

fn resolve_potential(top: &Fields<'_>, errors: &mut Vec<SchemaError>) -> Option<PotentialKind> {
    let kind = match top.str("potential", errors) {
        None => "quadratic",
        Some(k) => k,
    };
    let a = top.f64("a", errors).unwrap_or(1.0);
    let b = top.f64("b", errors).unwrap_or(0.0);
    let pk = match kind {
        "quadratic" => PotentialKind::Quadratic { a },
        "quartic" => PotentialKind::Quartic { a, b },
        "custom" => match top.f64_list("coeffs", errors) {
            Some(coeffs) => PotentialKind::Custom { coeffs },
            None => {
                top.err(errors, "coeffs", "required for a custom potential");
                return None;
            }
        },
        other => {
            let known = ["quadratic", "quartic", "custom"];
            let hint = suggest(other, &known).replace("unknown key", "unknown potential");
            top.err(errors, "potential", hint);
            return None;
        }
    };
    match Potential::new(pk.clone()) {
        Ok(_) => Some(pk),
        Err(e) => {
            top.err(errors, "potential", e.to_string());
            None
        }
    }
}

fn resolve_kernel(k: &Fields<'_>, errors: &mut Vec<SchemaError>) -> GapKernel {
    let kernel = match k.str("kind", errors) {
        None | Some("bump") => GapKernel::Bump {
            center: k.f64("center", errors).unwrap_or(0.0),
            width: k.positive("width", 2.0, errors),
        },
        Some("gauss_cosine") => GapKernel::GaussCosine {
            sigma: k.positive("sigma", 1.0, errors),
            omega: k.f64("omega", errors).unwrap_or(1.0),
        },
        Some(other) => {
            k.err(errors, "kind", format!("unknown kernel {other:?}; use bump or gauss_cosine"));
            GapKernel::default()
        }
    };
    if let Err(e) = kernel.validate() {
        k.err(errors, "kind", e.to_string());
    }
    kernel
}

/// Checks that need several keys at once.
fn cross_check(cfg: &ExperimentConfig, errors: &mut Vec<SchemaError>) {
    let push = |errors: &mut Vec<SchemaError>, key: &str, message: String| {
        errors.push(SchemaError {
            key: key.into(),
            message,
        })
    };
    let n = cfg.primary_n();
    if cfg.chain.sampler == SamplerKind::Tridiagonal {
        if !matches!(cfg.potential, PotentialKind::Quadratic { .. }) {
            push(errors, "chain.sampler", "the tridiagonal sampler needs potential = \"quadratic\"".into());
        }
        if cfg.window.is_some() || cfg.constraint.enabled || cfg.confinement.is_some() || cfg.truncation.is_some() {
            push(
                errors,
                "chain.sampler",
                "the tridiagonal sampler draws the plain ensemble; remove window, constraint, confinement and truncation"
                    .into(),
            );
        }
    }
    if let Some(w) = &cfg.window {
        if w.l < 1 || w.l + w.k + 1 > n || w.k == 0 {
            push(errors, "window", format!("need 1 <= l, k >= 1 and l + k + 1 <= n = {n}"));
        }
        if let Some(v) = &w.values {
            if v.len() + w.k != n {
                push(errors, "window.values", format!("expected n - k = {} values, got {}", n - w.k.min(n), v.len()));
            }
        }
    }
    if cfg.constraint.enabled {
        let k = cfg.constraint.k.unwrap_or(n / 2);
        let con = LocalConstraint {
            k,
            m: cfg.constraint.m,
            eps: cfg.constraint.eps,
        };
        if con.validate(n).is_err() {
            push(errors, "constraint", format!("block [k - m, k + m] = [{}, {}] must lie in 1..={n}", k as i64 - con.m as i64, k + con.m));
        }
    }
    if let Some(c) = &cfg.confinement {
        if let Some(centers) = &c.centers {
            if centers.len() != n {
                push(errors, "confinement.centers", format!("expected {n} values, got {}", centers.len()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_keys(text: &str) -> Vec<String> {
        match parse_config_str(text) {
            Err(CliError::Schema(errs)) => errs.into_iter().map(|e| e.key).collect(),
            other => panic!("expected schema errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config_str("beta = 2.0\nn = 10\n").unwrap();
        assert_eq!(cfg.potential, PotentialKind::Quadratic { a: 1.0 });
        assert_eq!(cfg.quadrature, 256);
        assert_eq!(cfg.constraint.eps, 0.1);
        assert_eq!(cfg.chain.target_accept, 0.57);
        assert_eq!(cfg.kernel, GapKernel::bump(2.0));
        assert_eq!(cfg.chain.checkpoint_every, 10_000);
    }

    #[test]
    fn negative_beta_names_the_key() {
        assert_eq!(schema_keys("beta = -1.0\nn = 10\n"), vec!["beta"]);
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        match parse_config_str("betaa = 2.0\nbeta = 1.0\nn = 4\n") {
            Err(CliError::Schema(errs)) => {
                assert_eq!(errs.len(), 1);
                assert_eq!(errs[0].key, "betaa");
                assert!(errs[0].message.contains("did you mean `beta`"), "{}", errs[0].message);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(schema_keys("beta = 1.0\nn = 4\n[chain]\nthinn = 3\n"), vec!["chain.thinn"]);
    }

    #[test]
    fn reports_every_problem() {
        let keys = schema_keys("beta = 0\nn = 4\n[chain]\nthin = 0\ntarget_accept = 2\n");
        assert!(keys.contains(&"beta".to_string()));
        assert!(keys.contains(&"chain.thin".to_string()));
        assert!(keys.contains(&"chain.target_accept".to_string()));
    }

    #[test]
    fn type_errors_name_the_key() {
        assert_eq!(schema_keys("beta = \"two\"\nn = 4\n"), vec!["beta"]);
        assert_eq!(schema_keys("beta = 1\nn = 4.5\n"), vec!["n"]);
    }

    #[test]
    fn cross_checks() {
        assert_eq!(
            schema_keys("beta = 1\nn = 10\npotential = \"quartic\"\nb = 1\n[chain]\nsampler = \"tridiagonal\"\n"),
            vec!["chain.sampler"]
        );
        assert_eq!(schema_keys("beta = 1\nn = 10\n[window]\nl = 8\nk = 3\n"), vec!["window"]);
        assert_eq!(schema_keys("beta = 1\nn = 10\n[constraint]\nk = 2\nm = 4\n"), vec!["constraint"]);
        assert_eq!(schema_keys("beta = 1\nn = 10\npotential = \"quartic\"\nb = -1\n"), vec!["potential"]);
    }

    #[test]
    fn hash_ignores_spelled_out_defaults() {
        let a = parse_config_str("beta = 2.0\nn = 10\n").unwrap();
        let b = parse_config_str("beta = 2.0\nn = 10\nquadrature = 256\n[chain]\nthin = 1\n").unwrap();
        let c = parse_config_str("beta = 2.0\nn = 11\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
