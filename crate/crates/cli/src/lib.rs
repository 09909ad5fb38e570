//! Library half of the `loggas` command: config parsing and the subcommand
//! implementations, kept out of `main.rs` so tests can call them.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use loggas_core::{Potential, PotentialKind};

pub use config::{parse_config, parse_config_str, ExperimentConfig, SchemaError};
pub use error::CliError;

/// Parses `quadratic`, `quadratic:a=0.5`, `quartic:a=1,b=0.05` or
/// `custom:c0,c1,c2,...` (monomial coefficients, lowest first).
pub fn parse_potential_spec(spec: &str) -> Result<PotentialKind, CliError> {
    let bad = |msg: String| CliError::schema("--potential", msg);
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let named = |key: &str, default: f64| -> Result<f64, CliError> {
        for part in args.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            if k.trim() == key {
                return v.trim().parse().map_err(|_| bad(format!("{key} is not a number: {v:?}")));
            }
        }
        Ok(default)
    };
    let check_keys = |allowed: &[&str]| -> Result<(), CliError> {
        for part in args.split(',').filter(|p| !p.trim().is_empty()) {
            let k = part.split_once('=').map_or(part, |(k, _)| k).trim();
            if !allowed.contains(&k) {
                return Err(bad(format!("unknown coefficient {k:?} for {name}")));
            }
        }
        Ok(())
    };
    let kind = match name.trim() {
        "quadratic" => {
            check_keys(&["a"])?;
            PotentialKind::Quadratic { a: named("a", 1.0)? }
        }
        "quartic" => {
            check_keys(&["a", "b"])?;
            PotentialKind::Quartic {
                a: named("a", 1.0)?,
                b: named("b", 0.0)?,
            }
        }
        "custom" => {
            let coeffs = args
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad(format!("custom coefficients must be numbers: {args:?}")))?;
            PotentialKind::Custom { coeffs }
        }
        other => return Err(bad(format!("unknown potential {other:?}; use quadratic, quartic or custom"))),
    };
    Potential::new(kind.clone()).map_err(|e| bad(e.to_string()))?;
    Ok(kind)
}
