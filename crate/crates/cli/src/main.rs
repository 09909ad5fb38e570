use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use loggas_cli::commands::{self, RunOutput};
use loggas_cli::config::{hex, DEFAULT_QUADRATURE};
use loggas_cli::output::{write_manifest, Manifest};
use loggas_cli::{parse_config, parse_potential_spec, CliError, ExperimentConfig};
use sha2::{Digest, Sha256};

/// Numerical experiments on beta-ensembles with convex potentials.
#[derive(Parser)]
#[command(name = "loggas", version)]
struct Cli {
    /// Worker threads for sampling and estimators (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Diagnose {
    #[arg(long)]
    config: PathBuf,
    /// Binary sample file from `loggas sample`; drawn afresh when absent.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium density and CDF table.
    Eq {
        /// e.g. `quadratic`, `quartic:a=1,b=0.05`, `custom:0,0,1,0,0.5`.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        potential: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the classical locations for this many particles.
        #[arg(long)]
        gamma: Option<usize>,
        #[arg(long, default_value_t = 1025)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_QUADRATURE)]
        quadrature: usize,
    },
    /// Draw samples into a binary (or CSV) file.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write CSV instead of the binary format.
        #[arg(long)]
        csv: bool,
    },
    /// Windowed gap statistics.
    Gaps {
        #[command(flatten)]
        io: Diagnose,
        /// Histogram of the unfolded spacings in the window.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Empirical Stieltjes transform and loop-equation residual.
    Loop {
        #[command(flatten)]
        io: Diagnose,
    },
    /// Deviations from classical locations, over an N ladder if configured.
    Rigidity {
        #[command(flatten)]
        io: Diagnose,
    },
    /// Gap statistic against the Gaussian reference ensemble.
    Compare {
        #[command(flatten)]
        io: Diagnose,
    },
    /// Good-set conditions for sampled boundary configurations.
    Goodset {
        #[command(flatten)]
        io: Diagnose,
        /// Samples of the window-conditioned measure, for the second-moment condition.
        #[arg(long)]
        conditional: Option<PathBuf>,
    },
    /// Concentration of block gaps under the local constraint.
    Concentration {
        #[command(flatten)]
        io: Diagnose,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    parse_config(path)
}

struct Done {
    name: &'static str,
    out: PathBuf,
    hash: String,
    seed: u64,
    result: RunOutput,
}

fn run(command: Command) -> Result<Done, CliError> {
    let done = |name, out: PathBuf, cfg: &ExperimentConfig, result| Done {
        name,
        out,
        hash: cfg.hash_hex(),
        seed: cfg.base_seed,
        result,
    };
    Ok(match command {
        Command::Eq {
            potential,
            config,
            out,
            gamma,
            points,
            quadrature,
        } => {
            let (kind, quadrature) = match (potential, config) {
                (Some(spec), _) => (parse_potential_spec(&spec)?, quadrature),
                (None, Some(path)) => {
                    let cfg = load(&path)?;
                    (cfg.potential, cfg.quadrature)
                }
                (None, None) => unreachable!("clap requires one of --potential and --config"),
            };
            if points < 2 {
                return Err(CliError::schema("--points", "need at least 2"));
            }
            let key = serde_json::json!({ "command": "eq", "potential": kind, "quadrature": quadrature, "points": points, "gamma": gamma });
            let hash = hex(&Sha256::digest(key.to_string().as_bytes()));
            let result = commands::eq(&kind, quadrature, points, gamma, &out, &hash)?;
            Done {
                name: "eq",
                out,
                hash,
                seed: 0,
                result,
            }
        }
        Command::Sample { config, out, csv } => {
            let cfg = load(&config)?;
            let r = commands::sample(&cfg, &out, csv)?;
            done("sample", out, &cfg, r)
        }
        Command::Gaps { io, svg } => {
            let cfg = load(&io.config)?;
            let r = commands::gaps(&cfg, io.samples.as_deref(), &io.out, svg.as_deref())?;
            done("gaps", io.out, &cfg, r)
        }
        Command::Loop { io } => {
            let cfg = load(&io.config)?;
            let r = commands::loop_equation(&cfg, io.samples.as_deref(), &io.out)?;
            done("loop", io.out, &cfg, r)
        }
        Command::Rigidity { io } => {
            let cfg = load(&io.config)?;
            let r = commands::rigidity(&cfg, io.samples.as_deref(), &io.out)?;
            done("rigidity", io.out, &cfg, r)
        }
        Command::Compare { io } => {
            let cfg = load(&io.config)?;
            let r = commands::compare(&cfg, io.samples.as_deref(), &io.out)?;
            done("compare", io.out, &cfg, r)
        }
        Command::Goodset { io, conditional } => {
            let cfg = load(&io.config)?;
            let r = commands::goodset(&cfg, io.samples.as_deref(), conditional.as_deref(), &io.out)?;
            done("goodset", io.out, &cfg, r)
        }
        Command::Concentration { io } => {
            let cfg = load(&io.config)?;
            let r = commands::concentration(&cfg, io.samples.as_deref(), &io.out)?;
            done("concentration", io.out, &cfg, r)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not start {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let done = match run(cli.command) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let manifest = Manifest {
        command: done.name.into(),
        config_hash: done.hash,
        base_seed: done.seed,
        loggas_version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: done.result.outputs,
        summary: done.result.summary,
    };
    if let Err(e) = write_manifest(&done.out, &manifest) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::SUCCESS
}
