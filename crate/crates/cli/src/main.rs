//! Command-line frontend: design, construct, simulate and evaluate
//! partitioned LDPC codes for a degraded eavesdropper setting.
//!
//! Exit codes: 0 success; 2 invalid input; 3 infeasible or no threshold;
//! 4 numerical failure; 1 anything else (I/O and the like).

mod commands;
mod config;
mod pipeline;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wiretap_ldpc::analysis::DeKernel;
use wiretap_ldpc::simulate::{Role, StopRule};

use config::{default_config_doc, parse_kernel, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "wiretap",
    version,
    about = "LDPC code design and evaluation for a wiretapped Gaussian channel"
)]
struct Cli {
    /// Root seed for any randomized stage (overrides the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (or directory for `pipeline`/`ingest`). Default: stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment config TOML; unset keys fall back to defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the binary-input AWGN channel capacity over an SNR range.
    Capacity {
        /// Lowest SNR γ = 1/σ² in the sweep.
        #[arg(long, default_value_t = 0.05)]
        gamma_lo: f64,
        /// Highest SNR γ in the sweep.
        #[arg(long, default_value_t = 20.0)]
        gamma_hi: f64,
        /// Number of log-spaced sweep points.
        #[arg(long, default_value_t = 60)]
        points: usize,
    },
    /// Density-evolution decoding thresholds of a design (or of every
    /// built-in reference pair when no design is given).
    Threshold {
        /// Design file produced by `optimize` or `ingest`.
        #[arg(long)]
        design: Option<PathBuf>,
        /// φ kernel: closed-form or quadrature.
        #[arg(long)]
        kernel: Option<String>,
    },
    /// Jointly optimize the two degree distributions for a rate pair.
    Optimize {
        #[arg(long)]
        rs: f64,
        #[arg(long)]
        rb: f64,
        /// Maximum variable degree for the legitimate receiver's code.
        #[arg(long, default_value_t = 50)]
        dv_b: u32,
        /// Maximum variable degree for the jammed receiver's code.
        #[arg(long, default_value_t = 50)]
        dv_f: u32,
        #[arg(long)]
        kernel: Option<String>,
    },
    /// Realize a design as a parity-check matrix and write it in alist form.
    Construct {
        #[arg(long)]
        design: PathBuf,
        /// Block length n.
        #[arg(long)]
        n: usize,
    },
    /// Monte-Carlo codeword error rate at fixed SNR points, or at the
    /// working point found for --target-cer.
    Simulate {
        /// alist file (the partition sidecar is read automatically).
        #[arg(long)]
        alist: PathBuf,
        /// Receiver: bob (full matrix) or frank (syndrome-aided submatrix).
        #[arg(long)]
        role: Role,
        /// E_b/N₀ points in dB; repeatable.
        #[arg(long = "ebn0-db")]
        ebn0_db: Vec<f64>,
        /// Search for the lowest SNR reaching this CER, then measure there.
        #[arg(long)]
        target_cer: Option<f64>,
        /// Resolution of the working-point search in dB.
        #[arg(long, default_value_t = 0.05)]
        tolerance_db: f64,
        /// Stop a point after this many frame errors.
        #[arg(long)]
        min_errors: Option<u64>,
        /// Stop a point after this many frames.
        #[arg(long)]
        max_frames: Option<u64>,
    },
    /// Equivocation and secrecy-capacity report for a design at one
    /// eavesdropper working point (plus the asymptotic benchmark row).
    Secrecy {
        #[arg(long)]
        design: PathBuf,
        /// Block length of the finite-length row.
        #[arg(long)]
        n: usize,
        /// Eavesdropper E_b/N₀ in dB (the jammed receiver's working point).
        #[arg(long)]
        frank_ebn0_db: f64,
        /// Jammed receiver's measured codeword error rate at that point.
        #[arg(long)]
        eta: f64,
    },
    /// Parse and validate a reference distribution file; optionally write
    /// full design files for each pair.
    Ingest {
        /// Distribution pairs file (defaults to the built-in table).
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<String>,
    },
    /// Run the whole grid from a config: optimize, construct, simulate,
    /// report, and write a deterministic manifest.
    Pipeline {},
    /// Print the reference config with every default documented.
    Defaults {},
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(ExperimentConfig::from_toml(&text)?)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn kernel_choice(flag: Option<&String>, cfg: &ExperimentConfig) -> anyhow::Result<DeKernel> {
    match flag {
        Some(name) => Ok(parse_kernel(name)?),
        None => Ok(cfg.kernel()),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(cli.config.as_ref())?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    let seed = cfg.experiment.seed;
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Capacity { gamma_lo, gamma_hi, points } => {
            commands::run_capacity(*gamma_lo, *gamma_hi, *points, out)
        }
        Cmd::Threshold { design, kernel } => {
            let k = kernel_choice(kernel.as_ref(), &cfg)?;
            commands::run_threshold(design.as_deref(), k, out)
        }
        Cmd::Optimize { rs, rb, dv_b, dv_f, kernel } => {
            let k = kernel_choice(kernel.as_ref(), &cfg)?;
            commands::run_optimize(*rs, *rb, *dv_b, *dv_f, seed, &cfg, k, out)
        }
        Cmd::Construct { design, n } => commands::run_construct(design, *n, seed, out),
        Cmd::Simulate {
            alist,
            role,
            ebn0_db,
            target_cer,
            tolerance_db,
            min_errors,
            max_frames,
        } => {
            let base = cfg.stop_rule();
            let stop = StopRule {
                min_errors: min_errors.unwrap_or(base.min_errors),
                max_frames: max_frames.unwrap_or(base.max_frames),
            };
            commands::run_simulate(
                alist,
                *role,
                ebn0_db,
                *target_cer,
                *tolerance_db,
                stop,
                seed,
                out,
            )
        }
        Cmd::Secrecy { design, n, frank_ebn0_db, eta } => {
            commands::run_secrecy(design, *n, *frank_ebn0_db, *eta, out)
        }
        Cmd::Ingest { file, kernel } => {
            let k = kernel_choice(kernel.as_ref(), &cfg)?;
            commands::run_ingest(file.as_deref(), k, out)
        }
        Cmd::Pipeline {} => {
            let out_dir = cli.out.clone().ok_or_else(|| {
                wiretap_ldpc::Error::validation("pipeline needs --out <directory>")
            })?;
            let outcome = pipeline::run_pipeline(&cfg, &out_dir)?;
            println!(
                "pipeline finished: {} point(s) ok, {} failed; manifest at {}",
                outcome.points_ok,
                outcome.points_failed,
                outcome.manifest_path.display()
            );
            if outcome.points_ok == 0 && outcome.points_failed > 0 {
                anyhow::bail!("every pipeline point failed; see error.txt files under the output directory");
            }
            Ok(())
        }
        Cmd::Defaults {} => {
            print!("{}", default_config_doc());
            Ok(())
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<wiretap_ldpc::Error>() {
        Some(
            wiretap_ldpc::Error::Domain(_)
            | wiretap_ldpc::Error::Validation(_)
            | wiretap_ldpc::Error::Parse { .. },
        ) => 2,
        Some(
            wiretap_ldpc::Error::Infeasible(_)
            | wiretap_ldpc::Error::NoThreshold(_)
            | wiretap_ldpc::Error::Construction(_),
        ) => 3,
        Some(wiretap_ldpc::Error::Numerical(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
