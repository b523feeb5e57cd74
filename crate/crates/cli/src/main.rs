#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Failure};
use config::{ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "alphaframe", version, about = "α-Gabor-wavelet frames, α-coverings and α-modulation norms")]
struct Cli {
    /// TOML experiment file; the built-in default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Lattice parameter.
    #[arg(long = "a", global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Smoothness exponent of the space.
    #[arg(long = "s", global = true, allow_negative_numbers = true)]
    s: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interval table of the α-covering.
    Covering,
    /// Partition of unity diagnostics.
    BapuCheck {
        /// Also write the window samples.
        #[arg(long)]
        windows: bool,
    },
    /// Samples of the atom `(j, k)`.
    Atoms {
        #[arg(long, allow_negative_numbers = true)]
        j: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        k: i64,
    },
    /// Frame coefficients and frame bound estimates.
    Analyze {
        /// Signal file (`.csv` or `.bin`); a generated signal otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Canonical dual reconstruction.
    Reconstruct {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Self-Gramian magnitudes and decay fit.
    Gramian,
    /// Segmentation and coefficient norms.
    Norms {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Ratios of coefficient to segmentation norms.
    Equivalence,
    /// Embedding constants between two values of α.
    Embedding,
    /// α-spectrogram `|V_g^α f|²`.
    Transform {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Acceptance criteria, all or the listed ones.
    VerifyAll {
        criteria: Vec<u32>,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(x) = cli.seed {
        cfg.seed = x;
    }
    if let Some(x) = &cli.out {
        cfg.output = x.clone();
    }
    if let Some(x) = cli.alpha {
        cfg.alpha = x;
    }
    if let Some(x) = cli.a {
        cfg.a = x;
    }
    if let Some(x) = cli.s {
        cfg.s = x;
    }
    cfg.validated()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            if !matches!(e, ConfigError::Invalid(_)) {
                eprintln!();
            }
            return ExitCode::from(1);
        }
    };
    let ctx = Context::new(cfg);
    let result = match &cli.command {
        Command::Covering => commands::covering(&ctx),
        Command::BapuCheck { windows } => commands::bapu_check(&ctx, *windows),
        Command::Atoms { j, k } => commands::atoms(&ctx, *j, *k),
        Command::Analyze { input } => commands::analyze(&ctx, input.as_deref()),
        Command::Reconstruct { input } => commands::reconstruct_cmd(&ctx, input.as_deref()),
        Command::Gramian => commands::gramian_cmd(&ctx),
        Command::Norms { input } => commands::norms(&ctx, input.as_deref()),
        Command::Equivalence => commands::equivalence(&ctx),
        Command::Embedding => commands::embedding(&ctx),
        Command::Transform { input } => commands::transform(&ctx, input.as_deref()),
        Command::VerifyAll { criteria } => commands::verify_all(&ctx, criteria),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed; see the report");
            ExitCode::from(2)
        }
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
