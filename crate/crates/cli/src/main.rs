mod compute;
mod io;
mod scan;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use renyi_core::optimize::OptimizerConfig;

use io::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "renyi", version, about = "Sandwiched Renyi divergences: evaluation, optimization and randomized verification")]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report values in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; scan-alpha defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a single quantity.
    #[command(subcommand)]
    Compute(compute::ComputeCommand),
    /// Run a randomized verification suite (a check name or `all`).
    Verify(verify::VerifyArgs),
    /// Tabulate D_alpha(rho||sigma) over a log-spaced grid of orders.
    ScanAlpha(scan::ScanArgs),
}

/// Optimizer overrides shared by optimizer-backed commands.
#[derive(Args, Debug, Clone, Default)]
pub struct OptimizerArgs {
    /// Number of random restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Stall tolerance of the optimizer.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap per restart.
    #[arg(long)]
    max_iters: Option<usize>,
}

impl OptimizerArgs {
    pub fn config(&self, seed: u64) -> CliResult<OptimizerConfig> {
        let mut c = OptimizerConfig::with_seed(seed);
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        c.validate()?;
        Ok(c)
    }
}

pub struct Globals {
    pub seed: u64,
    pub bits: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Globals {
    /// Multiplier converting nats to the requested unit.
    pub fn unit_scale(&self) -> f64 {
        if self.bits {
            1.0 / std::f64::consts::LN_2
        } else {
            1.0
        }
    }

    pub fn units(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let g = Globals {
        seed: cli.seed,
        bits: cli.bits,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Compute(c) => compute::run(c, &g).map(|_| ExitCode::SUCCESS),
        Command::Verify(v) => verify::run(v, &g),
        Command::ScanAlpha(s) => scan::run(s, &g).map(|_| ExitCode::SUCCESS),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::usage(e.to_string().trim_end()));
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
