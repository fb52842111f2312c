// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Parser)]
#[command(name = "fermiweak", version, about = "Spectral scans and checks for the four-fermion weak interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build basis and operators and print a summary
    Build(Common),
    /// Ground-state energy and composition over the coupling scan
    GsScan(Common),
    /// Ground states over the infrared-cutoff scan
    IrScan(Common),
    /// Compressed commutator bottoms over windows and couplings
    Mourre(Common),
    /// Run the configured checks and write a JSON Lines report
    Verify(Common),
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; overrides `output` in the config
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the solver residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Why a run stopped, mapped onto the exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(fermiweak_core::Error),
    Io(std::io::Error),
    /// Some checks failed; the report was written.
    Checks(usize),
    /// Some scan points hit solver failures; the rows were written.
    SolverRows(usize),
}

impl From<fermiweak_core::Error> for Failure {
    fn from(e: fermiweak_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(std::io::Error::other(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Core(fermiweak_core::Error::Solver { .. }) | Failure::SolverRows(_) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Checks(n) => write!(f, "{n} checks failed"),
            Failure::SolverRows(n) => write!(f, "{n} scan points failed to converge"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    type Run = fn(&commands::Problem) -> Result<(), Failure>;
    let (common, name, run): (&Common, &'static str, Run) = match &cli.command {
        Command::Build(c) => (c, "build", commands::build),
        Command::GsScan(c) => (c, "gs-scan", commands::gs_scan),
        Command::IrScan(c) => (c, "ir-scan", commands::ir_scan),
        Command::Mourre(c) => (c, "mourre", commands::mourre),
        Command::Verify(c) => (c, "verify", commands::verify),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = commands::Problem::setup(common, name).and_then(|p| run(&p));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
