mod commands;
mod document;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Failure;

/// Exact finite and sampled time-frequency identities from the command line.
///
/// Exit codes: 0 success, 2 usage or precondition, 3 numerical acceptance
/// failure, 4 constants-table mismatch.
#[derive(Debug, Parser)]
#[command(name = "qtfa", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every randomised input; required by randomised commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Acceptance tolerance overriding the command default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Doc)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Doc,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice, adjoint, covolume and halving status of (L, a, b).
    LatticeInfo { order: usize, a: usize, b: usize },
    /// Frame operator against its Janssen representation.
    JanssenCheck {
        order: usize,
        a: usize,
        b: usize,
        #[arg(long, value_enum, default_value_t = WindowSource::Random)]
        windows: WindowSource,
        /// JSON file `{"g": [[re, im], ...], "h": [...]}` for `--windows file`.
        #[arg(long)]
        windows_file: Option<PathBuf>,
    },
    /// Synthesise or analyse a lattice-invariant operator.
    Invariant {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(value_enum)]
        mode: Mode,
        order: usize,
        a: usize,
        b: usize,
        #[arg(long, value_enum, default_value_t = Data::Random)]
        data: Data,
    },
    /// Spreading-function calculus, commutation, Θ and half-lattice checks.
    Calculus {
        order: usize,
        a: usize,
        b: usize,
        #[arg(long, value_enum, default_value_t = Pair::Random)]
        pair: Pair,
    },
    /// Sampled-model convergence ladder.
    Converge {
        /// TOML configuration; the built-in ladder when omitted.
        config: Option<PathBuf>,
    },
    /// Show or re-derive the normalisation constants table.
    Constants {
        #[command(subcommand)]
        action: ConstantsAction,
    },
    /// Re-run a saved document and compare its results bit-exactly.
    Replay { document: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum ConstantsAction {
    Show,
    Derive {
        #[arg(long, value_delimiter = ',', default_values_t = qtfa::testkit::DERIVATION_ORDERS)]
        orders: Vec<usize>,
        /// Also write the bare table, in the format read by `QTFA_CONSTANTS`.
        #[arg(long)]
        table_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowSource {
    Delta,
    Random,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Translation,
    Modulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Synth,
    Analyze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Data {
    Delta,
    Random,
    Identity,
    Parity,
    /// An unstructured random operator.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pair {
    Random,
    Parity,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::execute(&cli, commands::echo(&args[1..])) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 3 }),
        Err(f) => {
            eprintln!("qtfa: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Environment(_) => 4,
        }
    }
}
