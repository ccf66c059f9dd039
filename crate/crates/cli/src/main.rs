//! `optdesign` command-line tool.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible problem,
//! 4 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Options;

#[derive(Debug, Parser)]
#[command(name = "optdesign", version, about = "Exact optimal factorial designs and their robustness")]
struct Cli {
    /// JSON file with default option values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for an optimal design.
    Search {
        #[command(flatten)]
        opts: Options,
    },
    /// Score a design under all criteria.
    Evaluate {
        #[command(flatten)]
        opts: Options,
    },
    /// Missing-run, model-change and criterion-change robustness of a design.
    Robustness {
        #[command(flatten)]
        opts: Options,
        /// Also score the design against the optimum of every criterion.
        #[arg(long)]
        psi3: bool,
        /// Also score the design under this smaller model.
        #[arg(long)]
        submodel: Option<String>,
    },
    /// Rebuild the 4-model by 6-criterion comparison tables.
    Reproduce {
        #[arg(value_enum)]
        which: Which,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Pedf,
    Designs,
    Missing,
    Psi2,
    Psi3,
    All,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Infeasible(m) | CliError::Io(m) => m,
        }
    }
}

impl From<optdesign::Error> for CliError {
    fn from(e: optdesign::Error) -> Self {
        use optdesign::Error as E;
        match e {
            E::Infeasible(_) => CliError::Infeasible(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            E::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => Options::load(path)?,
        None => Options::default(),
    };
    match cli.command {
        Command::Search { opts } => commands::search(&base.merged(&opts)),
        Command::Evaluate { opts } => commands::evaluate(&base.merged(&opts)),
        Command::Robustness {
            opts,
            psi3,
            submodel,
        } => commands::robustness(&base.merged(&opts), psi3, submodel.as_deref()),
        Command::Reproduce { which, opts } => commands::reproduce(&base.merged(&opts), which),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
