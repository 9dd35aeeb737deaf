mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "sigtamper",
    version,
    about = "Signal-tampering frontiers on time-expanded traffic networks"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "SIGTAMPER_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Seed for generated networks that take one.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated network and a scenario that uses it.
    Generate {
        /// A, B, C, D, D:<seed> or crossing.
        #[arg(long)]
        network: String,
        /// Vehicles per hour at every source.
        #[arg(long, default_value_t = 400)]
        demand: u32,
        #[arg(long, default_value_t = 450)]
        steps: u32,
    },
    /// Report super-graph sizes.
    Expand {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Solve the travel-time optimum and its signal schedule.
    SolveOptimal {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Enumerate the impact-noticeability frontier.
    Attack {
        #[arg(long)]
        scenario: PathBuf,
        /// Compare with exhaustive enumeration when the instance is small.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Vulnerability metrics of frontier CSVs.
    Vuln {
        /// Frontier CSVs; each is labelled by its file stem, or by its
        /// directory name when the stem is `frontier`.
        #[arg(required = true)]
        frontiers: Vec<PathBuf>,
    },
    /// Frontiers over every combination of networks, demands and durations.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "A,B,C,D")]
        networks: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "400,800,1200")]
        demands: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "450")]
        durations: Vec<u32>,
        /// Base scenario for the cell and step parameters.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
