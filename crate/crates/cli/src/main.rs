use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use derivex::commands::{cmd_price, cmd_scan, ScanOptions};
use derivex::{load_scenario, CliError};

/// Subjective vs market valuation and risk-constrained exposure scans for
/// European derivative portfolios.
#[derive(Parser)]
#[command(name = "derivex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value every instrument under the implied and the subjective density
    Price {
        /// Scenario file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Also write price.json and densities.csv into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan exposure directions and report the best risk-constrained portfolio
    Scan {
        /// Scenario file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory for scan.csv, summary.json and densities.csv
        #[arg(long)]
        out: PathBuf,
        /// Nodes on the full-circle angle
        #[arg(long)]
        resolution: Option<usize>,
        /// Stochastic refinement iterations after the grid scan
        #[arg(long)]
        refine: Option<usize>,
        /// Seed for the refinement
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Price { config, out } => {
            let scenario = load_scenario(&config)?;
            let report = cmd_price(&scenario, out.as_deref())?;
            report.write_text(io::stdout().lock()).map_err(|e| CliError::io("<stdout>", e))?;
        }
        Command::Scan { config, out, resolution, refine, seed } => {
            let scenario = load_scenario(&config)?;
            let options = ScanOptions { resolution, refine, seed };
            let (run, summary) = cmd_scan(&scenario, &out, options)?;
            println!("nodes      {}", run.outcome.records.len());
            println!("status     {}", summary.status);
            println!("angles_deg {:?}", summary.angles_deg);
            println!("n          {}", summary.n);
            println!("quantities {:?}", summary.quantities);
            println!("xi         {}", summary.xi);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
