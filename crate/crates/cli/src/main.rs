//! `velergo`: velocity-of-money pipeline from FRED CSVs to forecast fans
//! and a model comparison table.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numerical failure.

mod commands;
mod config;
mod error;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "velergo",
    version,
    about = "Log-ergodic velocity-of-money pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build the velocity series and its log-returns.
    Ingest,
    /// Estimate GBM parameters on the training window for each beta.
    Calibrate,
    /// Mean-ergodicity sweep of the operator image over beta and T.
    Ergodicity,
    /// Monte Carlo velocity fan from the last observation.
    Forecast,
    /// Holdout comparison of the log-ergodic model against constant velocity.
    Compare,
    /// Every step in order.
    RunAll,
}

/// Settings given on the command line override the config file.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// GDP CSV (DATE,VALUE).
    #[arg(long, global = true)]
    gdp: Option<String>,
    /// Money-supply CSV (DATE,VALUE); monthly data is aggregated to the GDP frequency.
    #[arg(long, global = true)]
    money: Option<String>,
    /// Directory for artifacts and metadata sidecars.
    #[arg(long, global = true)]
    out_dir: Option<String>,
    /// First date of the holdout window (YYYY-MM-DD).
    #[arg(long, global = true)]
    split: Option<String>,
    /// Comma-separated inhibition degrees, each > 1.5.
    #[arg(long, global = true)]
    beta_grid: Option<String>,
    /// Forecast horizon in years.
    #[arg(long, global = true)]
    horizon: Option<String>,
    /// Comma-separated operator horizons T in years.
    #[arg(long, global = true)]
    horizons: Option<String>,
    /// Monte Carlo paths per ensemble (at least 100).
    #[arg(long, global = true)]
    n_paths: Option<String>,
    /// Master RNG seed.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// shared, independent or correlated:<rho>.
    #[arg(long, global = true)]
    driver_mode: Option<String>,
    /// returns or levels.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Largest statistic at the longest horizon still judged mean-ergodic.
    #[arg(long, global = true)]
    tolerance: Option<String>,
    /// mean or last.
    #[arg(long, global = true)]
    money_aggregation: Option<String>,
    /// Operator paths written to z_paths.csv.
    #[arg(long, global = true)]
    sample_paths: Option<String>,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("gdp", &self.gdp),
            ("money", &self.money),
            ("out-dir", &self.out_dir),
            ("split", &self.split),
            ("beta-grid", &self.beta_grid),
            ("horizon", &self.horizon),
            ("horizons", &self.horizons),
            ("n-paths", &self.n_paths),
            ("seed", &self.seed),
            ("driver-mode", &self.driver_mode),
            ("space", &self.space),
            ("tolerance", &self.tolerance),
            ("money-aggregation", &self.money_aggregation),
            ("sample-paths", &self.sample_paths),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig::resolve(cli.flags.config.as_deref(), &cli.flags.overrides())?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Calibrate => commands::calibrate(&cfg),
        Command::Ergodicity => commands::ergodicity(&cfg),
        Command::Forecast => commands::forecast(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::RunAll => commands::run_all(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
