//! `exzone` - run radar exclusion-zone interference sweeps from a scenario
//! config and emit CSV/SVG artifacts.
//!
//! Exit codes: 0 success, 2 config/schema problem, 3 numerical
//! non-convergence (partial results are still written).

use clap::{Parser, Subcommand};
use exzone_core::analytic::InterferenceModel;
use exzone_core::results::{exit_code, run_config, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "exzone", version, about = "Radar exclusion-zone interference sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write results.csv, eta_table.csv and the
    /// sweep chart into the output directory.
    Run {
        /// Path to the TOML scenario config.
        config: PathBuf,
        /// Output directory (overrides the config's output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed override for reproducibility experiments.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated model list: cbc, cbc-approx, aaecc, aaecc-approx,
        /// monte-carlo. Defaults to all of them.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        /// Skip the Monte Carlo model regardless of the model list.
        #[arg(long)]
        no_mc: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    // EXZONE_THREADS caps the rayon pool; default uses every core
    if let Ok(threads) = std::env::var("EXZONE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, models, no_mc } => {
            let models = match models {
                None => None,
                Some(names) => {
                    let mut parsed = Vec::new();
                    for name in &names {
                        match InterferenceModel::parse(name) {
                            Some(m) => parsed.push(m),
                            None => {
                                eprintln!(
                                    "unknown model '{name}' (expected cbc, cbc-approx, aaecc, aaecc-approx, monte-carlo)"
                                );
                                return ExitCode::from(2);
                            }
                        }
                    }
                    Some(parsed)
                }
            };
            let opts = RunOptions { out_dir: out, seed, models, no_mc };
            match run_config(&config, &opts) {
                Ok(summary) => {
                    println!(
                        "wrote {} rows to {}",
                        summary.rows,
                        summary.results_csv.display()
                    );
                    println!("eta table: {}", summary.eta_csv.display());
                    if let Some(svg) = summary.svg {
                        println!("chart: {}", svg.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(exit_code(&e) as u8)
                }
            }
        }
    }
}
