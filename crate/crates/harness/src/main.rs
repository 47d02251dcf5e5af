use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use counterfact::config::ConfigError;
use counterfact::runner::{execute, RunRequest};
use counterfact::scenarios::registry;
use counterfact::verify;

/// Deterministic workbench for counterfactual-reasoning and
/// safe-optimization toy experiments.
#[derive(Parser)]
#[command(name = "counterfact", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every registered scenario.
    List,
    /// Run one scenario and write its artifacts.
    Run {
        /// Scenario name (see `list`).
        scenario: String,
        /// TOML config file with a [params] table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Random seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to $COUNTERFACT_OUT/<scenario>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit SVG charts where the scenario supports them.
        #[arg(long)]
        plots: bool,
    },
    /// Run the verification suite and print one line per criterion.
    Verify {
        /// Only run criteria whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
}

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            println!("{:<24} {:<28} description", "scenario", "topic");
            for s in registry() {
                println!("{:<24} {:<28} {}", s.name, s.topic, s.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            config,
            seed,
            out,
            plots,
        } => {
            let request = RunRequest {
                scenario,
                config_file: config,
                seed,
                out,
                plots,
            };
            match execute(&request) {
                Ok(record) if record.checks_passed => ExitCode::SUCCESS,
                Ok(record) => {
                    eprintln!(
                        "scenario {} ran but its local checks failed",
                        record.scenario
                    );
                    ExitCode::from(EXIT_CHECK_FAILURE)
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    match err {
                        ConfigError::Io(_) => ExitCode::from(EXIT_CHECK_FAILURE),
                        _ => ExitCode::from(EXIT_USAGE),
                    }
                }
            }
        }
        Command::Verify { filter } => {
            let results = verify::run_all(filter.as_deref());
            if results.is_empty() {
                eprintln!("no criteria match the filter");
                return ExitCode::from(EXIT_USAGE);
            }
            if verify::print_results(&results) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILURE)
            }
        }
    }
}
