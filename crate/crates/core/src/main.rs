use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use naimark::scenarios::{self, ExitStatus, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "naimark",
    version,
    about = "Hermitian dilation scenarios, sweeps and invariant checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV and manifest.
    Run {
        /// JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario name, used when no config file is given.
        #[arg(long)]
        scenario: Option<String>,
        /// Output directory (default: config output_path, then $NAIMARK_OUTPUT_DIR, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=value` overrides applied after the config file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the named invariant checks and print a JSON report.
    Verify {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario over a range of one parameter.
    Sweep {
        #[arg(long)]
        param: String,
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long)]
        values: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn load(
    config: Option<PathBuf>,
    scenario: Option<String>,
    mut overrides: Vec<String>,
) -> naimark::Result<ScenarioConfig> {
    if let Some(s) = scenario {
        overrides.insert(0, format!("scenario={s}"));
    }
    ScenarioConfig::load(config.as_deref(), &overrides)
}

fn print_json<T: serde::Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("error: {e}"),
    }
}

fn execute(cli: Cli) -> naimark::Result<ExitStatus> {
    let passed = match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            overrides,
        } => {
            let cfg = load(config, scenario, overrides)?;
            let dir = scenarios::resolve_output_dir(out.as_deref(), &cfg);
            let manifest = scenarios::run(&cfg, &dir)?;
            print_json(&manifest);
            manifest.all_passed()
        }
        Command::Verify { filter, seed } => {
            let report = scenarios::verify(filter.as_deref(), seed)?;
            print_json(&report);
            report.all_passed()
        }
        Command::Sweep {
            param,
            values,
            config,
            scenario,
            out,
            overrides,
        } => {
            let cfg = load(config, scenario, overrides)?;
            let values = scenarios::parse_values(&values)?;
            let dir = scenarios::resolve_output_dir(out.as_deref(), &cfg);
            let report = scenarios::sweep(&cfg, &param, &values, &dir)?;
            print_json(&report);
            report.all_passed()
        }
    };
    Ok(if passed {
        ExitStatus::Success
    } else {
        ExitStatus::Invariant
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                ExitStatus::Usage.code() as u8
            } else {
                0
            });
        }
    };
    match execute(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::for_error(&e).code() as u8)
        }
    }
}
