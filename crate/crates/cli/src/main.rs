use std::fs;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand};
use plankton_core::commands::{check_command, run_command, sweep_command, RunOutcome};
use plankton_core::config::RawConfig;
use plankton_core::{Error, RunConfig};

/// Deterministic 1D nutrient-phytoplankton-zooplankton column simulator.
#[derive(Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Output directory, overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its trajectory and report.
    Run { config: PathBuf },
    /// Run one configuration per value of a numeric key.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        key: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<String>,
    },
    /// Rerun the invariant checks on trajectory files already on disk.
    Check { config: PathBuf },
}

fn load_raw(path: &Path) -> Result<RawConfig, Error> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    RawConfig::parse(&fs::read_to_string(path)?)
}

fn load_config(path: &Path, out: Option<&Path>) -> Result<RunConfig, Error> {
    let mut config = RunConfig::from_raw(&load_raw(path)?)?;
    if let Some(dir) = out {
        config.output_dir = dir.to_path_buf();
    }
    Ok(config)
}

fn print_outcome(outcome: &RunOutcome, quiet: bool) {
    if let Some(err) = &outcome.error {
        eprintln!("error: {err}");
    }
    if quiet {
        return;
    }
    for r in &outcome.reports {
        println!("{r}");
    }
    if let Some(fit) = &outcome.decay_fit {
        println!(
            "decay rate of int p: {:.6} (bound {:.6}, r^2 {:.4})",
            fit.rate, fit.bound, fit.r_squared
        );
    }
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run { config } => {
            let outcome = run_command(&load_config(config, out)?);
            print_outcome(&outcome, cli.quiet);
            Ok(outcome.exit_code)
        }
        Command::Check { config } => {
            let outcome = check_command(&load_config(config, out)?);
            print_outcome(&outcome, cli.quiet);
            Ok(outcome.exit_code)
        }
        Command::Sweep {
            config,
            key,
            values,
        } => {
            let sweep = sweep_command(&load_raw(config)?, key, values, out)?;
            for row in &sweep.rows {
                if let Some(err) = &row.outcome.error {
                    eprintln!("error: run {} ({key}={}): {err}", row.index, row.value);
                }
                if !cli.quiet {
                    println!(
                        "run {} {key}={} exit={}",
                        row.index, row.value, row.outcome.exit_code
                    );
                }
            }
            if !cli.quiet {
                println!("summary: {}", sweep.summary_path.display());
            }
            Ok(sweep.exit_code)
        }
    }
}

fn main() {
    // clap's own usage exit code (2) collides with the positivity code.
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        process::exit(if e.use_stderr() { 1 } else { 0 });
    });
    let code = execute(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    process::exit(code);
}
