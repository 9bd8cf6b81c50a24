use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlsdelta::scenario;

/// Scenario runner for the impurity-NLS breathing laboratory.
#[derive(Parser)]
#[command(name = "nlsdelta", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a config file (JSON or key=value).
    Run {
        config: PathBuf,
        /// Output directory (a per-scenario subdirectory is created).
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Suppress per-check output.
        #[arg(long)]
        quiet: bool,
        /// Multiply all acceptance tolerances (exploratory runs).
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// List scenario kinds and their parameters.
    List,
    /// Validate a config file and echo the normalized parameters.
    Validate { config: PathBuf },
    /// Run a parameter sweep (config with a "sweep" table).
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> nlsdelta::Result<bool> {
    match cli.command {
        Command::Run { config, out, quiet, tol_scale } => {
            let cfg = scenario::parse_config(&config)?;
            let artifact = scenario::run_scenario(&cfg, &out, tol_scale, quiet)?;
            if !quiet {
                println!(
                    "{}: {} ({} checks) -> {}",
                    artifact.manifest.scenario,
                    if artifact.all_pass() { "pass" } else { "FAIL" },
                    artifact.manifest.checks.len(),
                    artifact.dir.display()
                );
            }
            Ok(artifact.all_pass())
        }
        Command::List => {
            print!("{}", scenario::list_scenarios());
            Ok(true)
        }
        Command::Validate { config } => {
            let cfg = scenario::parse_config(&config)?;
            let report = scenario::validate_config(&cfg);
            if report.errors.is_empty() {
                println!("ok: kind = {}", cfg.kind);
                for (k, v) in &report.normalized {
                    println!("  {k} = {}", serde_json::to_string(&v.render())?);
                }
                Ok(true)
            } else {
                for e in &report.errors {
                    eprintln!("config error: {e}");
                }
                Ok(false)
            }
        }
        Command::Sweep { config, out, quiet, tol_scale } => {
            let cfg = scenario::parse_config(&config)?;
            let artifacts = scenario::run_sweep(&cfg, &out, tol_scale, quiet)?;
            let mut all = true;
            for a in &artifacts {
                if !quiet {
                    println!(
                        "{}: {}",
                        a.manifest.scenario,
                        if a.all_pass() { "pass" } else { "FAIL" }
                    );
                }
                all &= a.all_pass();
            }
            Ok(all)
        }
    }
}
