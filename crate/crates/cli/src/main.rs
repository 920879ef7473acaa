use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twosystem_cli::commands;
use twosystem_cli::io::write_report_file;
use twosystem_cli::{CliError, RunConfig};

/// Two-system of a Hamiltonian system: simulate, compare forms, check
/// closed-form cases.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the configured form; write trajectory CSV and report JSON.
    Simulate {
        config: PathBuf,
        /// Trajectory CSV (overrides output.trajectory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Invariant report JSON (overrides output.report).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Integrate run.form and run.compare_with and report their deviation.
    Compare { config: PathBuf },
    /// Compare a closed-form solution with numerical integration.
    Oracle { config: PathBuf },
    /// Check and integrate the quartic oscillator's five-equation system.
    ExampleQuartic {
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Recompute the invariant report of a saved trajectory CSV.
    Invariants {
        config: PathBuf,
        csv: PathBuf,
        /// Write the report JSON here as well.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out: csv, report } => {
            let mut cfg = RunConfig::load(&config)?;
            if csv.is_some() {
                cfg.output.trajectory = csv;
            }
            if report.is_some() {
                cfg.output.report = report;
            }
            commands::simulate(&cfg, out).map(drop)
        }
        Command::Compare { config } => commands::compare(&RunConfig::load(&config)?, out).map(drop),
        Command::Oracle { config } => commands::oracle(&RunConfig::load(&config)?, out).map(drop),
        Command::ExampleQuartic { epsilon, t_end, rtol, out_dir } => {
            commands::example_quartic(epsilon, t_end, rtol, &out_dir, out).map(drop)
        }
        Command::Invariants { config, csv, report } => {
            let r = commands::invariants(&RunConfig::load(&config)?, &csv, out)?;
            if let Some(p) = report {
                write_report_file(&p, &r)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
