use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmeas::{exit, run_config, run_scenario, sweep_config, Overrides, RunReport};

#[derive(Parser)]
#[command(name = "qmeas", version, about = "Error-disturbance and measurement-model reports")]
struct Cli {
    /// Reduced Planck constant for this run.
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// Equality tolerance; overrides the scenario file and QMEAS_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized check of the universally valid relations.
    Sweep {
        /// Inclusive system dimension range, e.g. 2..4.
        #[arg(long, default_value = "2..4")]
        dims: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn summarize(report: &RunReport) {
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} ({:.3} s)", if report.passed { "passed" } else { "failed" }, report.wall_time_s);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides::with_env(cli.hbar, cli.tol);
    let result = match &cli.command {
        Command::Run { config, out } => run_scenario(config, out, &overrides),
        Command::Sweep { dims, trials, seed, out } => run_config(&sweep_config(dims, *trials, *seed), out, &overrides),
    };
    match result {
        Ok(report) => {
            summarize(&report);
            ExitCode::from(if report.passed { exit::OK } else { exit::ASSERTION })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
