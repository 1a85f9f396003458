use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqf_lio::harness::{commands, run_checks, VerifyOptions};
use eqf_lio::Error;

#[derive(Parser)]
#[command(name = "eqlio", version, about = "Equivariant LiDAR-inertial odometry harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a TOML spec.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a filter over a dataset and write estimates, NEES and metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the randomized property and Jacobian checks.
    Verify {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Override the number of cases per check.
        #[arg(long)]
        cases: Option<usize>,
        /// Also print wall-clock seconds per check.
        #[arg(long)]
        timing: bool,
        #[arg(long, hide = true)]
        flip_gravity_block: bool,
    },
    /// Run several configs on one dataset and write a comparison table.
    Compare {
        #[arg(long = "config", required = true, num_args = 1)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Config(_) | Error::DatasetCorrupt(_) | Error::MismatchedDataset(..) | Error::InvalidNoise(_) => 2,
        _ => 1,
    }
}

fn execute(command: Command) -> eqf_lio::Result<bool> {
    match command {
        Command::Simulate { spec, out, seed } => {
            let scans = commands::simulate(&spec, &out, seed)?;
            println!("wrote {scans} scans to {}", out.display());
        }
        Command::Run { config, out } => {
            let r = commands::run(&config, &out)?;
            println!(
                "{}: {} epochs, ATE {:.4} m, end-to-end {:.4} m, NEES mean {:.2}, in band {:.3}",
                r.filter, r.epochs, r.ate_rmse, r.end_to_end, r.nees_mean, r.nees_band_fraction
            );
        }
        Command::Verify { filter, cases, timing, flip_gravity_block } => {
            let results = run_checks(&VerifyOptions { filter, cases, flip_gravity_block });
            if results.is_empty() {
                return Err(Error::Config("no check matches the filter".into()));
            }
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                let time = if timing { format!(" {:.2}s", r.seconds) } else { String::new() };
                println!("{status} {:<16} cases={:<5} residual={:.3e} tol={:.0e}{time}", r.name, r.cases, r.residual, r.tolerance);
                for d in &r.details {
                    println!("     {d}");
                }
            }
            return Ok(results.iter().all(|r| r.passed));
        }
        Command::Compare { configs, out } => {
            let rows = commands::compare(&configs, &out)?;
            for r in &rows {
                println!(
                    "{:<16} {:<4} ATE {:.4} m  end-to-end {:.4} m  NEES mean {:.2}  in band {:.3}",
                    r.label, r.filter, r.ate_rmse, r.end_to_end, r.nees_mean, r.nees_band_fraction
                );
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
