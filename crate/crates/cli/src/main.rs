//! `cryolink` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! non-convergence, 1 output I/O failure.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cryolink", version, about = "Gaussian-state and thermal model of a cryogenic microwave quantum link")]
struct Cli {
    /// Timestamp recorded in run manifests (defaults to the current UTC time).
    #[arg(long, global = true)]
    timestamp: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold temperatures and thermal occupations at a signal frequency.
    Thresholds {
        #[arg(long, allow_negative_numbers = true)]
        freq_ghz: f64,
        /// Temperatures (K) at which to report n_th; repeatable.
        #[arg(long, allow_negative_numbers = true)]
        at_kelvin: Vec<f64>,
        /// Also write the table as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Propagate the configured state and report metrics at every tap.
    Transfer {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Emulated tomography: quadrature samples drawn per tap (0 = off).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep the cable centre temperature.
    Sweep {
        config: PathBuf,
        /// Comma-separated centre temperatures in K; overrides the config list.
        #[arg(long)]
        t_center_k: Option<String>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the cable temperature profile.
    Heat {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Recalibrate the radiative load so the centre reaches this temperature.
        #[arg(long)]
        calibrate_center_k: Option<f64>,
    },
    /// Fit the sigmoid-smoothed piecewise-linear response to two-column data.
    Fit {
        data: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit squeeze factor and local-arm loss to receiver targets.
    Calibrate {
        config: PathBuf,
        #[arg(long, default_value_t = 2.10)]
        target_s_db: f64,
        #[arg(long, default_value_t = 0.501)]
        target_negativity: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let timestamp = cli.timestamp.unwrap_or_else(output::now_timestamp);
    let result = match cli.command {
        Command::Thresholds {
            freq_ghz,
            at_kelvin,
            output,
        } => commands::thresholds(freq_ghz, &at_kelvin, output.as_deref(), &timestamp),
        Command::Transfer {
            config,
            out_dir,
            samples,
            seed,
        } => commands::transfer(&config, &out_dir, samples, seed, &timestamp),
        Command::Sweep {
            config,
            t_center_k,
            output,
        } => commands::sweep(&config, t_center_k.as_deref(), output.as_deref(), &timestamp),
        Command::Heat {
            config,
            output,
            calibrate_center_k,
        } => commands::heat(&config, output.as_deref(), calibrate_center_k, &timestamp),
        Command::Fit { data, output } => commands::fit(&data, output.as_deref(), &timestamp),
        Command::Calibrate {
            config,
            target_s_db,
            target_negativity,
            output,
        } => commands::calibrate(&config, target_s_db, target_negativity, output.as_deref(), &timestamp),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
