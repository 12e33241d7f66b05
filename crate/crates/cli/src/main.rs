//! `ppa`: bound tables, region maps, iteration traces and certificate checks
//! for the relaxed proximal point method.
//!
//! Exit codes: 0 when every check passes, 1 on an invariant violation, 2 on
//! a usage or input error.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "ppa", version, about = "Relaxed proximal point iteration: tight linear rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print every bound at one (gamma, a, c).
    Bounds {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        c: f64,
        /// Emit JSON instead of aligned text.
        #[arg(long)]
        json: bool,
    },
    /// CSV grid of regimes and bounds over (gamma, t^2).
    Regionmap {
        /// Number of gamma values strictly inside (0, gamma-max). Default grid: 0.1, 0.2, ..., 1.9.
        #[arg(long)]
        gamma_steps: Option<usize>,
        /// Number of t^2 values in [0, tsq-max]. Default grid: 0.01 0.05 0.1 0.25 0.5 1 2 4.
        #[arg(long)]
        tsq_steps: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 4.0)]
        tsq_max: f64,
    },
    /// Run the iteration on an operator read from a JSON file; trace as CSV.
    Run {
        /// Operator config, e.g. {"kind": "skew", "a": 1.0}.
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        gamma: f64,
        /// Proximal parameter; a comma-separated list gives a schedule (last value held).
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Starting point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        z0: Vec<f64>,
        /// Regularity radius; omitted means unbounded.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        stop_tol: f64,
    },
    /// Replay both extremal operators over a gamma x c grid and check attainment.
    Examples {
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long)]
        json: bool,
    },
    /// Random sweep of the certificate identities and multiplier signs (seed: PPA_SEED, default 42).
    Certify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Brute-force worst one-step contraction at (gamma, t).
    Worstcase {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Bounds { gamma, a, c, json } => commands::bounds(&mut out, gamma, a, c, json),
        Command::Regionmap {
            gamma_steps,
            tsq_steps,
            gamma_max,
            tsq_max,
        } => commands::regionmap(&mut out, gamma_steps, tsq_steps, gamma_max, tsq_max),
        Command::Run {
            op,
            gamma,
            c,
            iters,
            z0,
            tau,
            stop_tol,
        } => commands::run(&mut out, &op, gamma, &c, iters, &z0, tau, stop_tol),
        Command::Examples { iters, json } => commands::examples(&mut out, iters, json),
        Command::Certify { samples } => commands::certify(&mut out, samples, commands::seed_from_env()),
        Command::Worstcase {
            gamma,
            t,
            resolution,
        } => commands::worstcase(&mut out, gamma, t, resolution),
    };
    let _ = out.flush();
    match result {
        Ok(()) | Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(CliError::Violation(msg)) => {
            eprintln!("ppa: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("ppa: {msg}");
            ExitCode::from(2)
        }
    }
}
