//! `asep-lab`: file-based command-line surface over the ASEP laboratory.
//!
//! Every command writes its numeric output as CSV plus a JSON run manifest
//! recording the full parameter set; `asep-lab rerun --manifest <file>`
//! re-executes a recorded run and reproduces the outputs byte for byte.
//!
//! Exit codes: 0 success, 1 usage or invalid parameters, 2 numeric
//! nonconvergence, 3 simulation window violation, 4 identity failure.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "asep-lab",
    version,
    about = "ASEP with step Bernoulli initial data: exact laws, simulation, limit laws, and scaling experiments"
)]
pub struct Cli {
    /// Worker-thread cap (falls back to ASEP_LAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Distribution P(x_m(t) <= x) from the Fredholm-determinant law.
    ExactProb(ExactProbArgs),
    /// Monte Carlo simulation with empirical CDF output.
    Simulate(SimulateArgs),
    /// Tabulate a limit law (Gaussian, F2, or F1 squared).
    LimitDist(LimitDistArgs),
    /// Exact-rational verification of the combinatorial identities.
    VerifyIdentities(VerifyIdentitiesArgs),
    /// Scaling-limit convergence experiment with KS reporting.
    Converge(ConvergeArgs),
    /// Re-execute a recorded run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ExactProbArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub t: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: i64,
    /// Interpret t on the gamma clock (kernel time t/(q-p)).
    #[arg(long, default_value_t = false)]
    pub gamma_clock: bool,
    /// Node-doubling convergence target.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "exact_prob.csv")]
    pub out: String,
    #[arg(long, default_value = "exact_prob.manifest.json")]
    pub manifest: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Particle indices m whose positions are recorded (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub observe_m: Vec<u32>,
    /// Sites x whose currents T(x, t) are recorded (comma-separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub observe_x: Vec<i64>,
    /// Write the snapshot lines of the first trials to this file.
    #[arg(long)]
    pub dump_paths: Option<String>,
    /// Override the automatic left truncation bound (window violations
    /// then exit with code 3).
    #[arg(long, allow_negative_numbers = true)]
    pub left_bound: Option<i64>,
    #[arg(long, default_value = ".")]
    pub out_dir: String,
    #[arg(long, default_value = "simulate.manifest.json")]
    pub manifest: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LimitDistArgs {
    /// One of g, f2, f1sq.
    #[arg(long)]
    pub law: String,
    #[arg(long, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long, default_value_t = 48)]
    pub nquad: usize,
    #[arg(long, default_value = "limit_dist.csv")]
    pub out: String,
    #[arg(long, default_value = "limit_dist.manifest.json")]
    pub manifest: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyIdentitiesArgs {
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    #[arg(long, default_value_t = 20)]
    pub points_per_k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit the report as JSON instead of text.
    #[arg(long, default_value_t = false)]
    pub json: bool,
    #[arg(long, default_value = "identities_report.txt")]
    pub out: String,
    #[arg(long, default_value = "identities.manifest.json")]
    pub manifest: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeArgs {
    /// position or current.
    #[arg(long)]
    pub mode: String,
    /// auto, tw2, critical, or gaussian; non-auto values must match the
    /// classification of (sigma or v, rho).
    #[arg(long, default_value = "auto")]
    pub regime: String,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Scaling-clock times, comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub t_list: Vec<f64>,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 48)]
    pub nquad: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: String,
    #[arg(long, default_value = "converge.manifest.json")]
    pub manifest: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: String,
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: msg.into(),
        }
    }

    fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    fn window(msg: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: msg.into(),
        }
    }

    fn identity(msg: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: msg.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("io error: {e}"))
    }
}


fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("ASEP_LAB_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match commands::dispatch(&cli.command, true) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
