mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::input::Failure;

/// Count and locate periodic solutions of `z' = z^n + Σ P_i(t) z^i`.
#[derive(Debug, Parser)]
#[command(name = "persol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Isolate and count periodic solutions in a region (or limit cycles of a planar system).
    Count,
    /// Check the hypotheses of a counting theorem and print the margins.
    Check,
    /// Sample the displacement map on a grid and write CSV.
    Scan,
    /// Count along the homotopy that scales the non-essential coefficients.
    Continuation,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Check => "check",
            Command::Scan => "scan",
            Command::Continuation => "continuation",
        }
    }
}

#[derive(Debug, Args)]
pub struct Options {
    /// Equation JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub eq: Option<PathBuf>,
    /// Planar system JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub sys: Option<PathBuf>,
    /// Replace the horizon given in the equation file.
    #[arg(long, global = true, value_name = "F")]
    pub omega: Option<f64>,
    /// Use the disk |c| < F as region.
    #[arg(long, global = true, value_name = "F")]
    pub radius: Option<f64>,
    /// Use the box [X0, X1] × [Y0, Y1] as region.
    #[arg(long = "box", global = true, num_args = 4, allow_negative_numbers = true, value_names = ["X0", "Y0", "X1", "Y1"])]
    pub region_box: Option<Vec<f64>>,
    /// Theorem id: 1.1, 1.2, 1.3i, 1.3ii, 1.3iii, cr, 4.1i..4.1iv, aggregate.
    #[arg(long, global = true, value_name = "ID")]
    pub theorem: Option<String>,
    /// Normalization constant of theorems 1.1 and 1.2.
    #[arg(long = "K", global = true, value_name = "F")]
    pub k: Option<f64>,
    /// Number of homotopy steps.
    #[arg(long, global = true, value_name = "N")]
    pub steps: Option<usize>,
    /// Scan grid size, e.g. 200x150.
    #[arg(long, global = true, value_name = "NxM")]
    pub grid: Option<String>,
    /// Output file; reports go to stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Relative tolerance of the integrator.
    #[arg(long = "rel-tol", global = true, value_name = "F")]
    pub rel_tol: Option<f64>,
    /// Subdivision depth for escape-crossed boxes.
    #[arg(long = "max-depth", global = true, value_name = "N")]
    pub max_depth: Option<usize>,
    /// Seed recorded in the manifest.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::usage(format!("--threads: {e}")))?;
    }
    let manifest = output::Manifest::new(cli.command.name(), &cli.opts);
    match cli.command {
        Command::Count => commands::count(&cli.opts, &manifest),
        Command::Check => commands::check(&cli.opts, &manifest),
        Command::Scan => commands::scan(&cli.opts, &manifest),
        Command::Continuation => commands::continuation(&cli.opts, &manifest),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("persol: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
