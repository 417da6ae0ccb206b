//! Scenario-driven front end for the porous-medium estimate laboratory.
//!
//! A scenario file configures the model space, diffusion exponent, grid,
//! time window, initial data, and the list of estimates to verify; the
//! subcommands run it in different ways and emit CSV/JSON reports.

// Guards written as `!(x > 0.0)` deliberately catch NaN along with the
// out-of-range sign; `partial_cmp` phrasing would lose that.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pmelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the scenario with the implicit solver; write trajectory.csv.
    Solve {
        /// Scenario file path or builtin name.
        #[arg(long)]
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the scenario's checks; exit 0 only if every check passes.
    Verify {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's scaled-margin tolerance.
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// Sample the scenario's closed-form family; write trajectory.csv.
    Exact {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate the closed-form bound functions over the [bounds] sweep.
    Bounds {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Rerun the scenario at doubled resolution per level; report orders.
    Convergence {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Refinement levels including the base scenario.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn dispatch(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Solve { scenario, out } => run::cmd_solve(scenario, out),
        Command::Verify { scenario, out, tol_scale } => {
            run::cmd_verify(scenario, out, *tol_scale)
        }
        Command::Exact { scenario, out } => run::cmd_exact(scenario, out),
        Command::Bounds { scenario, out } => run::cmd_bounds(scenario, out),
        Command::Convergence { scenario, out, levels } => {
            run::cmd_convergence(scenario, out, *levels)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(run::classify(&err))
        }
    }
}
