//! `evtmodes`: preprocessing, eigenmode rotation, threshold sweeps, GEV
//! inference and synthetic data generation from the command line.
//!
//! Every subcommand writes into one run directory (`--out`), records its
//! artifacts in `manifest.json` and, on failure, writes `error.json`.
//! Exit codes: 0 success, 2 input or schema error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod infer_gev;
mod modes;
mod preprocess;
mod run;
mod simulate;
mod sweep;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evtmodes::EvtError;

#[derive(Parser)]
#[command(name = "evtmodes", version, about = "Extreme value analysis of correlated series via eigenmodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quotes or raw returns to a normalized return matrix.
    Preprocess(preprocess::PreprocessArgs),
    /// Correlation spectrum, rotated modes and eigenvector report.
    Modes(modes::ModesArgs),
    /// GPD fits and extremal indices over tail-quantiles.
    Sweep(sweep::SweepArgs),
    /// GEV parameters for block maxima implied by a sweep.
    InferGev(infer_gev::InferGevArgs),
    /// Synthetic factor-model market with ground truth.
    Simulate(simulate::SimulateArgs),
}

impl Command {
    fn out(&self) -> &Path {
        match self {
            Command::Preprocess(a) => &a.out,
            Command::Modes(a) => &a.out,
            Command::Sweep(a) => &a.out,
            Command::InferGev(a) => &a.out,
            Command::Simulate(a) => &a.out,
        }
    }

    fn execute(&self) -> evtmodes::Result<()> {
        match self {
            Command::Preprocess(a) => preprocess::execute(a),
            Command::Modes(a) => modes::execute(a),
            Command::Sweep(a) => sweep::execute(a),
            Command::InferGev(a) => infer_gev::execute(a),
            Command::Simulate(a) => simulate::execute(a),
        }
    }
}

fn exit_code(err: &EvtError) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("error: {err}");
            if let Err(e) = run::write_error(cli.command.out(), &err, code) {
                eprintln!("error: could not write error.json: {e}");
            }
            ExitCode::from(code)
        }
    }
}
