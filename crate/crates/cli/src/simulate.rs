use std::path::PathBuf;

use clap::Args;
use evtmodes::io::{read_json, write_column, write_json, write_return_matrix};
use evtmodes::synthetic::{simulate_returns, SimConfig};
use evtmodes::Result;
use serde::Serialize;

use crate::run::{write_rows, Run};

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn execute(args: &SimulateArgs) -> Result<()> {
    let mut cfg: SimConfig = read_json(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    // The effective config, not the file, determines the output.
    let mut run = Run::start("simulate", &args.out, &cfg)?;
    run.input(&args.config)?;
    let sim = simulate_returns(&cfg)?;

    write_return_matrix(&run.matrix("returns.csv"), &sim.returns)?;
    write_json(&run.artifact("ground_truth.json", "ground_truth"), &sim.truth)?;
    write_json(&run.artifact("config.json", "sim_config"), &cfg)?;
    write_rows(
        &run.artifact("sectors.csv", "sectors"),
        &["ticker", "sector"],
        sim.truth.assets.iter().map(|a| vec![a.ticker.clone(), a.sector.clone()]),
    )?;
    write_column(&run.artifact("profile.csv", "injected_profile"), "v", &sim.truth.profile)?;
    run.finish()
}
