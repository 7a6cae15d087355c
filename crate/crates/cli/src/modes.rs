use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use evtmodes::io::{read_return_matrix, write_histogram, write_json, write_return_matrix, write_spectrum};
use evtmodes::modes::{correlation_matrix, eigenvalue_density, eigenvector_report, rotate, spectral_decompose, DEFAULT_EIGEN_FLOOR};
use evtmodes::preprocess::MatrixKind;
use evtmodes::{EvtError, Result};
use serde::Serialize;

use crate::run::Run;

/// Sector label for tickers missing from `--sectors`.
pub const UNASSIGNED: &str = "unassigned";

#[derive(Debug, Args, Serialize)]
pub struct ModesArgs {
    /// Normalized return matrix.
    #[arg(long)]
    pub input: PathBuf,
    /// `ticker,sector` CSV with a header row.
    #[arg(long)]
    pub sectors: Option<PathBuf>,
    /// Leading eigenvectors described in the report.
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Bins of the eigenvalue histogram.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Also write modes rotated without the eigenvalue rescaling.
    #[arg(long)]
    pub unscaled: bool,
    /// Smallest eigenvalue accepted before rotation.
    #[arg(long, default_value_t = DEFAULT_EIGEN_FLOOR)]
    pub eigen_floor: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn read_sectors(path: &Path, tickers: &[String]) -> Result<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut map: BTreeMap<String, String> = tickers.iter().map(|t| (t.clone(), UNASSIGNED.to_string())).collect();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        match (rec.get(0), rec.get(1)) {
            (Some(t), Some(s)) => {
                map.insert(t.to_string(), s.to_string());
            }
            _ => return Err(EvtError::Schema(format!("{} line {}: expected ticker,sector", path.display(), i + 2))),
        }
    }
    Ok(map)
}

pub fn execute(args: &ModesArgs) -> Result<()> {
    let mut run = Run::start("modes", &args.out, args)?;
    run.input(&args.input)?;
    let m = read_return_matrix(&args.input)?;
    if m.kind != MatrixKind::Normalized {
        return Err(EvtError::Schema(format!(
            "{} holds {:?} returns; run `evtmodes preprocess` first",
            args.input.display(),
            m.kind
        )));
    }
    let spectrum = spectral_decompose(&correlation_matrix(&m)?)?;

    let sectors = match &args.sectors {
        Some(path) => {
            run.input(path)?;
            read_sectors(path, &m.tickers)?
        }
        None => m.tickers.iter().map(|t| (t.clone(), UNASSIGNED.to_string())).collect(),
    };
    let report = eigenvector_report(&spectrum, &m.tickers, &sectors, args.top_k)?;
    let density = eigenvalue_density(&spectrum, args.bins)?;
    let modes = rotate(&m, &spectrum, true, args.eigen_floor)?;
    let unscaled = if args.unscaled { Some(rotate(&m, &spectrum, false, args.eigen_floor)?) } else { None };

    run.artifact("eigenvalues.csv", "eigenvalues");
    run.artifact("eigenvectors.csv", "eigenvectors");
    write_spectrum(&args.out, &spectrum, &m.tickers)?;
    write_return_matrix(&run.matrix("modes.csv"), &modes)?;
    if let Some(u) = unscaled {
        write_return_matrix(&run.matrix("modes_unscaled.csv"), &u)?;
    }
    write_histogram(&run.artifact("eigenvalue_density.csv", "eigenvalue_density"), &density)?;
    write_json(&run.artifact("eigenvector_report.json", "eigenvector_report"), &report)?;
    run.finish()
}
