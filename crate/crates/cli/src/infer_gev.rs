use std::path::{Path, PathBuf};

use clap::Args;
use evtmodes::distributions::{GevParams, GpdParams};
use evtmodes::estimation::{gev_from_gpd, Tail};
use evtmodes::io::{read_json, read_return_matrix, write_column, write_json, write_surface, FitRecord};
use evtmodes::nonstationary::{nonstationary_gev_from_params, DynamicThreshold};
use evtmodes::{EvtError, Result};
use serde::Serialize;

use crate::run::{invalid, write_rows, Run};
use crate::sweep::{ThresholdEntry, THRESHOLD_INDEX};

/// Retained seconds per trading day under the default session trims.
pub const DEFAULT_BLOCK_LEN: usize = 21_899;

#[derive(Debug, Args, Serialize)]
pub struct InferGevArgs {
    /// `fits.json` written by `sweep`.
    #[arg(long)]
    pub fits: PathBuf,
    /// Observations per block maximum.
    #[arg(long, default_value_t = DEFAULT_BLOCK_LEN)]
    pub block_len: usize,
    /// Series the sweep ran on; enables empirical block maxima.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Time-varying GEV from the rolling thresholds of the sweep.
    #[arg(long)]
    pub nonstationary: bool,
    /// Directory with `thresholds.json`; defaults to the directory of `--fits`.
    #[arg(long)]
    pub threshold_dir: Option<PathBuf>,
    /// Keep every `stride`-th time step of the density surface.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Points of each density grid.
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct GevRecord {
    mode: String,
    tail: Tail,
    alpha: f64,
    rolling: bool,
    block_len: usize,
    gamma: Option<f64>,
    loc: Option<f64>,
    scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn gpd_of(rec: &FitRecord) -> Option<GpdParams> {
    Some(GpdParams { gamma: rec.gamma?, sigma: rec.sigma? })
}

/// Evenly spaced grid over `[lo, hi]` with `n >= 2` points.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Plotting range: a few scales around the location, clipped to the support.
fn plot_range(gev: &GevParams, loc_lo: f64, loc_hi: f64) -> (f64, f64) {
    let (s_lo, s_hi) = gev.support();
    let lo = (loc_lo - 3.0 * gev.scale).max(s_lo);
    let hi = (loc_hi + 12.0 * gev.scale).min(s_hi);
    (lo, hi)
}

fn block_maxima(series: &[f64], block_len: usize) -> Vec<f64> {
    series.chunks_exact(block_len).map(|b| b.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
}

fn read_threshold(path: &Path, entry: &ThresholdEntry) -> Result<DynamicThreshold> {
    let mut r = csv::Reader::from_path(path)?;
    let mut u = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v = rec.get(1).and_then(|s| s.parse::<f64>().ok());
        u.push(v.ok_or_else(|| EvtError::Schema(format!("{} line {}: bad threshold", path.display(), i + 2)))?);
    }
    if entry.warmup >= u.len() {
        return Err(EvtError::Schema(format!("{}: warmup covers the whole threshold", path.display())));
    }
    Ok(DynamicThreshold { u, window: entry.window, quantile: entry.quantile, warmup: entry.warmup })
}

pub fn execute(args: &InferGevArgs) -> Result<()> {
    let mut run = Run::start("infer-gev", &args.out, args)?;
    run.input(&args.fits)?;
    if args.block_len == 0 {
        return Err(invalid("--block-len must be positive"));
    }
    let fits: Vec<FitRecord> = read_json(&args.fits)?;

    let mut table = Vec::new();
    let mut density = Vec::new();
    for rec in &fits {
        let gev = match gpd_of(rec) {
            Some(p) => gev_from_gpd(&p, rec.threshold, rec.zeta, args.block_len),
            None => Err(invalid(rec.error.clone().unwrap_or_else(|| "no GPD fit".into()))),
        };
        if let Ok(g) = &gev {
            let (lo, hi) = plot_range(g, g.loc, g.loc);
            for x in linspace(lo, hi, args.grid_points) {
                density.push(vec![
                    rec.mode.clone(),
                    rec.tail.label().to_string(),
                    rec.alpha.to_string(),
                    x.to_string(),
                    g.pdf(x).to_string(),
                ]);
            }
        }
        table.push(GevRecord {
            mode: rec.mode.clone(),
            tail: rec.tail,
            alpha: rec.alpha,
            rolling: rec.rolling,
            block_len: args.block_len,
            gamma: gev.as_ref().ok().map(|g| g.gamma),
            loc: gev.as_ref().ok().map(|g| g.loc),
            scale: gev.as_ref().ok().map(|g| g.scale),
            error: gev.err().map(|e| e.to_string()),
        });
    }

    if let Some(input) = &args.input {
        run.input(input)?;
        let m = read_return_matrix(input)?;
        let mut pairs: Vec<(String, Tail)> = fits.iter().map(|r| (r.mode.clone(), r.tail)).collect();
        pairs.sort_by(|a, b| (&a.0, a.1.label()).cmp(&(&b.0, b.1.label())));
        pairs.dedup();
        for (mode, tail) in pairs {
            let k = m
                .tickers
                .iter()
                .position(|t| *t == mode)
                .ok_or_else(|| invalid(format!("{} has no row {mode}", input.display())))?;
            let maxima = block_maxima(&tail.oriented(m.row(k)), args.block_len);
            if maxima.is_empty() {
                return Err(invalid(format!("series shorter than one block of {}", args.block_len)));
            }
            write_column(&run.artifact(&format!("blockmaxima_{mode}_{}.csv", tail.label()), "block_maxima"), "max", &maxima)?;
        }
    }

    if args.nonstationary {
        let dir = match &args.threshold_dir {
            Some(d) => d.clone(),
            None => args.fits.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        let index_path = dir.join(THRESHOLD_INDEX);
        if !index_path.exists() {
            return Err(invalid(format!("{} not found; run `sweep --rolling` first", index_path.display())));
        }
        let index: Vec<ThresholdEntry> = read_json(&index_path)?;
        for entry in &index {
            let Some(rec) = fits.iter().find(|r| r.rolling && r.mode == entry.mode && r.tail == entry.tail && r.alpha == entry.alpha)
            else {
                continue;
            };
            let Some(params) = gpd_of(rec) else { continue };
            let th = read_threshold(&dir.join(&entry.path), entry)?;
            let ns = nonstationary_gev_from_params(&params, &th, rec.zeta, args.block_len)?;
            let defined = &ns.loc[ns.warmup..];
            let loc_lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
            let loc_hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lo, hi) = plot_range(&ns.at(ns.warmup), loc_lo, loc_hi);
            let grid = linspace(lo, hi, args.grid_points);
            let stem = format!("{}_{}_a{}", entry.mode, entry.tail.label(), entry.alpha);
            write_surface(&run.artifact(&format!("surface_{stem}.csv"), "gev_surface"), &ns.density_surface(&grid, args.stride))?;
            write_rows(
                &run.artifact(&format!("gev_location_{stem}.csv"), "gev_location"),
                &["t", "b"],
                (ns.warmup..ns.loc.len()).step_by(args.stride.max(1)).map(|t| vec![t.to_string(), ns.loc[t].to_string()]),
            )?;
        }
    }

    write_json(&run.artifact("gev_params.json", "gev_params"), &table)?;
    write_rows(
        &run.artifact("gev_params.csv", "gev_params"),
        &["mode", "tail", "alpha", "rolling", "block_len", "gamma", "loc", "scale"],
        table.iter().map(|g| {
            let o = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            vec![
                g.mode.clone(),
                g.tail.label().to_string(),
                g.alpha.to_string(),
                g.rolling.to_string(),
                g.block_len.to_string(),
                o(g.gamma),
                o(g.loc),
                o(g.scale),
            ]
        }),
    )?;
    write_rows(&run.artifact("gev_density.csv", "gev_density"), &["mode", "tail", "alpha", "x", "density"], density)?;
    run.finish()
}
