use std::path::PathBuf;

use clap::{Args, ValueEnum};
use evtmodes::clustering::autocorrelation;
use evtmodes::estimation::{extract_excesses, qq_points, sweep_entry, threshold_sweep_with, ExcessSample, FitOptions, SweepEntry, Tail};
use evtmodes::io::{read_return_matrix, write_column, write_json, write_pairs, write_return_matrix, write_threshold, FitRecord};
use evtmodes::nonstationary::{dynamic_exceedances, intraday_profile, residuals, rolling_tail_threshold, DynamicThreshold};
use evtmodes::preprocess::{MatrixKind, ReturnMatrix};
use evtmodes::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::run::{invalid, write_rows, Run};

pub const FITS: &str = "fits.json";
pub const THRESHOLD_INDEX: &str = "thresholds.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailArg {
    Pos,
    Neg,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Pos => Tail::Positive,
            TailArg::Neg => Tail::Negative,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Mode (or return) matrix; rows are analyzed in order.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of leading rows to analyze.
    #[arg(long, default_value_t = 5)]
    pub modes: usize,
    /// Tail-quantiles for fixed thresholds.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.02,0.01,0.005,0.002,0.001")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "pos,neg")]
    pub tails: Vec<TailArg>,
    /// Divide each row by its intraday volatility profile first.
    #[arg(long)]
    pub residuals: bool,
    /// Use trailing-window local quantile thresholds instead of fixed ones.
    #[arg(long)]
    pub rolling: bool,
    #[arg(long, default_value_t = evtmodes::nonstationary::DEFAULT_WINDOW)]
    pub window: usize,
    /// Local quantiles for rolling thresholds.
    #[arg(long, value_delimiter = ',', default_value = "0.999")]
    pub quantile: Vec<f64>,
    /// Lags of the absolute-value autocorrelation; 0 skips it.
    #[arg(long, default_value_t = 100)]
    pub acf_lags: usize,
    /// Minimum number of excesses for a fit.
    #[arg(long, default_value_t = 50)]
    pub n_min: usize,
    /// Histogram bins of the excess densities.
    #[arg(long, default_value_t = 40)]
    pub density_bins: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

/// Location of a rolling threshold written by the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub mode: String,
    pub tail: Tail,
    pub alpha: f64,
    pub quantile: f64,
    pub window: usize,
    pub warmup: usize,
    pub path: String,
}

struct Fitted {
    entry: SweepEntry,
    sample: ExcessSample,
    threshold: Option<DynamicThreshold>,
}

struct TailResult {
    tail: Tail,
    fits: Vec<Fitted>,
}

struct ModeResult {
    label: String,
    profile: Option<Vec<f64>>,
    series: Vec<f64>,
    acf: Vec<f64>,
    tails: Vec<TailResult>,
}

/// `1 - q` rounded to 12 significant digits, so 0.999 maps to 0.001.
fn complement(q: f64) -> f64 {
    format!("{:.11e}", 1.0 - q).parse().expect("formatted float parses")
}

fn check_probabilities(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(format!("--{name} needs at least one value")));
    }
    match values.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        Some(&bad) => Err(evtmodes::EvtError::InvalidProbability(bad)),
        None => Ok(()),
    }
}

fn analyze_tail(series: &[f64], tail: Tail, args: &SweepArgs, opts: &FitOptions) -> Result<TailResult> {
    let fits = if args.rolling {
        let mut qs = args.quantile.clone();
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        qs.into_iter()
            .map(|q| {
                let th = rolling_tail_threshold(series, args.window, q, tail)?;
                let sample = dynamic_exceedances(series, &th, tail)?;
                let entry = sweep_entry(complement(q), &sample, opts);
                Ok(Fitted { entry, sample, threshold: Some(th) })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        threshold_sweep_with(series, &args.alpha, tail, opts)?
            .into_iter()
            .map(|entry| {
                let sample = extract_excesses(series, entry.threshold, tail);
                Fitted { entry, sample, threshold: None }
            })
            .collect()
    };
    Ok(TailResult { tail, fits })
}

fn analyze_mode(m: &ReturnMatrix, k: usize, args: &SweepArgs, tails: &[Tail], opts: &FitOptions) -> Result<ModeResult> {
    let raw = m.row(k);
    let (series, profile) = if args.residuals {
        let p = intraday_profile(raw, m.day_len)?;
        (residuals(raw, &p)?, Some(p.values))
    } else {
        (raw.to_vec(), None)
    };
    let acf = if args.acf_lags > 0 {
        let abs: Vec<f64> = series.iter().map(|x| x.abs()).collect();
        autocorrelation(&abs, args.acf_lags.min(series.len().saturating_sub(2)))?
    } else {
        Vec::new()
    };
    let tails = tails.par_iter().map(|&t| analyze_tail(&series, t, args, opts)).collect::<Result<Vec<_>>>()?;
    Ok(ModeResult { label: m.tickers[k].clone(), profile, series, acf, tails })
}

/// Histogram of excesses with the fitted density at bin centers:
/// `(x, empirical, model)` rows.
fn density_rows(f: &Fitted, bins: usize) -> Vec<(f64, f64, f64)> {
    let Ok(fit) = &f.entry.fit else { return Vec::new() };
    let xs = &f.sample.excesses;
    let hi = xs.iter().copied().fold(0.0, f64::max);
    if xs.is_empty() || !(hi > 0.0) || bins == 0 {
        return Vec::new();
    }
    let width = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        counts[((x / width) as usize).min(bins - 1)] += 1;
    }
    let n = xs.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let x = (i as f64 + 0.5) * width;
            (x, c as f64 / (n * width), fit.params.pdf(x))
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn execute(args: &SweepArgs) -> Result<()> {
    let mut run = Run::start("sweep", &args.out, args)?;
    run.input(&args.input)?;
    check_probabilities("alpha", &args.alpha)?;
    check_probabilities("quantile", &args.quantile)?;
    if args.tails.is_empty() {
        return Err(invalid("--tails needs at least one of pos,neg"));
    }
    let m = read_return_matrix(&args.input)?;
    if args.modes == 0 || args.modes > m.n_series() {
        return Err(invalid(format!("--modes {} outside 1..={}", args.modes, m.n_series())));
    }
    let mut tails: Vec<Tail> = args.tails.iter().map(|&t| t.into()).collect();
    tails.dedup();
    let opts = FitOptions { n_min: args.n_min, ..FitOptions::default() };

    let results = (0..args.modes)
        .into_par_iter()
        .map(|k| analyze_mode(&m, k, args, &tails, &opts))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut index = Vec::new();
    for r in &results {
        let label = &r.label;
        if let Some(p) = &r.profile {
            write_column(&run.artifact(&format!("profile_{label}.csv"), "volatility_profile"), "v", p)?;
        }
        if !r.acf.is_empty() {
            write_rows(
                &run.artifact(&format!("acf_{label}.csv"), "acf"),
                &["lag", "acf"],
                r.acf.iter().enumerate().map(|(i, a)| vec![(i + 1).to_string(), a.to_string()]),
            )?;
        }
        for t in &r.tails {
            let tail = t.tail.label();
            let mut density = Vec::new();
            for f in &t.fits {
                let e = &f.entry;
                records.push(FitRecord::from_entry(label, t.tail, e, args.rolling));
                let stem = format!("{label}_{tail}_a{}", e.alpha);
                if let Ok(fit) = &e.fit {
                    let qq = qq_points(&f.sample, fit);
                    write_pairs(&run.artifact(&format!("qq_{stem}.csv"), "qq"), ["empirical", "model"], &qq)?;
                }
                for (x, emp, model) in density_rows(f, args.density_bins) {
                    density.push(vec![e.alpha.to_string(), x.to_string(), emp.to_string(), model.to_string()]);
                }
                if let Some(th) = &f.threshold {
                    let name = format!("threshold_{stem}.csv");
                    write_threshold(&run.artifact(&name, "rolling_threshold"), &th.u)?;
                    index.push(ThresholdEntry {
                        mode: label.clone(),
                        tail: t.tail,
                        alpha: e.alpha,
                        quantile: th.quantile,
                        window: th.window,
                        warmup: th.warmup,
                        path: name,
                    });
                }
            }
            write_rows(
                &run.artifact(&format!("theta_{label}_{tail}.csv"), "theta"),
                &["alpha", "theta", "n_exceedances"],
                t.fits.iter().map(|f| {
                    let e = &f.entry;
                    vec![e.alpha.to_string(), opt(e.theta.as_ref().ok().copied()), e.n_exceedances.to_string()]
                }),
            )?;
            write_rows(
                &run.artifact(&format!("density_{label}_{tail}.csv"), "excess_density"),
                &["alpha", "x", "empirical", "model"],
                density,
            )?;
        }
    }
    if args.residuals {
        let n = results.len();
        let day_len = m.day_len;
        let data: Vec<f64> = results.iter().flat_map(|r| r.series.iter().copied()).collect();
        let values = ndarray::Array2::from_shape_vec((n, m.n_obs()), data).expect("rows share the input length");
        let labels = results.iter().map(|r| r.label.clone()).collect();
        let mut res = ReturnMatrix::new(values, labels, day_len, m.delta_t, MatrixKind::Residuals)?;
        res.seconds_per_day = m.seconds_per_day;
        write_return_matrix(&run.matrix("residuals.csv"), &res)?;
    }
    write_json(&run.artifact(FITS, "fit_report"), &records)?;
    if !index.is_empty() {
        write_json(&run.artifact(THRESHOLD_INDEX, "threshold_index"), &index)?;
    }
    run.finish()
}
