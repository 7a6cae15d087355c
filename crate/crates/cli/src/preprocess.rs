use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, ValueEnum};
use evtmodes::io::{read_quotes, read_return_matrix, write_json, write_return_matrix};
use evtmodes::preprocess::{build_grid, log_returns, midpoint_panel, normalize, MatrixKind, ReturnMatrix, SessionSpec};
use evtmodes::Result;
use serde::Serialize;

use crate::run::{invalid, Run};

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Decide from the first line of the file.
    Auto,
    /// `timestamp_ms,ticker,bid,ask` quote records.
    Quotes,
    /// Headerless ticker-first return matrix, optionally with a sidecar.
    Returns,
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    /// Quote CSV or return matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Return lag in seconds.
    #[arg(long, default_value_t = 1)]
    pub delta_t: u32,
    /// Session open in seconds after midnight of the quote clock.
    #[arg(long, default_value_t = 34_200)]
    pub open_time: i64,
    #[arg(long, default_value_t = 23_400)]
    pub session_len: u32,
    /// Seconds dropped after the open.
    #[arg(long, default_value_t = 600)]
    pub open_offset: u32,
    /// Seconds dropped before the close.
    #[arg(long, default_value_t = 900)]
    pub close_cut: u32,
    /// Trading days to drop entirely, as YYYY-MM-DD.
    #[arg(long, value_delimiter = ',')]
    pub exclude_dates: Vec<String>,
    /// Returns per day for a matrix without a sidecar.
    #[arg(long)]
    pub day_len: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct PreprocessReport {
    tickers: Vec<String>,
    #[serde(rename = "T_day")]
    seconds_per_day: usize,
    returns_per_day: usize,
    #[serde(rename = "N_days")]
    n_days: usize,
    delta_t: u32,
    excluded_dates: Vec<String>,
    /// Quotes skipped per ticker for a crossed or nonpositive book.
    skipped_quotes: BTreeMap<String, usize>,
}

fn epoch_day(date: &str) -> Result<i64> {
    let d = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|e| invalid(format!("bad date {date:?}: {e}")))?;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
    Ok(d.signed_duration_since(epoch).num_days())
}

fn is_quote_file(path: &std::path::Path) -> Result<bool> {
    use std::io::BufRead;
    let mut first = String::new();
    std::io::BufReader::new(std::fs::File::open(path)?).read_line(&mut first)?;
    Ok(first.trim_start_matches('\u{feff}').starts_with("timestamp_ms"))
}

fn from_quotes(args: &PreprocessArgs) -> Result<(ReturnMatrix, BTreeMap<String, usize>)> {
    let quotes = read_quotes(&args.input)?;
    if quotes.is_empty() {
        return Err(invalid("quote file has no records"));
    }
    let days: BTreeSet<i64> = quotes.iter().map(|q| q.timestamp_ms.div_euclid(1000).div_euclid(SECONDS_PER_DAY)).collect();
    let opens: Vec<i64> = days.iter().map(|d| d * SECONDS_PER_DAY + args.open_time).collect();
    let exclusions = args
        .exclude_dates
        .iter()
        .map(|d| epoch_day(d).map(|day| day * SECONDS_PER_DAY + args.open_time))
        .collect::<Result<Vec<_>>>()?;
    let spec = SessionSpec { session_len: args.session_len, open_offset: args.open_offset, close_cut: args.close_cut };
    let grid = build_grid(&opens, spec, &exclusions)?;
    let panel = midpoint_panel(&quotes, &grid)?;
    let raw = log_returns(&panel.prices, &panel.tickers, &grid, args.delta_t)?;
    Ok((raw, panel.skipped))
}

fn from_matrix(args: &PreprocessArgs) -> Result<ReturnMatrix> {
    let m = read_return_matrix(&args.input)?;
    let has_sidecar = evtmodes::io::sidecar_path(&args.input).exists();
    match args.day_len {
        Some(day_len) if !has_sidecar => ReturnMatrix::new(m.values, m.tickers, day_len, args.delta_t, MatrixKind::Raw),
        _ => Ok(m),
    }
}

pub fn execute(args: &PreprocessArgs) -> Result<()> {
    let mut run = Run::start("preprocess", &args.out, args)?;
    run.input(&args.input)?;
    let quotes = match args.format {
        InputFormat::Auto => is_quote_file(&args.input)?,
        InputFormat::Quotes => true,
        InputFormat::Returns => false,
    };
    let (raw, skipped) = if quotes { from_quotes(args)? } else { (from_matrix(args)?, BTreeMap::new()) };
    let normalized = normalize(&raw)?;

    if quotes {
        write_return_matrix(&run.matrix("returns.csv"), &raw)?;
    }
    write_return_matrix(&run.matrix("normalized.csv"), &normalized)?;
    let report = PreprocessReport {
        tickers: normalized.tickers.clone(),
        seconds_per_day: normalized.seconds_per_day,
        returns_per_day: normalized.day_len,
        n_days: normalized.n_days,
        delta_t: normalized.delta_t,
        excluded_dates: args.exclude_dates.clone(),
        skipped_quotes: skipped,
    };
    write_json(&run.artifact("preprocess_report.json", "preprocess_report"), &report)?;
    run.finish()
}
