//! Quote ingestion, midpoint prices on a per-second trading grid,
//! intraday log returns and row normalization.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{EvtError, Result};

/// One best-bid/best-ask update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteRecord {
    pub timestamp_ms: i64,
    pub ticker: String,
    pub bid: f64,
    pub ask: f64,
}

impl QuoteRecord {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.ask + self.bid)
    }

    fn second(&self) -> i64 {
        self.timestamp_ms.div_euclid(1000)
    }
}

/// Session layout used to cut each trading day down to its retained seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSpec {
    /// Length of the full session in seconds (9:30–16:00 is 23400).
    pub session_len: u32,
    /// Seconds trimmed after the open. The boundary second itself is also
    /// dropped, so 600 removes 9:30:00 through 9:40:00 inclusive.
    pub open_offset: u32,
    /// Seconds trimmed before the close (900 drops 15:45:00 onward).
    pub close_cut: u32,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self { session_len: 23_400, open_offset: 600, close_cut: 900 }
    }
}

impl SessionSpec {
    pub fn untrimmed(session_len: u32) -> Self {
        Self { session_len, open_offset: 0, close_cut: 0 }
    }

    fn first_offset(&self) -> u32 {
        if self.open_offset > 0 {
            self.open_offset + 1
        } else {
            0
        }
    }

    pub fn seconds_per_day(&self) -> Result<u32> {
        self.session_len
            .checked_sub(self.first_offset() + self.close_cut)
            .filter(|&s| s > 0)
            .ok_or_else(|| EvtError::InvalidArgument("trims exceed the session length".into()))
    }
}

/// Retained seconds of each trading day, all days of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingGrid {
    /// Epoch second of the first retained second of each day.
    pub day_starts: Vec<i64>,
    pub seconds_per_day: usize,
    pub n_days: usize,
}

impl TradingGrid {
    pub fn total_seconds(&self) -> usize {
        self.seconds_per_day * self.n_days
    }

    /// Epoch seconds of the grid in order.
    pub fn seconds(&self) -> impl Iterator<Item = i64> + '_ {
        let spd = self.seconds_per_day as i64;
        self.day_starts.iter().flat_map(move |&s| s..s + spd)
    }
}

/// Builds the grid from session-open epoch seconds; days whose open appears
/// in `exclusions` (early closes) are dropped entirely.
pub fn build_grid(session_opens: &[i64], spec: SessionSpec, exclusions: &[i64]) -> Result<TradingGrid> {
    if session_opens.is_empty() {
        return Err(EvtError::InvalidArgument("no trading days".into()));
    }
    for (i, w) in session_opens.windows(2).enumerate() {
        if w[1] < w[0] + spec.session_len as i64 {
            return Err(EvtError::OverlappingDays { index: i + 1 });
        }
    }
    let seconds_per_day = spec.seconds_per_day()? as usize;
    let first = spec.first_offset() as i64;
    let day_starts: Vec<i64> = session_opens
        .iter()
        .filter(|open| !exclusions.contains(open))
        .map(|open| open + first)
        .collect();
    if day_starts.is_empty() {
        return Err(EvtError::InvalidArgument("all trading days excluded".into()));
    }
    Ok(TradingGrid { n_days: day_starts.len(), day_starts, seconds_per_day })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Raw,
    Normalized,
    Modes,
    Residuals,
}

/// `K x T` panel of return series, one row per ticker (or mode), columns
/// grouped into `n_days` consecutive days of `day_len` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    pub values: Array2<f64>,
    pub tickers: Vec<String>,
    /// Grid seconds per trading day.
    pub seconds_per_day: usize,
    /// Columns per day (`seconds_per_day - delta_t` for returns built from prices).
    pub day_len: usize,
    pub n_days: usize,
    pub delta_t: u32,
    pub kind: MatrixKind,
}

impl ReturnMatrix {
    pub fn new(
        values: Array2<f64>,
        tickers: Vec<String>,
        day_len: usize,
        delta_t: u32,
        kind: MatrixKind,
    ) -> Result<Self> {
        let (k, t) = values.dim();
        if tickers.len() != k {
            return Err(EvtError::Schema(format!("{} labels for {k} rows", tickers.len())));
        }
        if day_len == 0 || t % day_len != 0 {
            return Err(EvtError::Schema(format!("{t} columns are not whole days of {day_len}")));
        }
        Ok(Self {
            values,
            tickers,
            seconds_per_day: day_len,
            day_len,
            n_days: t / day_len,
            delta_t,
            kind,
        })
    }

    pub fn n_series(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.values.ncols()
    }

    /// Contiguous view of row `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        self.values.row(k).to_slice().expect("row-major storage")
    }
}

/// Per-second midpoint prices of one ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointSeries {
    pub prices: Vec<f64>,
    /// Quotes skipped because `ask < bid` or a side was nonpositive.
    pub skipped: usize,
}

/// Midpoint of the last valid quote at or before each grid second. Quotes
/// must be sorted by time; forward filling runs across day boundaries.
pub fn midpoint_series(quotes: &[QuoteRecord], grid: &TradingGrid) -> Result<MidpointSeries> {
    let ticker = quotes.first().map(|q| q.ticker.clone()).unwrap_or_default();
    if quotes.windows(2).any(|w| w[1].timestamp_ms < w[0].timestamp_ms) {
        return Err(EvtError::InvalidArgument(format!("quotes for {ticker} are not time-sorted")));
    }
    let mut prices = Vec::with_capacity(grid.total_seconds());
    let mut skipped = 0;
    let mut next = 0;
    let mut last: Option<f64> = None;
    for second in grid.seconds() {
        while next < quotes.len() && quotes[next].second() <= second {
            let q = &quotes[next];
            if q.bid > 0.0 && q.ask >= q.bid {
                last = Some(q.midpoint());
            } else {
                skipped += 1;
            }
            next += 1;
        }
        match last {
            Some(m) => prices.push(m),
            None => return Err(EvtError::MissingHistory { ticker }),
        }
    }
    skipped += quotes[next..].iter().filter(|q| !(q.bid > 0.0 && q.ask >= q.bid)).count();
    Ok(MidpointSeries { prices, skipped })
}

/// Midpoint prices for every ticker in a mixed quote stream.
#[derive(Debug, Clone)]
pub struct PricePanel {
    pub tickers: Vec<String>,
    pub prices: Vec<Vec<f64>>,
    pub skipped: BTreeMap<String, usize>,
}

pub fn midpoint_panel(quotes: &[QuoteRecord], grid: &TradingGrid) -> Result<PricePanel> {
    let mut by_ticker: BTreeMap<&str, Vec<QuoteRecord>> = BTreeMap::new();
    for q in quotes {
        by_ticker.entry(q.ticker.as_str()).or_default().push(q.clone());
    }
    let mut panel = PricePanel { tickers: Vec::new(), prices: Vec::new(), skipped: BTreeMap::new() };
    for (ticker, mut qs) in by_ticker {
        qs.sort_by_key(|q| q.timestamp_ms);
        let series = midpoint_series(&qs, grid)?;
        panel.tickers.push(ticker.to_string());
        panel.prices.push(series.prices);
        panel.skipped.insert(ticker.to_string(), series.skipped);
    }
    Ok(panel)
}

/// Intraday log returns `ln m(t + dt) - ln m(t)`; no return spans two days.
pub fn log_returns(prices: &[Vec<f64>], tickers: &[String], grid: &TradingGrid, delta_t: u32) -> Result<ReturnMatrix> {
    let dt = delta_t as usize;
    let spd = grid.seconds_per_day;
    if dt == 0 || dt >= spd {
        return Err(EvtError::InvalidArgument(format!("delta_t {delta_t} outside 1..{spd}")));
    }
    if prices.len() != tickers.len() {
        return Err(EvtError::Schema("price rows and tickers differ in length".into()));
    }
    let day_len = spd - dt;
    let t_total = day_len * grid.n_days;
    let mut values = Array2::zeros((prices.len(), t_total));
    for (k, row) in prices.iter().enumerate() {
        if row.len() != grid.total_seconds() {
            return Err(EvtError::Schema(format!("{}: {} prices for {} grid seconds", tickers[k], row.len(), grid.total_seconds())));
        }
        if let Some((column, &price)) = row.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
            return Err(EvtError::NonpositivePrice { ticker: tickers[k].clone(), column, price });
        }
        let mut out = values.row_mut(k);
        for d in 0..grid.n_days {
            let day = &row[d * spd..(d + 1) * spd];
            for t in 0..day_len {
                out[d * day_len + t] = (day[t + dt] / day[t]).ln();
            }
        }
    }
    let mut m = ReturnMatrix::new(values, tickers.to_vec(), day_len, delta_t, MatrixKind::Raw)?;
    m.seconds_per_day = spd;
    Ok(m)
}

/// Row-wise standardization to zero mean and unit (population) variance.
pub fn normalize(raw: &ReturnMatrix) -> Result<ReturnMatrix> {
    let mut out = raw.clone();
    let t = raw.n_obs() as f64;
    for (k, mut row) in out.values.rows_mut().into_iter().enumerate() {
        let mean = row.sum() / t;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / t;
        let sd = var.sqrt();
        if !(sd > 0.0) || sd <= 1e-300 {
            return Err(EvtError::ZeroVariance { ticker: raw.tickers[k].clone() });
        }
        row.mapv_inplace(|x| (x - mean) / sd);
    }
    out.kind = MatrixKind::Normalized;
    Ok(out)
}
