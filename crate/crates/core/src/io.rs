//! File formats: quote CSV input, return matrices with JSON sidecars, and the
//! CSV/JSON artifacts consumed by the figure scripts.
//!
//! Every writer goes through [`atomic_write`], so a failed run never leaves a
//! half-written file behind. Floats are printed with Rust's shortest
//! round-trip formatting, which makes load/save/load bit-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{EvtError, Result};
use crate::estimation::{SweepEntry, Tail};
use crate::modes::{Histogram, Spectrum};
use crate::preprocess::{MatrixKind, QuoteRecord, ReturnMatrix};

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Comma-separated table with an optional header row.
pub fn write_table<R, I>(path: &Path, header: Option<&[&str]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| EvtError::Io(e.into_error()))?;
    atomic_write(path, &bytes)
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| EvtError::Schema(format!("line {line}: '{s}' is not a number")))
}

/// Reads `timestamp_ms,ticker,bid,ask` quotes.
pub fn read_quotes(path: &Path) -> Result<Vec<QuoteRecord>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = r.headers()?.clone();
    let expected = ["timestamp_ms", "ticker", "bid", "ask"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(EvtError::Schema(format!("quote header must be {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for rec in r.deserialize() {
        let q: QuoteRecord = rec.map_err(|e| EvtError::Schema(e.to_string()))?;
        out.push(q);
    }
    Ok(out)
}

/// Layout metadata stored next to a matrix CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub tickers: Vec<String>,
    /// Grid seconds per trading day.
    #[serde(rename = "T_day")]
    pub seconds_per_day: usize,
    /// Columns per day in the matrix.
    pub returns_per_day: usize,
    #[serde(rename = "N_days")]
    pub n_days: usize,
    pub delta_t: u32,
    pub kind: MatrixKind,
}

impl MatrixSidecar {
    pub fn of(m: &ReturnMatrix) -> Self {
        Self {
            tickers: m.tickers.clone(),
            seconds_per_day: m.seconds_per_day,
            returns_per_day: m.day_len,
            n_days: m.n_days,
            delta_t: m.delta_t,
            kind: m.kind,
        }
    }
}

/// `name.csv` for `name.json` and vice versa.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the matrix as headerless CSV (ticker first) plus its sidecar.
pub fn write_return_matrix(csv_path: &Path, m: &ReturnMatrix) -> Result<()> {
    let rows = m.values.rows().into_iter().zip(&m.tickers).map(|(row, t)| {
        std::iter::once(t.clone()).chain(row.iter().map(|&x| fmt(x))).collect::<Vec<_>>()
    });
    write_table(csv_path, None, rows)?;
    write_json(&sidecar_path(csv_path), &MatrixSidecar::of(m))
}

/// Reads a headerless ticker-first matrix CSV. Without a sidecar the whole
/// row is treated as a single day of raw returns.
pub fn read_return_matrix(csv_path: &Path) -> Result<ReturnMatrix> {
    let side = sidecar_path(csv_path);
    let sidecar: Option<MatrixSidecar> = if side.exists() { Some(read_json(&side)?) } else { None };
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(csv_path)?;
    let mut tickers = Vec::new();
    let mut data = Vec::new();
    let mut width = None;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut fields = rec.iter();
        let ticker = fields.next().ok_or_else(|| EvtError::Schema(format!("line {}: empty row", line + 1)))?;
        tickers.push(ticker.to_string());
        let before = data.len();
        for f in fields {
            data.push(parse_f64(f, line + 1)?);
        }
        let n = data.len() - before;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(EvtError::Schema(format!("line {}: {n} values, expected {w}", line + 1)))
            }
            _ => {}
        }
    }
    let t = width.filter(|&w| w > 0).ok_or_else(|| EvtError::Schema("matrix has no values".into()))?;
    let values = Array2::from_shape_vec((tickers.len(), t), data).expect("rows have equal width");
    match sidecar {
        Some(s) => {
            if s.tickers != tickers {
                return Err(EvtError::Schema("sidecar tickers do not match the matrix rows".into()));
            }
            let mut m = ReturnMatrix::new(values, tickers, s.returns_per_day, s.delta_t, s.kind)?;
            if m.n_days != s.n_days {
                return Err(EvtError::Schema(format!("sidecar says {} days, matrix has {}", s.n_days, m.n_days)));
            }
            m.seconds_per_day = s.seconds_per_day;
            Ok(m)
        }
        None => ReturnMatrix::new(values, tickers, t, 1, MatrixKind::Raw),
    }
}

/// `eigenvalues.csv` (`k,eigenvalue`) and `eigenvectors.csv` (ticker rows,
/// `mode_k` columns).
pub fn write_spectrum(dir: &Path, spectrum: &Spectrum, tickers: &[String]) -> Result<()> {
    write_table(
        &dir.join("eigenvalues.csv"),
        Some(&["k", "eigenvalue"]),
        spectrum.eigenvalues.iter().enumerate().map(|(k, l)| vec![(k + 1).to_string(), fmt(*l)]),
    )?;
    let mut header = vec!["ticker".to_string()];
    header.extend((1..=spectrum.dim()).map(|k| format!("mode_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        &dir.join("eigenvectors.csv"),
        Some(&header_refs),
        spectrum.eigenvectors.rows().into_iter().zip(tickers).map(|(row, t)| {
            std::iter::once(t.clone()).chain(row.iter().map(|&x| fmt(x))).collect::<Vec<_>>()
        }),
    )
}

pub fn read_spectrum(dir: &Path) -> Result<(Spectrum, Vec<String>)> {
    let mut eigenvalues = Vec::new();
    let mut r = csv::Reader::from_path(dir.join("eigenvalues.csv"))?;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        eigenvalues.push(parse_f64(rec.get(1).unwrap_or(""), i + 2)?);
    }
    let k = eigenvalues.len();
    let mut r = csv::Reader::from_path(dir.join("eigenvectors.csv"))?;
    let mut tickers = Vec::new();
    let mut data = Vec::with_capacity(k * k);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != k + 1 {
            return Err(EvtError::Schema(format!("eigenvectors.csv line {}: expected {} fields", i + 2, k + 1)));
        }
        tickers.push(rec[0].to_string());
        for f in rec.iter().skip(1) {
            data.push(parse_f64(f, i + 2)?);
        }
    }
    if tickers.len() != k {
        return Err(EvtError::Schema("eigenvector matrix is not square".into()));
    }
    let eigenvectors = Array2::from_shape_vec((k, k), data).expect("checked shape");
    Ok((Spectrum { eigenvalues, eigenvectors }, tickers))
}

pub fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    write_table(
        path,
        Some(&["left", "right", "count", "density"]),
        (0..h.counts.len()).map(|i| vec![fmt(h.edges[i]), fmt(h.edges[i + 1]), h.counts[i].to_string(), fmt(h.density[i])]),
    )
}

/// One threshold of a sweep, as stored in `fits.json`. Failed fits keep
/// their error in `error` and leave the parameter fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub mode: String,
    pub tail: Tail,
    pub alpha: f64,
    pub threshold: f64,
    pub gamma: Option<f64>,
    pub se_gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub se_sigma: Option<f64>,
    pub n: usize,
    pub nrmsd: Option<f64>,
    pub theta: Option<f64>,
    pub zeta: f64,
    #[serde(default)]
    pub rolling: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FitRecord {
    pub fn from_entry(mode: &str, tail: Tail, entry: &SweepEntry, rolling: bool) -> Self {
        let fit = entry.fit.as_ref().ok();
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            mode: mode.to_string(),
            tail,
            alpha: entry.alpha,
            threshold: entry.threshold,
            gamma: fit.map(|f| f.params.gamma),
            se_gamma: fit.filter(|f| f.se_valid).and_then(|f| finite(f.se_gamma)),
            sigma: fit.map(|f| f.params.sigma),
            se_sigma: fit.filter(|f| f.se_valid).and_then(|f| finite(f.se_sigma)),
            n: entry.n_exceedances,
            nrmsd: fit.and_then(|f| finite(f.nrmsd)),
            theta: entry.theta.as_ref().ok().copied(),
            zeta: entry.zeta,
            rolling,
            error: entry.fit.as_ref().err().map(|e| e.to_string()),
        }
    }
}

pub fn write_pairs(path: &Path, header: [&str; 2], pairs: &[(f64, f64)]) -> Result<()> {
    write_table(path, Some(&header), pairs.iter().map(|(a, b)| [fmt(*a), fmt(*b)]))
}

pub fn write_column(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    write_table(path, Some(&[header]), values.iter().map(|v| [fmt(*v)]))
}

pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .enumerate()
        .map(|(i, rec)| parse_f64(rec?.get(0).unwrap_or(""), i + 2))
        .collect()
}

/// `(t, u)` rows of a dynamic threshold.
pub fn write_threshold(path: &Path, u: &[f64]) -> Result<()> {
    write_table(path, Some(&["t", "u"]), u.iter().enumerate().map(|(t, u)| [t.to_string(), fmt(*u)]))
}

/// `(t, x, density)` rows.
pub fn write_surface(path: &Path, surface: &[(usize, f64, f64)]) -> Result<()> {
    write_table(
        path,
        Some(&["t", "x", "density"]),
        surface.iter().map(|(t, x, d)| [t.to_string(), fmt(*x), fmt(*d)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let vals = array![[0.1, -1.0 / 3.0, 1e-300, 5e10], [f64::MIN_POSITIVE, 2.0, -0.0, 7.25]];
        let m = ReturnMatrix::new(vals, vec!["A".into(), "B,C".into()], 2, 1, MatrixKind::Normalized).unwrap();
        write_return_matrix(&p, &m).unwrap();
        let back = read_return_matrix(&p).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.values.iter().zip(m.values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn matrix_without_sidecar_is_one_raw_day() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "X,1,2,3\nY,4,5,6\n").unwrap();
        let m = read_return_matrix(&p).unwrap();
        assert_eq!(m.n_days, 1);
        assert_eq!(m.day_len, 3);
        assert_eq!(m.kind, MatrixKind::Raw);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "X,1,2,3\nY,4,5\n").unwrap();
        assert!(matches!(read_return_matrix(&p), Err(EvtError::Schema(_)) | Err(EvtError::Csv(_))));
    }

    #[test]
    fn quotes_parse_and_header_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.csv");
        fs::write(&p, "timestamp_ms,ticker,bid,ask\n1000,AAA,10.0,10.5\n").unwrap();
        let q = read_quotes(&p).unwrap();
        assert_eq!(q[0].ticker, "AAA");
        fs::write(&p, "time,ticker,bid,ask\n1000,AAA,10.0,10.5\n").unwrap();
        assert!(matches!(read_quotes(&p), Err(EvtError::Schema(_))));
    }

    #[test]
    fn spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = crate::modes::spectral_decompose(&array![[1.0, 0.3], [0.3, 1.0]]).unwrap();
        let tickers = vec!["A".to_string(), "B".to_string()];
        write_spectrum(dir.path(), &s, &tickers).unwrap();
        let (back, t) = read_spectrum(dir.path()).unwrap();
        assert_eq!(back, s);
        assert_eq!(t, tickers);
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_json(&p, &vec![1, 2, 3]).unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("x.json")]);
    }
}
