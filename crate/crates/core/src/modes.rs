//! Correlation matrix, spectral decomposition and rotation of normalized
//! returns into uncorrelated unit-variance modes.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{EvtError, Result};
use crate::linalg::jacobi_eigen;
use crate::preprocess::{MatrixKind, ReturnMatrix};

/// Smallest eigenvalue accepted by [`rotate_rescale`].
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenpairs of a correlation matrix, eigenvalues descending.
///
/// Signs are fixed so that the largest-magnitude entry of every eigenvector is
/// nonnegative (the first such entry when several share the maximum).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: Array2<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Array1<f64> {
        self.eigenvectors.column(k).to_owned()
    }

    /// `U Λ U†`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &l) in scaled.columns_mut().into_iter().zip(&self.eigenvalues) {
            col *= l;
        }
        scaled.dot(&self.eigenvectors.t())
    }
}

/// `C = M M† / T` for a normalized matrix.
pub fn correlation_matrix(m: &ReturnMatrix) -> Result<Array2<f64>> {
    if m.kind != MatrixKind::Normalized {
        return Err(EvtError::InvalidArgument(format!("correlation needs a normalized matrix, got {:?}", m.kind)));
    }
    let t = m.n_obs() as f64;
    let mut c = m.values.dot(&m.values.t()) / t;
    let k = c.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let v = (0.5 * (c[[i, j]] + c[[j, i]])).clamp(-1.0, 1.0);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    Ok(c)
}

fn dominant_index(v: ndarray::ArrayView1<f64>) -> usize {
    let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-12 * max.max(f64::MIN_POSITIVE);
    v.iter().position(|x| (x.abs() - max).abs() <= tol).unwrap_or(0)
}

/// Eigendecomposition of a symmetric matrix with the sign and ordering
/// conventions of [`Spectrum`].
pub fn spectral_decompose(c: &Array2<f64>) -> Result<Spectrum> {
    let k = c.nrows();
    if k == 0 || c.ncols() != k {
        return Err(EvtError::InvalidArgument("correlation matrix must be square and nonempty".into()));
    }
    let scale = c.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let asymmetry = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (c[[i, j]] - c[[j, i]]).abs())
        .fold(0.0, f64::max);
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(EvtError::NotSymmetric { asymmetry });
    }
    let (values, mut vectors, converged) = jacobi_eigen(c, JACOBI_TOL, MAX_SWEEPS);
    if !converged {
        return Err(EvtError::NonConvergence { iterations: MAX_SWEEPS });
    }

    let mut dominant = Vec::with_capacity(k);
    for mut col in vectors.columns_mut() {
        let d = dominant_index(col.view());
        if col[d] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        dominant.push(d);
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    // runs of numerically equal eigenvalues are reordered by dominant entry
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k {
            let (prev, cur) = (values[order[end - 1]], values[order[end]]);
            if prev - cur > 1e-12 * prev.abs().max(1.0) {
                break;
            }
            end += 1;
        }
        order[start..end].sort_by_key(|&i| dominant[i]);
        start = end;
    }
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = vectors.select(Axis(1), &order);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Whitened modes `R = Λ^{-1/2} U† M`, rows labeled `mode_1..mode_K`.
pub fn rotate_rescale(m: &ReturnMatrix, spectrum: &Spectrum) -> Result<ReturnMatrix> {
    rotate(m, spectrum, true, DEFAULT_EIGEN_FLOOR)
}

/// `U† M`, optionally rescaled by `Λ^{-1/2}`. The unscaled variant keeps each
/// mode's variance equal to its eigenvalue.
pub fn rotate(m: &ReturnMatrix, spectrum: &Spectrum, rescale: bool, eigen_floor: f64) -> Result<ReturnMatrix> {
    if spectrum.dim() != m.n_series() {
        return Err(EvtError::InvalidArgument(format!(
            "spectrum of dimension {} for {} series",
            spectrum.dim(),
            m.n_series()
        )));
    }
    let min = spectrum.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if rescale && !(min >= eigen_floor) {
        return Err(EvtError::NearSingular { min_eigenvalue: min });
    }
    let mut rot = spectrum.eigenvectors.t().to_owned();
    if rescale {
        for (mut row, &l) in rot.rows_mut().into_iter().zip(&spectrum.eigenvalues) {
            row /= l.sqrt();
        }
    }
    let values = rot.dot(&m.values);
    let tickers = (1..=m.n_series()).map(|k| format!("mode_{k}")).collect();
    Ok(ReturnMatrix {
        values,
        tickers,
        seconds_per_day: m.seconds_per_day,
        day_len: m.day_len,
        n_days: m.n_days,
        delta_t: m.delta_t,
        kind: MatrixKind::Modes,
    })
}

/// Sector composition of one eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: usize,
    pub eigenvalue: f64,
    pub entries: Vec<(String, f64)>,
    pub participation_ratio: f64,
    pub dominant_sector: String,
    /// Sum of squared entries per sector.
    pub sector_weights: BTreeMap<String, f64>,
}

pub fn participation_ratio(v: &[f64]) -> f64 {
    1.0 / v.iter().map(|x| x.powi(4)).sum::<f64>()
}

/// Reports on the `top_k` leading eigenvectors. Every ticker must have a sector.
pub fn eigenvector_report(
    spectrum: &Spectrum,
    tickers: &[String],
    sector_map: &BTreeMap<String, String>,
    top_k: usize,
) -> Result<Vec<ModeReport>> {
    if tickers.len() != spectrum.dim() {
        return Err(EvtError::InvalidArgument("ticker count does not match spectrum".into()));
    }
    if let Some(t) = tickers.iter().find(|t| !sector_map.contains_key(*t)) {
        return Err(EvtError::InvalidArgument(format!("no sector for ticker {t}")));
    }
    let reports = (0..top_k.min(spectrum.dim()))
        .map(|k| {
            let v = spectrum.eigenvector(k);
            let mut sector_weights: BTreeMap<String, f64> = BTreeMap::new();
            for (t, x) in tickers.iter().zip(v.iter()) {
                *sector_weights.entry(sector_map[t].clone()).or_default() += x * x;
            }
            let dominant_sector = sector_weights
                .iter()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(s, _)| s.clone())
                .unwrap_or_default();
            ModeReport {
                mode: k + 1,
                eigenvalue: spectrum.eigenvalues[k],
                entries: tickers.iter().cloned().zip(v.iter().copied()).collect(),
                participation_ratio: participation_ratio(v.as_slice().expect("contiguous")),
                dominant_sector,
                sector_weights,
            }
        })
        .collect();
    Ok(reports)
}

/// Normalized eigenvalue histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Probability density per bin; `sum(density * width) = 1`.
    pub density: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn eigenvalue_density(spectrum: &Spectrum, n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(EvtError::InvalidArgument("n_bins must be positive".into()));
    }
    let vals = &spectrum.eigenvalues;
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo > 1e-12 * hi.abs().max(1.0) {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; n_bins];
    for &v in vals {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let total = vals.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    Ok(Histogram { edges, density, counts })
}
