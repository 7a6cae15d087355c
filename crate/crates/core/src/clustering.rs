//! Extremal index estimation from interexceedance times.
//!
//! The extremal index `theta` is the inverse mean cluster size of threshold
//! exceedances. Its estimator uses only the first two moments of the gaps
//! between consecutive exceedances (Ferro–Segers):
//!
//! ```text
//! theta = min(2 <tau - 1>^2 / <(tau - 1)(tau - 2)>, 1)   if max tau > 2
//! theta = min(2 <tau>^2 / <tau^2>, 1)                     otherwise
//! ```

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::distributions::seeded_rng;
use crate::error::{EvtError, Result};
use crate::estimation::{extract_excesses, tail_threshold, Tail};

/// Exceedance counts below this get a low-count flag in sweeps.
pub const LOW_COUNT_FLAG: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterexceedanceTimes {
    pub tau: Vec<u64>,
    pub n_exceedances: usize,
}

/// Gaps between consecutive, strictly increasing exceedance times.
pub fn interexceedance(times: &[u64]) -> Result<InterexceedanceTimes> {
    if times.len() < 2 {
        return Err(EvtError::TooFewExceedances { n: times.len(), min: 2 });
    }
    let tau = times
        .windows(2)
        .map(|w| {
            if w[1] > w[0] {
                Ok(w[1] - w[0])
            } else {
                Err(EvtError::InvalidArgument("exceedance times must be strictly increasing".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterexceedanceTimes { tau, n_exceedances: times.len() })
}

/// Uncapped moment ratio behind the estimator.
pub fn ferro_segers_ratio(gaps: &InterexceedanceTimes) -> Result<f64> {
    let tau = &gaps.tau;
    if tau.is_empty() {
        return Err(EvtError::TooFewExceedances { n: gaps.n_exceedances, min: 2 });
    }
    let n = tau.len() as f64;
    let max = tau.iter().copied().max().unwrap_or(0);
    let (num, den) = if max > 2 {
        let m1 = tau.iter().map(|&t| t as f64 - 1.0).sum::<f64>() / n;
        let m2 = tau.iter().map(|&t| (t as f64 - 1.0) * (t as f64 - 2.0)).sum::<f64>() / n;
        (2.0 * m1 * m1, m2)
    } else {
        let m1 = tau.iter().map(|&t| t as f64).sum::<f64>() / n;
        let m2 = tau.iter().map(|&t| (t as f64) * (t as f64)).sum::<f64>() / n;
        (2.0 * m1 * m1, m2)
    };
    if den == 0.0 {
        return Err(EvtError::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Extremal index estimate in `(0, 1]`.
pub fn ferro_segers(gaps: &InterexceedanceTimes) -> Result<f64> {
    Ok(ferro_segers_ratio(gaps)?.min(1.0))
}

/// Convenience: estimator applied directly to exceedance times.
pub fn extremal_index(times: &[u64]) -> Result<f64> {
    ferro_segers(&interexceedance(times)?)
}

/// Simulates `n` exceedance times from the limiting waiting-time mixture.
///
/// With probability `1 - theta` the next exceedance belongs to the current
/// cluster (gap 1). Otherwise the rescaled gap `w = tau * zeta_u` is
/// exponential with mean `1 / theta`, and `tau = ceil(w / zeta_u)`.
pub fn sample_interexceedance(theta: f64, zeta_u: f64, seed: u64, n: usize) -> Result<Vec<u64>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(EvtError::InvalidArgument(format!("theta must lie in (0, 1], got {theta}")));
    }
    if !(zeta_u > 0.0 && zeta_u <= 1.0) {
        return Err(EvtError::InvalidProbability(zeta_u));
    }
    if n < 2 {
        return Err(EvtError::InvalidArgument("need at least two exceedances".into()));
    }
    let mut rng = seeded_rng(seed);
    let exp = Exp::new(theta).expect("theta is positive");
    let mut times = Vec::with_capacity(n);
    let mut t = 0u64;
    times.push(t);
    for _ in 1..n {
        let gap = if rng.random::<f64>() < 1.0 - theta {
            1
        } else {
            let w: f64 = exp.sample(&mut rng);
            ((w / zeta_u).ceil() as u64).max(1)
        };
        t += gap;
        times.push(t);
    }
    Ok(times)
}

#[derive(Debug)]
pub struct ThetaEntry {
    pub alpha: f64,
    pub threshold: f64,
    pub n_exceedances: usize,
    /// Set when the exceedance count is below [`LOW_COUNT_FLAG`].
    pub low_count: bool,
    pub theta: Result<f64>,
}

/// Extremal index against tail-quantile, thresholds by nearest rank.
/// Entries are ordered by `alpha` descending.
pub fn theta_sweep(series: &[f64], tail_quantiles: &[f64], tail: Tail) -> Result<Vec<ThetaEntry>> {
    if series.is_empty() {
        return Err(EvtError::InvalidArgument("empty series".into()));
    }
    let mut alphas = tail_quantiles.to_vec();
    for &a in &alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(EvtError::InvalidProbability(a));
        }
    }
    alphas.sort_by(|a, b| b.total_cmp(a));
    let sorted = tail.sorted_values(series);
    Ok(alphas
        .into_iter()
        .map(|alpha| {
            let threshold = tail_threshold(&sorted, alpha);
            let sample = extract_excesses(series, threshold, tail);
            let times: Vec<u64> = sample.source_times.iter().map(|&t| t as u64).collect();
            ThetaEntry {
                alpha,
                threshold,
                n_exceedances: times.len(),
                low_count: times.len() < LOW_COUNT_FLAG,
                theta: extremal_index(&times),
            }
        })
        .collect())
}

/// Sample Pearson correlation between `x[..n-l]` and `x[l..]` for lags `1..=max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() <= max_lag + 1 {
        return Err(EvtError::InvalidArgument(format!(
            "series of length {} too short for lag {max_lag}",
            series.len()
        )));
    }
    Ok((1..=max_lag).map(|lag| lagged_pearson(series, lag)).collect())
}

fn lagged_pearson(x: &[f64], lag: usize) -> f64 {
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&u, &v) in a.iter().zip(b) {
        let (du, dv) = (u - ma, v - mb);
        sab += du * dv;
        saa += du * du;
        sbb += dv * dv;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}
