//! Intraday volatility profiles, deseasonalized residuals and rolling local
//! quantile thresholds, plus the time-varying GEV they imply.

use serde::{Deserialize, Serialize};

use crate::distributions::{GevParams, GpdParams};
use crate::error::{EvtError, Result};
use crate::estimation::{gev_from_gpd, nearest_rank, ExcessSample, GpdFit, Tail};
use crate::order_stats::RankedWindow;

/// Default rolling window in observations.
pub const DEFAULT_WINDOW: usize = 10_000;
const PROFILE_FLOOR: f64 = 1e-12;

/// Mean absolute value at each intraday position, averaged over days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityProfile {
    pub values: Vec<f64>,
    pub mode: Option<usize>,
}

impl VolatilityProfile {
    pub fn day_len(&self) -> usize {
        self.values.len()
    }
}

/// `V(s) = mean_d |x(d * day_len + s)|`.
pub fn intraday_profile(series: &[f64], day_len: usize) -> Result<VolatilityProfile> {
    if day_len == 0 || series.is_empty() || !series.len().is_multiple_of(day_len) {
        return Err(EvtError::InvalidArgument(format!(
            "series of length {} is not a whole number of days of {day_len}",
            series.len()
        )));
    }
    let n_days = series.len() / day_len;
    let mut values = vec![0.0; day_len];
    for day in series.chunks_exact(day_len) {
        for (v, x) in values.iter_mut().zip(day) {
            *v += x.abs();
        }
    }
    for v in &mut values {
        *v /= n_days as f64;
    }
    Ok(VolatilityProfile { values, mode: None })
}

/// `x(t) / V(t mod day_len)`. Profile entries below `1e-12 * max(V)` are
/// rejected rather than floored.
pub fn residuals(series: &[f64], profile: &VolatilityProfile) -> Result<Vec<f64>> {
    let day_len = profile.day_len();
    if day_len == 0 || !series.len().is_multiple_of(day_len) {
        return Err(EvtError::InvalidArgument("series and profile lengths do not align".into()));
    }
    let max = profile.values.iter().copied().fold(0.0, f64::max);
    if let Some(index) = profile.values.iter().position(|&v| !(v > PROFILE_FLOOR * max) || max <= 0.0) {
        return Err(EvtError::ZeroProfile { index });
    }
    Ok(series
        .chunks_exact(day_len)
        .flat_map(|day| day.iter().zip(&profile.values).map(|(x, v)| x / v))
        .collect())
}

/// Per-observation threshold from a trailing window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicThreshold {
    /// One entry per observation; entries before `warmup` repeat `u[warmup]`.
    pub u: Vec<f64>,
    pub window: usize,
    pub quantile: f64,
    /// Number of leading observations without a full window of history.
    pub warmup: usize,
}

impl DynamicThreshold {
    pub fn is_warmup(&self, t: usize) -> bool {
        t < self.warmup
    }

    /// Thresholds after the warmup region.
    pub fn defined(&self) -> &[f64] {
        &self.u[self.warmup..]
    }
}

/// `u(t)` is the nearest-rank `q`-quantile of `series[t - window .. t]`,
/// strictly excluding `series[t]`.
pub fn rolling_quantile(series: &[f64], window: usize, q: f64) -> Result<DynamicThreshold> {
    if !(q > 0.0 && q < 1.0) {
        return Err(EvtError::InvalidProbability(q));
    }
    if window == 0 {
        return Err(EvtError::InvalidArgument("window must be positive".into()));
    }
    if window >= series.len() {
        return Err(EvtError::WindowTooLarge { window, len: series.len() });
    }
    let k = nearest_rank(q, window) - 1;
    let mut set = RankedWindow::new(series);
    let mut u = vec![0.0; series.len()];
    for i in 0..window {
        set.insert(i);
    }
    for (t, slot) in u.iter_mut().enumerate().skip(window) {
        *slot = set.select(k);
        set.remove(t - window);
        set.insert(t);
    }
    let first = u[window];
    u[..window].fill(first);
    Ok(DynamicThreshold { u, window, quantile: q, warmup: window })
}

/// Rolling threshold for one tail, computed on the oriented series.
pub fn rolling_tail_threshold(series: &[f64], window: usize, q: f64, tail: Tail) -> Result<DynamicThreshold> {
    rolling_quantile(&tail.oriented(series), window, q)
}

/// Excesses `x(t) - u(t)` over a dynamic threshold after the warmup region.
/// `threshold` must come from the same series in the same orientation
/// (see [`rolling_tail_threshold`]). The reported scalar threshold is the
/// mean of the defined `u(t)`.
pub fn dynamic_exceedances(series: &[f64], threshold: &DynamicThreshold, tail: Tail) -> Result<ExcessSample> {
    if series.len() != threshold.u.len() {
        return Err(EvtError::InvalidArgument("threshold and series lengths differ".into()));
    }
    let sign = tail.sign();
    let start = threshold.warmup;
    let (source_times, excesses) = (start..series.len())
        .filter_map(|t| {
            let v = sign * series[t];
            let u = threshold.u[t];
            (v > u).then_some((t, v - u))
        })
        .unzip();
    let defined = threshold.defined();
    let level = defined.iter().sum::<f64>() / defined.len() as f64;
    Ok(ExcessSample { threshold: level, excesses, source_times, total_count: series.len() - start })
}

/// GEV with constant shape and scale and a location `b(t)` that follows
/// the dynamic threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonstationaryGev {
    pub gamma: f64,
    pub scale: f64,
    pub loc: Vec<f64>,
    pub warmup: usize,
}

impl NonstationaryGev {
    pub fn at(&self, t: usize) -> GevParams {
        GevParams { gamma: self.gamma, loc: self.loc[t], scale: self.scale }
    }

    /// `(t, x, density)` triples on `x_grid` for every `stride`-th defined `t`.
    pub fn density_surface(&self, x_grid: &[f64], stride: usize) -> Vec<(usize, f64, f64)> {
        let stride = stride.max(1);
        (self.warmup..self.loc.len())
            .step_by(stride)
            .flat_map(|t| {
                let g = self.at(t);
                x_grid.iter().map(move |&x| (t, x, g.pdf(x)))
            })
            .collect()
    }
}

/// Applies the GPD-to-GEV mapping at every `t` with `u = u(t)`.
pub fn nonstationary_gev(
    fit: &GpdFit,
    threshold: &DynamicThreshold,
    zeta_u: f64,
    block_len: usize,
) -> Result<NonstationaryGev> {
    nonstationary_gev_from_params(&fit.params, threshold, zeta_u, block_len)
}

/// [`nonstationary_gev`] for bare GPD parameters, e.g. read back from a fit report.
pub fn nonstationary_gev_from_params(
    params: &GpdParams,
    threshold: &DynamicThreshold,
    zeta_u: f64,
    block_len: usize,
) -> Result<NonstationaryGev> {
    let base = gev_from_gpd(params, 0.0, zeta_u, block_len)?;
    let loc = threshold.u.iter().map(|u| u + base.loc).collect();
    Ok(NonstationaryGev { gamma: base.gamma, scale: base.scale, loc, warmup: threshold.warmup })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(series: &[f64], window: usize, q: f64, t: usize) -> f64 {
        let mut w = series[t - window..t].to_vec();
        w.sort_by(f64::total_cmp);
        w[nearest_rank(q, window) - 1]
    }

    #[test]
    fn constant_profile() {
        let p = intraday_profile(&[-2.0, 2.0, 2.0, -2.0, 2.0, 2.0], 3).unwrap();
        assert_eq!(p.values, vec![2.0; 3]);
    }

    #[test]
    fn two_day_profile() {
        let p = intraday_profile(&[1.0, 3.0, 3.0, 1.0], 2).unwrap();
        assert_eq!(p.values, vec![2.0, 2.0]);
    }

    #[test]
    fn residuals_of_replicated_profile() {
        let profile = VolatilityProfile { values: vec![0.5, 2.0, 3.0], mode: Some(1) };
        let series: Vec<f64> = profile.values.repeat(4);
        assert!(residuals(&series, &profile).unwrap().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn unit_profile_is_identity() {
        let series = vec![0.3, -1.2, 4.0, 0.0];
        let profile = VolatilityProfile { values: vec![1.0, 1.0], mode: None };
        assert_eq!(residuals(&series, &profile).unwrap(), series);
    }

    #[test]
    fn zero_profile_rejected() {
        let profile = VolatilityProfile { values: vec![1.0, 1e-14, 2.0], mode: None };
        match residuals(&[1.0; 3], &profile) {
            Err(EvtError::ZeroProfile { index }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_series_threshold() {
        let th = rolling_quantile(&[2.5; 50], 10, 0.9).unwrap();
        assert!(th.u.iter().all(|&u| u == 2.5));
        assert_eq!(th.warmup, 10);
    }

    #[test]
    fn ramp_median() {
        let series: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let th = rolling_quantile(&series, 100, 0.5).unwrap();
        for t in 100..2000 {
            assert_eq!(th.u[t], t as f64 - 51.0);
        }
        assert!(th.u[..100].iter().all(|&u| u == th.u[100]));
    }

    #[test]
    fn matches_naive_sort_with_ties() {
        let series: Vec<f64> = (0..3000u64).map(|i| ((i * 2654435761) % 97) as f64).collect();
        for (w, q) in [(10, 0.5), (37, 0.99), (250, 0.999)] {
            let th = rolling_quantile(&series, w, q).unwrap();
            for t in w..series.len() {
                assert_eq!(th.u[t], naive(&series, w, q, t), "w={w} q={q} t={t}");
            }
        }
    }

    #[test]
    fn window_too_large() {
        assert!(matches!(rolling_quantile(&[1.0; 5], 5, 0.5), Err(EvtError::WindowTooLarge { window: 5, len: 5 })));
    }

    #[test]
    fn flat_series_has_no_exceedances() {
        let series = vec![1.0; 40];
        let th = rolling_quantile(&series, 10, 0.99).unwrap();
        let ex = dynamic_exceedances(&series, &th, Tail::Positive).unwrap();
        assert!(ex.is_empty());
        assert_eq!(ex.total_count, 30);
    }

    #[test]
    fn negative_tail_uses_oriented_threshold() {
        let series: Vec<f64> = (0..200).map(|i| if i % 50 == 49 { -10.0 } else { (i % 7) as f64 * 0.1 }).collect();
        let th = rolling_tail_threshold(&series, 40, 0.95, Tail::Negative).unwrap();
        let ex = dynamic_exceedances(&series, &th, Tail::Negative).unwrap();
        assert_eq!(ex.source_times, vec![49, 99, 149, 199]);
    }

    fn fit_with(gamma: f64) -> GpdFit {
        GpdFit {
            params: GpdParams { gamma, sigma: 0.7 },
            se_gamma: 0.0,
            se_sigma: 0.0,
            se_valid: true,
            n: 100,
            threshold: 1.5,
            nrmsd: 0.0,
            log_likelihood: 0.0,
        }
    }

    #[test]
    fn constant_threshold_reduces_to_static_gev() {
        let fit = fit_with(0.2);
        let th = DynamicThreshold { u: vec![1.5; 20], window: 5, quantile: 0.99, warmup: 5 };
        let ns = nonstationary_gev(&fit, &th, 0.01, 500).unwrap();
        let stat = crate::estimation::infer_gev(&fit, 0.01, 500).unwrap();
        for t in 0..20 {
            assert!((ns.loc[t] - stat.loc).abs() < 1e-12);
        }
        assert!((ns.scale - stat.scale).abs() < 1e-15);
    }

    #[test]
    fn gumbel_location_shifts_with_threshold() {
        let fit = fit_with(0.0);
        let u: Vec<f64> = (0..10).map(|t| t as f64 * 0.3).collect();
        let shifted: Vec<f64> = u.iter().map(|x| x + 2.0).collect();
        let mk = |u: Vec<f64>| DynamicThreshold { u, window: 2, quantile: 0.9, warmup: 2 };
        let a = nonstationary_gev(&fit, &mk(u), 0.05, 100).unwrap();
        let b = nonstationary_gev(&fit, &mk(shifted), 0.05, 100).unwrap();
        for t in 0..10 {
            assert!((b.loc[t] - a.loc[t] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_skips_warmup_and_strides() {
        let fit = fit_with(0.1);
        let th = DynamicThreshold { u: vec![1.0; 12], window: 4, quantile: 0.9, warmup: 4 };
        let ns = nonstationary_gev(&fit, &th, 0.05, 100).unwrap();
        let s = ns.density_surface(&[0.0, 5.0], 3);
        let ts: Vec<usize> = s.iter().map(|p| p.0).collect();
        assert_eq!(ts, vec![4, 4, 7, 7, 10, 10]);
    }
}
