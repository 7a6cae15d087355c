//! Peaks-over-threshold estimation: excess extraction, maximum-likelihood
//! GPD fits with asymptotic standard errors, Q-Q diagnostics, threshold
//! sweeps and GEV parameters implied by a GPD fit.
//!
//! The log-likelihood of `n` excesses `x_i` is
//!
//! ```text
//! l(gamma, sigma) = -n ln sigma - (1 + 1/gamma) sum ln(1 + gamma x_i / sigma)
//! l(0, sigma)     = -n ln sigma - sum x_i / sigma
//! ```
//!
//! It is maximized by a simplex search over `(gamma, ln sigma)` started from
//! probability-weighted-moment estimates, followed by Newton steps on the
//! analytic gradient. Infeasible points (`1 + gamma x_max / sigma <= 0` or
//! `gamma <= -1`, where the likelihood is unbounded) are penalized.

use serde::{Deserialize, Serialize};

use crate::clustering::extremal_index;
use crate::distributions::{is_zero_shape, GevParams, GpdParams};
use crate::error::{EvtError, Result};
use crate::optim::{nelder_mead, SimplexOptions};

/// Which tail of a series is analyzed. The negative tail is handled by
/// negating the series and reusing the upper-tail code path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tail {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

impl Tail {
    pub fn sign(self) -> f64 {
        match self {
            Tail::Positive => 1.0,
            Tail::Negative => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Tail::Positive => "pos",
            Tail::Negative => "neg",
        }
    }

    /// Series mapped so that the analyzed tail is the upper one.
    pub fn oriented(self, series: &[f64]) -> Vec<f64> {
        match self {
            Tail::Positive => series.to_vec(),
            Tail::Negative => series.iter().map(|v| -v).collect(),
        }
    }

    pub(crate) fn sorted_values(self, series: &[f64]) -> Vec<f64> {
        let mut v = self.oriented(series);
        v.sort_by(f64::total_cmp);
        v
    }
}

impl std::str::FromStr for Tail {
    type Err = EvtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" | "positive" | "+" => Ok(Tail::Positive),
            "neg" | "negative" | "-" => Ok(Tail::Negative),
            other => Err(EvtError::InvalidArgument(format!("unknown tail '{other}'"))),
        }
    }
}

/// 1-based nearest rank `ceil(q n)`, clamped to `1..=n`.
///
/// A relative slack of `1e-9` keeps products such as `0.995 * 1e6` from
/// rounding up past an exact integer.
pub fn nearest_rank(q: f64, n: usize) -> usize {
    let k = (q * n as f64 * (1.0 - 1e-12) - 1e-9).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Empirical `q`-quantile by nearest rank from ascending-sorted data.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[nearest_rank(q, sorted.len()) - 1]
}

pub(crate) fn tail_threshold(sorted_oriented: &[f64], alpha: f64) -> f64 {
    empirical_quantile(sorted_oriented, 1.0 - alpha)
}

/// Exceedances of a threshold, kept in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessSample {
    pub threshold: f64,
    pub excesses: Vec<f64>,
    pub source_times: Vec<usize>,
    /// Length of the parent series.
    pub total_count: usize,
}

impl ExcessSample {
    pub fn len(&self) -> usize {
        self.excesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excesses.is_empty()
    }

    /// Fraction of the parent series above the threshold.
    pub fn exceedance_probability(&self) -> f64 {
        if self.total_count == 0 {
            0.0
        } else {
            self.len() as f64 / self.total_count as f64
        }
    }
}

/// Values strictly above `threshold` minus the threshold. For the negative
/// tail the series is negated first and `threshold` refers to the negated
/// series.
pub fn extract_excesses(series: &[f64], threshold: f64, tail: Tail) -> ExcessSample {
    let sign = tail.sign();
    let (source_times, excesses) = series
        .iter()
        .enumerate()
        .filter_map(|(t, &v)| {
            let v = sign * v;
            (v > threshold).then_some((t, v - threshold))
        })
        .unzip();
    ExcessSample { threshold, excesses, source_times, total_count: series.len() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub se_gamma: f64,
    pub se_sigma: f64,
    /// False for `gamma <= -1/2`, outside the regime of the asymptotics.
    pub valid: bool,
}

/// Asymptotic standard errors `sqrt((1+gamma)^2 / n)` and `sqrt(2 sigma^2 (1+gamma) / n)`.
pub fn asymptotic_se(gamma: f64, sigma: f64, n: usize) -> StandardErrors {
    let n = n.max(1) as f64;
    let one_plus = 1.0 + gamma;
    StandardErrors {
        se_gamma: (one_plus * one_plus / n).sqrt(),
        se_sigma: (2.0 * sigma * sigma * one_plus.max(0.0) / n).sqrt(),
        valid: gamma > -0.5,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Minimum number of excesses needed to attempt a fit.
    pub n_min: usize,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { n_min: 50, max_iter: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub params: GpdParams,
    pub se_gamma: f64,
    pub se_sigma: f64,
    pub se_valid: bool,
    pub n: usize,
    pub threshold: f64,
    pub nrmsd: f64,
    pub log_likelihood: f64,
}

/// GPD log-likelihood of `excesses`; `-inf` outside the feasible region.
pub fn gpd_log_likelihood(excesses: &[f64], p: &GpdParams) -> f64 {
    let (gamma, sigma) = (p.gamma, p.sigma);
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = excesses.len() as f64;
    let mut acc = 0.0;
    if is_zero_shape(gamma) {
        for &x in excesses {
            acc -= x / sigma;
        }
    } else {
        for &x in excesses {
            let a = gamma * x / sigma;
            if a <= -1.0 {
                return f64::NEG_INFINITY;
            }
            let l = a.ln_1p();
            acc -= l + l / gamma;
        }
    }
    acc - n * sigma.ln()
}

/// Analytic gradient `[dl/dgamma, dl/dsigma]` of [`gpd_log_likelihood`].
pub fn gpd_log_likelihood_gradient(excesses: &[f64], p: &GpdParams) -> [f64; 2] {
    let (gamma, sigma) = (p.gamma, p.sigma);
    let n = excesses.len() as f64;
    let mut d_gamma = 0.0;
    let mut sum_x_over_z = 0.0;
    for &x in excesses {
        let y = x / sigma;
        let a = gamma * y;
        let z = 1.0 + a;
        // (ln(1+a) - a/(1+a)) / gamma^2 = y^2 h(a)/a^2
        let h_over_a2 = if a.abs() < 1e-4 {
            0.5 - a * (2.0 / 3.0 - a * (0.75 - a * 0.8))
        } else {
            (a.ln_1p() - a / z) / (a * a)
        };
        d_gamma += y * y * h_over_a2 - y / z;
        sum_x_over_z += x / z;
    }
    let d_sigma = -n / sigma + (1.0 + gamma) / (sigma * sigma) * sum_x_over_z;
    [d_gamma, d_sigma]
}

/// Probability-weighted-moment estimates used as the optimizer start.
fn pwm_start(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let a0 = sorted.iter().sum::<f64>() / n;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (1.0 - (i as f64 + 1.0 - 0.35) / n) * x)
        .sum::<f64>()
        / n;
    let denom = a0 - 2.0 * a1;
    let gamma = 2.0 - a0 / denom;
    let sigma = 2.0 * a0 * a1 / denom;
    if gamma.is_finite() && sigma.is_finite() && sigma > 0.0 {
        (gamma.clamp(-0.9, 0.9), sigma)
    } else {
        (0.0, a0)
    }
}

fn feasible(gamma: f64, sigma: f64, x_max: f64) -> bool {
    gamma > -1.0 && sigma > 0.0 && 1.0 + gamma * x_max / sigma > 0.0
}

/// Maximum-likelihood GPD fit with default options.
pub fn fit_gpd_mle(sample: &ExcessSample) -> Result<GpdFit> {
    fit_gpd_mle_with(sample, &FitOptions::default())
}

pub fn fit_gpd_mle_with(sample: &ExcessSample, opts: &FitOptions) -> Result<GpdFit> {
    let n = sample.len();
    if n < opts.n_min.max(2) {
        return Err(EvtError::TooFewExceedances { n, min: opts.n_min.max(2) });
    }
    let mut sorted = sample.excesses.clone();
    sorted.sort_by(f64::total_cmp);
    let (x_min, x_max) = (sorted[0], sorted[n - 1]);
    if !(x_min > 0.0) {
        return Err(EvtError::InvalidArgument("excesses must be strictly positive".into()));
    }
    if x_max <= x_min {
        return Err(EvtError::DegenerateRange);
    }

    // Work on excesses scaled to unit mean; sigma scales back linearly.
    let scale = sorted.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = sorted.iter().map(|x| x / scale).collect();
    let y_max = x_max / scale;

    let (g0, mut s0) = pwm_start(&y);
    if !feasible(g0, s0, y_max) {
        s0 = -g0 * y_max * 1.1;
    }

    let objective = |p: [f64; 2]| {
        let (gamma, sigma) = (p[0], p[1].exp());
        if !feasible(gamma, sigma, y_max) {
            let violation = (-1.0 - gamma).max(0.0) + (-(1.0 + gamma * y_max / sigma)).max(0.0);
            return 1e12 * (1.0 + violation);
        }
        -gpd_log_likelihood(&y, &GpdParams { gamma, sigma })
    };
    let simplex = nelder_mead(
        objective,
        [g0, s0.ln()],
        [0.05, 0.05],
        SimplexOptions { max_iter: opts.max_iter, f_tol: 1e-14, x_tol: 1e-9 },
    );
    if !simplex.converged {
        return Err(EvtError::NonConvergence { iterations: simplex.iterations });
    }
    let (mut gamma, mut sigma) = (simplex.x[0], simplex.x[1].exp());
    if !feasible(gamma, sigma, y_max) {
        return Err(EvtError::NonConvergence { iterations: simplex.iterations });
    }
    (gamma, sigma) = newton_polish(&y, gamma, sigma, y_max);

    let params = GpdParams::new(gamma, sigma * scale)?;
    let se = asymptotic_se(params.gamma, params.sigma, n);
    let mut fit = GpdFit {
        params,
        se_gamma: se.se_gamma,
        se_sigma: se.se_sigma,
        se_valid: se.valid,
        n,
        threshold: sample.threshold,
        nrmsd: 0.0,
        log_likelihood: gpd_log_likelihood(&sample.excesses, &params),
    };
    fit.nrmsd = nrmsd(sample, &fit)?;
    Ok(fit)
}

/// Newton steps on the analytic gradient with a finite-difference Hessian.
/// A step is kept only if it stays feasible and raises the likelihood.
fn newton_polish(y: &[f64], mut gamma: f64, mut sigma: f64, y_max: f64) -> (f64, f64) {
    let ll = |g: f64, s: f64| gpd_log_likelihood(y, &GpdParams { gamma: g, sigma: s });
    let grad = |g: f64, s: f64| gpd_log_likelihood_gradient(y, &GpdParams { gamma: g, sigma: s });
    let mut best = ll(gamma, sigma);
    for _ in 0..20 {
        let g0 = grad(gamma, sigma);
        let hg = 1e-6;
        let hs = 1e-6 * sigma;
        let (gp, gm) = (grad(gamma + hg, sigma), grad(gamma - hg, sigma));
        let (sp, sm) = (grad(gamma, sigma + hs), grad(gamma, sigma - hs));
        let h11 = (gp[0] - gm[0]) / (2.0 * hg);
        let h22 = (sp[1] - sm[1]) / (2.0 * hs);
        let h12 = 0.5 * ((gp[1] - gm[1]) / (2.0 * hg) + (sp[0] - sm[0]) / (2.0 * hs));
        let det = h11 * h22 - h12 * h12;
        // only polish inside a concave neighbourhood
        if !(h11 < 0.0 && det > 0.0) {
            break;
        }
        let dg = -(h22 * g0[0] - h12 * g0[1]) / det;
        let ds = -(-h12 * g0[0] + h11 * g0[1]) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (ng, ns) = (gamma + step * dg, sigma + step * ds);
            if feasible(ng, ns, y_max) {
                let v = ll(ng, ns);
                if v > best {
                    best = v;
                    gamma = ng;
                    sigma = ns;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved || (dg.abs() < 1e-13 && ds.abs() < 1e-13 * sigma) {
            break;
        }
    }
    (gamma, sigma)
}

/// Sorted excesses paired with fitted quantiles at plotting positions `i/(n+1)`.
pub fn qq_points(sample: &ExcessSample, fit: &GpdFit) -> Vec<(f64, f64)> {
    let mut sorted = sample.excesses.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, fit.params.quantile_unchecked((i as f64 + 1.0) / (n + 1.0))))
        .collect()
}

/// Range-normalized RMS deviation between the two Q-Q columns.
pub fn nrmsd_from_pairs(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(EvtError::TooFewExceedances { n: pairs.len(), min: 2 });
    }
    let (lo, hi) = pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(e, _)| (lo.min(e), hi.max(e)));
    if !(hi > lo) {
        return Err(EvtError::DegenerateRange);
    }
    let mse = pairs.iter().map(|&(e, t)| (t - e) * (t - e)).sum::<f64>() / pairs.len() as f64;
    Ok(mse.sqrt() / (hi - lo))
}

pub fn nrmsd(sample: &ExcessSample, fit: &GpdFit) -> Result<f64> {
    nrmsd_from_pairs(&qq_points(sample, fit))
}

#[derive(Debug)]
pub struct SweepEntry {
    pub alpha: f64,
    pub threshold: f64,
    pub n_exceedances: usize,
    /// Exceedance fraction of the parent series.
    pub zeta: f64,
    pub fit: Result<GpdFit>,
    pub theta: Result<f64>,
}

/// Fits and extremal indices over a list of tail-quantiles. Thresholds are
/// nearest-rank `(1 - alpha)` quantiles of the oriented series; per-entry
/// failures are reported in place. Entries are ordered by `alpha` descending.
pub fn threshold_sweep(series: &[f64], tail_quantiles: &[f64], tail: Tail) -> Result<Vec<SweepEntry>> {
    threshold_sweep_with(series, tail_quantiles, tail, &FitOptions::default())
}

pub fn threshold_sweep_with(
    series: &[f64],
    tail_quantiles: &[f64],
    tail: Tail,
    opts: &FitOptions,
) -> Result<Vec<SweepEntry>> {
    if series.is_empty() {
        return Err(EvtError::InvalidArgument("empty series".into()));
    }
    let mut alphas = tail_quantiles.to_vec();
    if let Some(&bad) = alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(EvtError::InvalidProbability(bad));
    }
    alphas.sort_by(|a, b| b.total_cmp(a));
    let sorted = tail.sorted_values(series);

    let run = |alpha: f64| {
        let threshold = tail_threshold(&sorted, alpha);
        let sample = extract_excesses(series, threshold, tail);
        sweep_entry(alpha, &sample, opts)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(alphas.par_iter().map(|&a| run(a)).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(alphas.iter().map(|&a| run(a)).collect())
    }
}

/// Fit and extremal index for one excess sample.
pub fn sweep_entry(alpha: f64, sample: &ExcessSample, opts: &FitOptions) -> SweepEntry {
    let times: Vec<u64> = sample.source_times.iter().map(|&t| t as u64).collect();
    SweepEntry {
        alpha,
        threshold: sample.threshold,
        n_exceedances: sample.len(),
        zeta: sample.exceedance_probability(),
        fit: fit_gpd_mle_with(sample, opts),
        theta: extremal_index(&times),
    }
}

/// GEV parameters for maxima over blocks of `block_len` observations implied
/// by a GPD fit at exceedance probability `zeta_u`.
pub fn infer_gev(fit: &GpdFit, zeta_u: f64, block_len: usize) -> Result<GevParams> {
    gev_from_gpd(&fit.params, fit.threshold, zeta_u, block_len)
}

/// Return-period matching: with `m = block_len`,
/// `a = sigma (m zeta)^gamma` and `b = u + (sigma/gamma)((m zeta)^gamma - 1)`,
/// or `a = sigma`, `b = u + sigma ln(m zeta)` at `gamma = 0`.
pub fn gev_from_gpd(params: &GpdParams, threshold: f64, zeta_u: f64, block_len: usize) -> Result<GevParams> {
    if !(zeta_u > 0.0 && zeta_u <= 1.0) {
        return Err(EvtError::InvalidProbability(zeta_u));
    }
    if block_len == 0 {
        return Err(EvtError::InvalidArgument("block length must be at least 1".into()));
    }
    let rate = block_len as f64 * zeta_u;
    let (gamma, sigma) = (params.gamma, params.sigma);
    let (scale, loc) = if is_zero_shape(gamma) {
        (sigma, threshold + sigma * rate.ln())
    } else {
        let log_rate = rate.ln();
        (sigma * (gamma * log_rate).exp(), threshold + sigma / gamma * (gamma * log_rate).exp_m1())
    };
    GevParams::new(gamma, loc, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_from(xs: Vec<f64>, threshold: f64) -> ExcessSample {
        let n = xs.len();
        ExcessSample { threshold, excesses: xs, source_times: (0..n).collect(), total_count: n }
    }

    #[test]
    fn excesses_positive_tail() {
        let s = extract_excesses(&[1.0, 6.0, 2.0, 8.0], 5.0, Tail::Positive);
        assert_eq!(s.excesses, vec![1.0, 3.0]);
        assert_eq!(s.source_times, vec![1, 3]);
        assert_eq!(s.total_count, 4);
        assert_relative_eq!(s.exceedance_probability(), 0.5);
    }

    #[test]
    fn excesses_negative_tail() {
        let s = extract_excesses(&[-1.0, -6.0, 2.0], 5.0, Tail::Negative);
        assert_eq!(s.excesses, vec![1.0]);
        assert_eq!(s.source_times, vec![1]);
    }

    #[test]
    fn excesses_of_constant_series_are_empty() {
        let s = extract_excesses(&[3.0; 10], 3.5, Tail::Positive);
        assert!(s.is_empty());
        assert!(matches!(fit_gpd_mle(&s), Err(EvtError::TooFewExceedances { n: 0, .. })));
    }

    #[test]
    fn two_equal_excesses_rejected() {
        let s = sample_from(vec![2.0, 2.0], 0.0);
        assert!(matches!(fit_gpd_mle(&s), Err(EvtError::TooFewExceedances { n: 2, min: 50 })));
    }

    #[test]
    fn equal_excesses_above_minimum_are_degenerate() {
        let s = sample_from(vec![2.0; 60], 0.0);
        assert!(matches!(fit_gpd_mle(&s), Err(EvtError::DegenerateRange)));
    }

    #[test]
    fn standard_error_examples() {
        let se = asymptotic_se(0.0, 1.0, 100);
        assert_relative_eq!(se.se_gamma, 0.1, epsilon = 1e-15);
        assert_relative_eq!(se.se_sigma, 2f64.sqrt() / 10.0, epsilon = 1e-15);
        let quad = asymptotic_se(0.0, 1.0, 400);
        assert_relative_eq!(quad.se_gamma, se.se_gamma / 2.0, epsilon = 1e-15);
        assert_relative_eq!(quad.se_sigma, se.se_sigma / 2.0, epsilon = 1e-15);
        let se = asymptotic_se(1.0, 1.0, 400);
        assert_relative_eq!(se.se_gamma, 0.1, epsilon = 1e-15);
        assert_relative_eq!(se.se_sigma, 0.1, epsilon = 1e-15);
        assert!(se.valid);
        assert!(!asymptotic_se(-0.6, 1.0, 100).valid);
    }

    #[test]
    fn recovers_heavy_tail() {
        let truth = GpdParams::new(0.5, 1.0).unwrap();
        let s = sample_from(truth.sample(7, 50_000), 0.0);
        let fit = fit_gpd_mle(&s).unwrap();
        assert!((fit.params.gamma - 0.5).abs() <= 3.0 * fit.se_gamma, "{fit:?}");
        assert!((fit.params.sigma - 1.0).abs() <= 3.0 * fit.se_sigma, "{fit:?}");
    }

    #[test]
    fn recovers_exponential_tail() {
        let truth = GpdParams::new(0.0, 2.0).unwrap();
        let s = sample_from(truth.sample(7, 50_000), 0.0);
        let fit = fit_gpd_mle(&s).unwrap();
        assert!(fit.params.gamma.abs() <= 0.02, "{fit:?}");
        assert!((1.95..=2.05).contains(&fit.params.sigma), "{fit:?}");
    }

    #[test]
    fn fit_is_deterministic_and_feasible() {
        let truth = GpdParams::new(-0.3, 1.0).unwrap();
        let s = sample_from(truth.sample(3, 5000), 1.0);
        let a = fit_gpd_mle(&s).unwrap();
        let b = fit_gpd_mle(&s).unwrap();
        assert_eq!(a, b);
        let x_max = s.excesses.iter().copied().fold(0.0, f64::max);
        assert!(1.0 + a.params.gamma * x_max / a.params.sigma > 0.0);
        assert_eq!(a.threshold, 1.0);
        assert_relative_eq!(a.log_likelihood, gpd_log_likelihood(&s.excesses, &a.params));
    }

    #[test]
    fn qq_on_exact_quantiles_is_diagonal() {
        let p = GpdParams::new(0.3, 1.5).unwrap();
        let n = 99;
        let xs: Vec<f64> = (1..=n).map(|i| p.quantile(i as f64 / (n as f64 + 1.0)).unwrap()).collect();
        let s = sample_from(xs, 0.0);
        let fit = GpdFit {
            params: p,
            se_gamma: 0.0,
            se_sigma: 0.0,
            se_valid: true,
            n,
            threshold: 0.0,
            nrmsd: 0.0,
            log_likelihood: 0.0,
        };
        for (e, t) in qq_points(&s, &fit) {
            assert_relative_eq!(e, t, epsilon = 1e-12);
        }
        assert!(nrmsd(&s, &fit).unwrap() < 1e-14);
    }

    #[test]
    fn qq_single_point_uses_median() {
        let p = GpdParams::new(0.2, 1.0).unwrap();
        let s = sample_from(vec![3.0], 0.0);
        let fit = GpdFit {
            params: p,
            se_gamma: 0.0,
            se_sigma: 0.0,
            se_valid: true,
            n: 1,
            threshold: 0.0,
            nrmsd: 0.0,
            log_likelihood: 0.0,
        };
        let pts = qq_points(&s, &fit);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].0, 3.0);
        assert_relative_eq!(pts[0].1, p.quantile(0.5).unwrap());
    }

    #[test]
    fn nrmsd_hand_example() {
        let pairs = [(1.0, 1.0), (2.0, 2.0), (3.0, 4.0)];
        assert_relative_eq!(nrmsd_from_pairs(&pairs).unwrap(), 0.5 * (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        let scaled: Vec<_> = pairs.iter().map(|&(e, t)| (7.5 * e, 7.5 * t)).collect();
        assert_relative_eq!(nrmsd_from_pairs(&scaled).unwrap(), nrmsd_from_pairs(&pairs).unwrap(), epsilon = 1e-15);
        assert!(matches!(nrmsd_from_pairs(&[(1.0, 1.0), (1.0, 2.0)]), Err(EvtError::DegenerateRange)));
    }

    #[test]
    fn nearest_rank_convention() {
        assert_eq!(nearest_rank(0.5, 100), 50);
        assert_eq!(nearest_rank(0.995, 1_000_000), 995_000);
        assert_eq!(nearest_rank(0.999, 1000), 999);
        assert_eq!(nearest_rank(0.0, 10), 1);
        assert_eq!(nearest_rank(1.0, 10), 10);
        assert_eq!(nearest_rank(0.501, 100), 51);
        let data: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&data, 0.35), 4.0);
    }

    #[test]
    fn infer_gev_unit_rate() {
        let p = GpdParams::new(0.0, 1.0).unwrap();
        let gev = gev_from_gpd(&p, 5.0, 0.01, 100).unwrap();
        assert_relative_eq!(gev.loc, 5.0, epsilon = 1e-12);
        assert_relative_eq!(gev.scale, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infer_gev_hand_example() {
        let p = GpdParams::new(0.5, 1.0).unwrap();
        let gev = gev_from_gpd(&p, 10.0, 0.001, 21899).unwrap();
        let r = 21.899f64.sqrt();
        assert_relative_eq!(gev.scale, r, epsilon = 1e-12);
        assert_relative_eq!(gev.loc, 10.0 + 2.0 * (r - 1.0), epsilon = 1e-12);
        assert!((gev.scale - 4.6797).abs() < 1e-4);
        assert!((gev.loc - 17.359).abs() < 1e-3);
        // sigma = a + gamma (u - b)
        assert_relative_eq!(gev.scale + 0.5 * (10.0 - gev.loc), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn infer_gev_rejects_bad_rate() {
        let p = GpdParams::new(0.1, 1.0).unwrap();
        assert!(gev_from_gpd(&p, 0.0, 0.0, 10).is_err());
        assert!(gev_from_gpd(&p, 0.0, 0.1, 0).is_err());
    }

    #[test]
    fn sweep_flags_small_samples() {
        let xs = GpdParams::new(0.0, 1.0).unwrap().sample(5, 2000);
        let rows = threshold_sweep(&xs, &[0.01, 0.1], Tail::Positive).unwrap();
        assert_eq!(rows[0].alpha, 0.1);
        assert!(rows[0].fit.is_ok());
        assert_eq!(rows[1].n_exceedances, 20);
        assert!(matches!(rows[1].fit, Err(EvtError::TooFewExceedances { n: 20, .. })));
    }
}
