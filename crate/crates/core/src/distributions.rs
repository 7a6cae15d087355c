//! Generalized extreme value (GEV) and generalized Pareto (GPD) families.
//!
//! Both families share the tail-shape parameter `gamma`:
//!
//! ```text
//! GEV  G(x) = exp(-(1 + gamma (x - b) / a)^(-1/gamma))      gamma != 0
//!      G(x) = exp(-exp(-(x - b) / a))                        gamma == 0
//!
//! GPD  H(x) = 1 - (1 + gamma x / sigma)^(-1/gamma)            gamma != 0
//!      H(x) = 1 - exp(-x / sigma)                            gamma == 0
//! ```
//!
//! Powers of the form `(1 + gamma z)^(-1/gamma)` are evaluated as
//! `exp(-log1p(gamma z) / gamma)`, so the two branches join continuously at
//! `gamma = 0`. Queries outside the support never fail: the cdf saturates at
//! 0 or 1 and the pdf is 0.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EvtError, Result};

/// Shapes with `|gamma|` below this are evaluated with the `gamma = 0` formulas.
pub const GAMMA_ZERO_TOL: f64 = 1e-12;

/// Seedable generator used for every simulation in the crate.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub(crate) fn is_zero_shape(gamma: f64) -> bool {
    gamma.abs() < GAMMA_ZERO_TOL
}

/// Parameters of the generalized extreme value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub gamma: f64,
    pub loc: f64,
    pub scale: f64,
}

impl GevParams {
    pub fn new(gamma: f64, loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(EvtError::InvalidArgument(format!("GEV scale must be positive, got {scale}")));
        }
        if !gamma.is_finite() || !loc.is_finite() {
            return Err(EvtError::InvalidArgument("GEV shape and location must be finite".into()));
        }
        Ok(Self { gamma, loc, scale })
    }

    /// Support as `(lower, upper)`; infinite ends are `f64::INFINITY` / `NEG_INFINITY`.
    pub fn support(&self) -> (f64, f64) {
        if is_zero_shape(self.gamma) {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.gamma > 0.0 {
            (self.loc - self.scale / self.gamma, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.loc - self.scale / self.gamma)
        }
    }

    /// `-ln` of the reduced variable `t(x)`, i.e. `log1p(gamma z) / gamma`,
    /// with `z = (x - b) / a`. Only meaningful inside the support.
    fn log_t_neg(&self, x: f64) -> f64 {
        let z = (x - self.loc) / self.scale;
        if is_zero_shape(self.gamma) {
            z
        } else {
            (self.gamma * z).ln_1p() / self.gamma
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let t = (-self.log_t_neg(x)).exp();
        (-t).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        if x == lo {
            // gamma > 0: t -> infinity and exp(-t) dominates.
            return 0.0;
        }
        if x == hi {
            // gamma < 0 endpoint: closed-form limit of t^(1+gamma) with t -> 0.
            return endpoint_limit(1.0 + self.gamma) / self.scale;
        }
        let s = self.log_t_neg(x);
        let t = (-s).exp();
        (-(1.0 + self.gamma) * s - t).exp() / self.scale
    }
}

/// Limit of `t^p` as `t -> 0+`.
fn endpoint_limit(p: f64) -> f64 {
    if p > 0.0 {
        0.0
    } else if p == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Parameters of the generalized Pareto distribution of threshold excesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub gamma: f64,
    pub sigma: f64,
}

impl GpdParams {
    pub fn new(gamma: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(EvtError::InvalidArgument(format!("GPD scale must be positive, got {sigma}")));
        }
        if !gamma.is_finite() {
            return Err(EvtError::InvalidArgument("GPD shape must be finite".into()));
        }
        Ok(Self { gamma, sigma })
    }

    /// Upper end of the support: `sigma / |gamma|` for negative shape, else infinity.
    pub fn upper_endpoint(&self) -> f64 {
        if self.gamma < 0.0 && !is_zero_shape(self.gamma) {
            -self.sigma / self.gamma
        } else {
            f64::INFINITY
        }
    }

    /// `log1p(gamma x / sigma) / gamma`, the exponent of the survival function.
    fn log_survival_neg(&self, x: f64) -> f64 {
        let y = x / self.sigma;
        if is_zero_shape(self.gamma) {
            y
        } else {
            (self.gamma * y).ln_1p() / self.gamma
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.upper_endpoint() {
            return 1.0;
        }
        -(-self.log_survival_neg(x)).exp_m1()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let hi = self.upper_endpoint();
        if x < 0.0 || x > hi {
            return 0.0;
        }
        if x == hi {
            return endpoint_limit(-1.0 / self.gamma - 1.0) / self.sigma;
        }
        let s = self.log_survival_neg(x);
        if is_zero_shape(self.gamma) {
            return (-s).exp() / self.sigma;
        }
        // (1 + gamma y)^(-1/gamma - 1) = exp(-s) / (1 + gamma y)
        (-s - (self.gamma * x / self.sigma).ln_1p()).exp() / self.sigma
    }

    /// Inverse cdf on `[0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(EvtError::InvalidProbability(q));
        }
        Ok(self.quantile_unchecked(q))
    }

    pub(crate) fn quantile_unchecked(&self, q: f64) -> f64 {
        let log_surv = (-q).ln_1p();
        if is_zero_shape(self.gamma) {
            -self.sigma * log_surv
        } else {
            self.sigma / self.gamma * (-self.gamma * log_surv).exp_m1()
        }
    }

    /// `n` draws by inverse transform from a generator seeded with `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| self.quantile_unchecked(rng.random::<f64>()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gev(g: f64, b: f64, a: f64) -> GevParams {
        GevParams::new(g, b, a).unwrap()
    }

    fn gpd(g: f64, s: f64) -> GpdParams {
        GpdParams::new(g, s).unwrap()
    }

    #[test]
    fn gev_cdf_examples() {
        assert_relative_eq!(gev(0.0, 0.0, 1.0).cdf(0.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(gev(-0.5, 0.0, 1.0).cdf(2.0), 1.0);
        assert_relative_eq!(gev(0.5, 0.0, 1.0).cdf(2.0), (-0.25f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn gev_pdf_examples() {
        let e1 = (-1.0f64).exp();
        assert_relative_eq!(gev(0.0, 0.0, 1.0).pdf(0.0), e1, epsilon = 1e-15);
        assert_eq!(gev(-0.5, 0.0, 1.0).pdf(3.0), 0.0);
        assert_relative_eq!(gev(0.5, 0.0, 1.0).pdf(0.0), e1, epsilon = 1e-15);
    }

    #[test]
    fn gev_outside_support() {
        let p = gev(0.5, 0.0, 1.0);
        assert_eq!(p.cdf(-2.0), 0.0);
        assert_eq!(p.cdf(-3.0), 0.0);
        assert_eq!(p.pdf(-2.0), 0.0);
        assert_eq!(p.pdf(-2.5), 0.0);
    }

    #[test]
    fn gpd_cdf_examples() {
        assert_eq!(gpd(0.0, 1.0).cdf(0.0), 0.0);
        assert_relative_eq!(gpd(0.5, 1.0).cdf(2.0), 0.75, epsilon = 1e-15);
        assert_eq!(gpd(-0.5, 1.0).cdf(2.0), 1.0);
        assert_eq!(gpd(0.5, 1.0).cdf(-1.0), 0.0);
    }

    #[test]
    fn gpd_pdf_examples() {
        assert_relative_eq!(gpd(0.5, 1.0).pdf(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(gpd(0.0, 1.0).pdf(1.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(gpd(-0.5, 1.0).pdf(2.0), 0.0);
    }

    #[test]
    fn endpoint_density_uses_closed_form_limit() {
        assert_relative_eq!(gpd(-1.0, 2.0).pdf(2.0), 0.5);
        assert!(gpd(-1.5, 1.0).pdf(1.0 / 1.5).is_infinite());
        assert!(gev(-1.5, 0.0, 1.0).pdf(1.0 / 1.5).is_infinite());
    }

    #[test]
    fn gpd_quantile_examples() {
        let q = 1.0 - (-1.0f64).exp();
        assert_relative_eq!(gpd(0.0, 1.0).quantile(q).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(gpd(0.5, 1.0).quantile(0.75).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(gpd(0.3, 7.0).quantile(0.0).unwrap(), 0.0);
        assert_eq!(gpd(-0.3, 7.0).quantile(0.0).unwrap(), 0.0);
    }

    #[test]
    fn gpd_quantile_rejects_bad_probability() {
        assert!(matches!(gpd(0.1, 1.0).quantile(1.0), Err(EvtError::InvalidProbability(_))));
        assert!(matches!(gpd(0.1, 1.0).quantile(-0.1), Err(EvtError::InvalidProbability(_))));
        assert!(gpd(0.1, 1.0).quantile(f64::NAN).is_err());
    }

    #[test]
    fn sample_mean_exponential() {
        let xs = gpd(0.0, 1.0).sample(1, 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((0.98..=1.02).contains(&mean), "mean {mean}");
    }

    #[test]
    fn sample_respects_bounded_support() {
        let xs = gpd(-0.5, 1.0).sample(99, 10_000);
        assert!(xs.iter().all(|&x| (0.0..=2.0).contains(&x)));
    }

    #[test]
    fn sample_is_deterministic() {
        let p = gpd(0.5, 1.0);
        assert_eq!(p.sample(1, 10), p.sample(1, 10));
        assert_ne!(p.sample(1, 10), p.sample(2, 10));
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(GevParams::new(0.1, 0.0, 0.0).is_err());
        assert!(GpdParams::new(0.1, -1.0).is_err());
    }
}
