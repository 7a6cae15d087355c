//! Seeded synthetic market with known factor structure, volatility
//! clustering and intraday seasonality.
//!
//! Asset `k` at time `t` (intraday position `s`) returns
//!
//! ```text
//! r_k(t) = P(s) v_k(t) (bm f_m(t) + bs f_sector(k)(t) + sqrt(1 - bm^2 - bs^2) e_k(t))
//! ```
//!
//! where `f` and `e` are unit-variance innovations and `v_k` is the product
//! of a common and an optional per-asset log-AR(1) volatility, each scaled
//! to unit mean square.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::clustering::sample_interexceedance;
use crate::error::{EvtError, Result};
use crate::preprocess::{MatrixKind, ReturnMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    StudentT { df: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    Flat,
    UShape,
    UShapeWithSpikes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Named(ProfileShape),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub size: usize,
    pub loading: f64,
}

/// Number of equally spaced spikes in [`ProfileShape::UShapeWithSpikes`].
pub const SPIKE_DIVISIONS: usize = 13;
pub const SPIKE_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "K")]
    pub n_assets: usize,
    #[serde(rename = "T_day")]
    pub day_len: usize,
    #[serde(rename = "N_days")]
    pub n_days: usize,
    pub market_loading: f64,
    #[serde(default)]
    pub sectors: Vec<SectorSpec>,
    #[serde(default = "default_innovation")]
    pub innovation: Innovation,
    /// AR(1) coefficient of the common log-volatility.
    #[serde(default)]
    pub vol_persistence: f64,
    /// Stationary standard deviation of the common log-volatility.
    #[serde(default)]
    pub vol_of_vol: f64,
    /// Stationary standard deviation of each asset's own log-volatility,
    /// which shares `vol_persistence`.
    #[serde(default)]
    pub idio_vol_of_vol: f64,
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_innovation() -> Innovation {
    Innovation::Gaussian
}

fn default_profile() -> ProfileSpec {
    ProfileSpec::Named(ProfileShape::Flat)
}

impl SimConfig {
    /// Gaussian, flat-profile market without volatility clustering.
    pub fn basic(n_assets: usize, day_len: usize, n_days: usize, market_loading: f64, seed: u64) -> Self {
        Self {
            n_assets,
            day_len,
            n_days,
            market_loading,
            sectors: Vec::new(),
            innovation: Innovation::Gaussian,
            vol_persistence: 0.0,
            vol_of_vol: 0.0,
            idio_vol_of_vol: 0.0,
            profile: default_profile(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EvtError::InvalidLoadings(m));
        if self.n_assets == 0 || self.day_len == 0 || self.n_days == 0 {
            return Err(EvtError::InvalidArgument("K, T_day and N_days must be positive".into()));
        }
        if !(self.market_loading > 0.0 && self.market_loading < 1.0) {
            return bad(format!("market loading {} outside (0, 1)", self.market_loading));
        }
        let assigned: usize = self.sectors.iter().map(|s| s.size).sum();
        if assigned > self.n_assets {
            return bad(format!("sector sizes sum to {assigned} > K = {}", self.n_assets));
        }
        for (i, s) in self.sectors.iter().enumerate() {
            let total = self.market_loading.powi(2) + s.loading.powi(2);
            if !(s.loading >= 0.0 && total < 1.0) {
                return bad(format!("sector {} loadings leave no idiosyncratic variance", i + 1));
            }
        }
        if !(0.0..1.0).contains(&self.vol_persistence) {
            return Err(EvtError::InvalidArgument(format!("vol_persistence {} outside [0, 1)", self.vol_persistence)));
        }
        if !(self.vol_of_vol >= 0.0 && self.idio_vol_of_vol >= 0.0) {
            return Err(EvtError::InvalidArgument("volatility-of-volatility must be nonnegative".into()));
        }
        if let Innovation::StudentT { df } = self.innovation {
            if !(df > 2.0) {
                return Err(EvtError::InvalidArgument(format!("student_t needs df > 2 for unit variance, got {df}")));
            }
        }
        if let ProfileSpec::Values(v) = &self.profile {
            if v.len() != self.day_len || v.iter().any(|x| !(*x > 0.0)) {
                return Err(EvtError::InvalidArgument("profile needs T_day positive entries".into()));
            }
        }
        Ok(())
    }

    pub fn n_obs(&self) -> usize {
        self.day_len * self.n_days
    }

    /// Sector index of each asset; `None` for market-only assets.
    pub fn sector_of(&self) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(self.n_assets);
        for (i, s) in self.sectors.iter().enumerate() {
            out.extend(std::iter::repeat_n(Some(i), s.size));
        }
        out.resize(self.n_assets, None);
        out
    }

    pub fn tickers(&self) -> Vec<String> {
        (1..=self.n_assets).map(|k| format!("SIM{k:03}")).collect()
    }

    pub fn sector_names(&self) -> Vec<String> {
        self.sector_of()
            .into_iter()
            .map(|s| s.map_or_else(|| "market_only".to_string(), |i| format!("sector_{}", i + 1)))
            .collect()
    }

    pub fn profile_values(&self) -> Vec<f64> {
        match &self.profile {
            ProfileSpec::Values(v) => v.clone(),
            ProfileSpec::Named(shape) => named_profile(*shape, self.day_len),
        }
    }
}

/// Intraday profile for a named shape.
///
/// `u_shape` is `0.6 + 1.6 (2x - 1)^2` at `x = (s + 1/2) / T_day`; the spiked
/// variant multiplies positions `round(j T_day / 13)`, `j = 1..12`, by 3.
pub fn named_profile(shape: ProfileShape, day_len: usize) -> Vec<f64> {
    let u = |s: usize| {
        let x = (s as f64 + 0.5) / day_len as f64;
        0.6 + 1.6 * (2.0 * x - 1.0).powi(2)
    };
    match shape {
        ProfileShape::Flat => vec![1.0; day_len],
        ProfileShape::UShape => (0..day_len).map(u).collect(),
        ProfileShape::UShapeWithSpikes => {
            let mut p: Vec<f64> = (0..day_len).map(u).collect();
            for j in 1..SPIKE_DIVISIONS {
                let s = (j as f64 * day_len as f64 / SPIKE_DIVISIONS as f64).round() as usize;
                if s < day_len {
                    p[s] *= SPIKE_FACTOR;
                }
            }
            p
        }
    }
}

/// Loadings and seeds that generated a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetTruth {
    pub ticker: String,
    pub sector: String,
    pub market_loading: f64,
    pub sector_loading: f64,
    pub idio_weight: f64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub assets: Vec<AssetTruth>,
    pub profile: Vec<f64>,
    /// Stream ids of the common market factor and common volatility.
    pub market_stream: u64,
    pub sector_streams: Vec<u64>,
}

/// Simulated returns together with the latent series that produced them.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub returns: ReturnMatrix,
    pub truth: GroundTruth,
    pub market_factor: Vec<f64>,
    pub sector_factors: Vec<Vec<f64>>,
    /// Common volatility multiplier `v(t)` (unit mean square).
    pub common_vol: Vec<f64>,
}

const MARKET_STREAM: u64 = 0;
const SECTOR_STREAM_BASE: u64 = 1 << 32;
const ASSET_STREAM_BASE: u64 = 1 << 48;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Draw {
    student: Option<(StudentT<f64>, f64)>,
}

impl Draw {
    fn new(innovation: Innovation) -> Self {
        let student = match innovation {
            Innovation::Gaussian => None,
            Innovation::StudentT { df } => {
                Some((StudentT::new(df).expect("df validated"), ((df - 2.0) / df).sqrt()))
            }
        };
        Self { student }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.student {
            None => StandardNormal.sample(rng),
            Some((t, scale)) => t.sample(rng) * scale,
        }
    }
}

/// Log-AR(1) volatility path with unit mean square, stationary from `t = 0`.
fn vol_path<R: Rng>(rng: &mut R, n: usize, phi: f64, eta: f64) -> Vec<f64> {
    if eta == 0.0 {
        return vec![1.0; n];
    }
    let innov = eta * (1.0 - phi * phi).sqrt();
    let mut h: f64 = eta * { let z: f64 = StandardNormal.sample(rng); z };
    (0..n)
        .map(|_| {
            let v = (h - eta * eta).exp();
            h = phi * h + innov * { let z: f64 = StandardNormal.sample(rng); z };
            v
        })
        .collect()
}

fn innovations<R: Rng>(rng: &mut R, draw: &Draw, n: usize) -> Vec<f64> {
    (0..n).map(|_| draw.sample(rng)).collect()
}

/// Generates a raw return panel (`kind = raw`, `delta_t = 1`).
pub fn simulate_returns(config: &SimConfig) -> Result<Simulation> {
    config.validate()?;
    let n = config.n_obs();
    let draw = Draw::new(config.innovation);
    let profile = config.profile_values();
    let phi = config.vol_persistence;

    let mut common = stream_rng(config.seed, MARKET_STREAM);
    let market_factor = innovations(&mut common, &draw, n);
    let common_vol = vol_path(&mut common, n, phi, config.vol_of_vol);

    let sector_streams: Vec<u64> = (0..config.sectors.len() as u64).map(|i| SECTOR_STREAM_BASE + i).collect();
    let sector_factors: Vec<Vec<f64>> = sector_streams
        .iter()
        .map(|&s| innovations(&mut stream_rng(config.seed, s), &draw, n))
        .collect();

    let sector_of = config.sector_of();
    let names = config.sector_names();
    let tickers = config.tickers();
    let bm = config.market_loading;
    let assets: Vec<AssetTruth> = (0..config.n_assets)
        .map(|k| {
            let bs = sector_of[k].map_or(0.0, |i| config.sectors[i].loading);
            AssetTruth {
                ticker: tickers[k].clone(),
                sector: names[k].clone(),
                market_loading: bm,
                sector_loading: bs,
                idio_weight: (1.0 - bm * bm - bs * bs).sqrt(),
                stream: ASSET_STREAM_BASE + k as u64,
            }
        })
        .collect();

    let simulate_asset = |k: usize| -> Vec<f64> {
        let a = &assets[k];
        let mut rng = stream_rng(config.seed, a.stream);
        let own_vol = vol_path(&mut rng, n, phi, config.idio_vol_of_vol);
        let sector = sector_of[k].map(|i| &sector_factors[i]);
        (0..n)
            .map(|t| {
                let mut x = a.market_loading * market_factor[t] + a.idio_weight * draw.sample(&mut rng);
                if let Some(f) = sector {
                    x += a.sector_loading * f[t];
                }
                profile[t % config.day_len] * common_vol[t] * own_vol[t] * x
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..config.n_assets).into_par_iter().map(simulate_asset).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..config.n_assets).map(simulate_asset).collect();

    let values = Array2::from_shape_vec((config.n_assets, n), rows.concat()).expect("rows have length n");
    let returns = ReturnMatrix::new(values, tickers, config.day_len, 1, MatrixKind::Raw)?;
    let truth = GroundTruth {
        seed: config.seed,
        assets,
        profile,
        market_stream: MARKET_STREAM,
        sector_streams,
    };
    Ok(Simulation { returns, truth, market_factor, sector_factors, common_vol })
}

/// Exceedance times of the limiting clustered point process.
pub fn simulate_cluster_process(theta: f64, zeta_u: f64, n: usize, seed: u64) -> Result<Vec<u64>> {
    sample_interexceedance(theta, zeta_u, seed, n)
}
