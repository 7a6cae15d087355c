//! Browser bindings for three small interactive demos:
//!
//! * [`tail_curves`]: GPD excess density and the GEV density it implies for
//!   block maxima.
//! * [`cluster_demo`]: exceedance times from the waiting-time mixture and the
//!   extremal index recovered from them.
//! * [`rolling_demo`]: a volatility-clustered series with a trailing local
//!   quantile threshold against a fixed one at equal exceedance count.
//!
//! Everything runs on the caller's thread; inputs are validated and errors
//! surface as JS exceptions carrying the library message.

use evtmodes::clustering::extremal_index;
use evtmodes::distributions::GpdParams;
use evtmodes::estimation::{gev_from_gpd, nearest_rank};
use evtmodes::nonstationary::{dynamic_exceedances, rolling_quantile};
use evtmodes::synthetic::{simulate_cluster_process, simulate_returns, Innovation, SimConfig};
use evtmodes::EvtError;
use wasm_bindgen::prelude::*;

fn js_err(e: EvtError) -> JsError {
    JsError::new(&e.to_string())
}

/// Evaluated densities on a shared abscissa.
#[wasm_bindgen]
pub struct TailCurves {
    x: Vec<f64>,
    gpd_pdf: Vec<f64>,
    gev_pdf: Vec<f64>,
    gev_cdf: Vec<f64>,
    gev: [f64; 3],
}

#[wasm_bindgen]
impl TailCurves {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    /// GPD density of `x - threshold` (zero below the threshold).
    #[wasm_bindgen(getter)]
    pub fn gpd_pdf(&self) -> Vec<f64> {
        self.gpd_pdf.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn gev_pdf(&self) -> Vec<f64> {
        self.gev_pdf.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn gev_cdf(&self) -> Vec<f64> {
        self.gev_cdf.clone()
    }
    /// `[gamma, loc, scale]` of the implied GEV.
    #[wasm_bindgen(getter)]
    pub fn gev_params(&self) -> Vec<f64> {
        self.gev.to_vec()
    }
}

/// GPD with shape `gamma` and scale `sigma` above `threshold`, exceeded with
/// probability `zeta`, and the GEV for maxima of `block_len` observations.
#[wasm_bindgen]
pub fn tail_curves(
    gamma: f64,
    sigma: f64,
    threshold: f64,
    zeta: f64,
    block_len: usize,
    n_points: usize,
) -> Result<TailCurves, JsError> {
    let gpd = GpdParams::new(gamma, sigma).map_err(js_err)?;
    let gev = gev_from_gpd(&gpd, threshold, zeta, block_len).map_err(js_err)?;
    let lo = threshold;
    let hi = (gev.loc + 8.0 * gev.scale).min(threshold + gpd.upper_endpoint() * 1.05).max(lo + sigma);
    let n = n_points.clamp(2, 10_000);
    let x: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    Ok(TailCurves {
        gpd_pdf: x.iter().map(|&v| gpd.pdf(v - threshold)).collect(),
        gev_pdf: x.iter().map(|&v| gev.pdf(v)).collect(),
        gev_cdf: x.iter().map(|&v| gev.cdf(v)).collect(),
        gev: [gev.gamma, gev.loc, gev.scale],
        x,
    })
}

#[wasm_bindgen]
pub struct ClusterDemo {
    times: Vec<f64>,
    estimate: f64,
}

#[wasm_bindgen]
impl ClusterDemo {
    /// Exceedance times, as doubles for JS.
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }
    /// Ferro–Segers extremal index of the simulated times.
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> f64 {
        self.estimate
    }
}

#[wasm_bindgen]
pub fn cluster_demo(theta: f64, zeta: f64, n: usize, seed: u64) -> Result<ClusterDemo, JsError> {
    let times = simulate_cluster_process(theta, zeta, n.clamp(2, 1_000_000), seed).map_err(js_err)?;
    let estimate = extremal_index(&times).map_err(js_err)?;
    Ok(ClusterDemo { times: times.iter().map(|&t| t as f64).collect(), estimate })
}

/// Downsampled view of a rolling-threshold run plus both extremal indices.
#[wasm_bindgen]
pub struct RollingDemo {
    t: Vec<f64>,
    series: Vec<f64>,
    threshold: Vec<f64>,
    fixed: f64,
    theta_rolling: f64,
    theta_fixed: f64,
    n_exceedances: usize,
    warmup: usize,
}

#[wasm_bindgen]
impl RollingDemo {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    /// Largest value in each plotted bucket.
    #[wasm_bindgen(getter)]
    pub fn series(&self) -> Vec<f64> {
        self.series.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> Vec<f64> {
        self.threshold.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn fixed(&self) -> f64 {
        self.fixed
    }
    #[wasm_bindgen(getter)]
    pub fn theta_rolling(&self) -> f64 {
        self.theta_rolling
    }
    #[wasm_bindgen(getter)]
    pub fn theta_fixed(&self) -> f64 {
        self.theta_fixed
    }
    #[wasm_bindgen(getter)]
    pub fn n_exceedances(&self) -> usize {
        self.n_exceedances
    }
    #[wasm_bindgen(getter)]
    pub fn warmup(&self) -> usize {
        self.warmup
    }
}

#[wasm_bindgen]
pub fn rolling_demo(
    n: usize,
    window: usize,
    quantile: f64,
    vol_persistence: f64,
    vol_of_vol: f64,
    seed: u64,
    max_points: usize,
) -> Result<RollingDemo, JsError> {
    let mut cfg = SimConfig::basic(1, n.clamp(100, 2_000_000), 1, 0.5, seed);
    cfg.innovation = Innovation::StudentT { df: 4.0 };
    cfg.vol_persistence = vol_persistence;
    cfg.vol_of_vol = vol_of_vol;
    let sim = simulate_returns(&cfg).map_err(js_err)?;
    let series = sim.returns.row(0);
    let th = rolling_quantile(series, window, quantile).map_err(js_err)?;
    let ex = dynamic_exceedances(series, &th, evtmodes::estimation::Tail::Positive).map_err(js_err)?;
    let rolling_times: Vec<u64> = ex.source_times.iter().map(|&t| t as u64).collect();
    let theta_rolling = extremal_index(&rolling_times).map_err(js_err)?;

    // Fixed level over the same span with exactly as many exceedances.
    let span = &series[th.warmup..];
    let mut sorted = span.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ex.len().min(sorted.len() - 1);
    let fixed = sorted[nearest_rank(1.0 - k as f64 / sorted.len() as f64, sorted.len()) - 1];
    let fixed_times: Vec<u64> =
        span.iter().enumerate().filter(|(_, &x)| x > fixed).map(|(i, _)| (i + th.warmup) as u64).collect();
    let theta_fixed = extremal_index(&fixed_times).map_err(js_err)?;

    let step = series.len().div_ceil(max_points.max(10));
    let (mut t, mut peaks, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for (b, chunk) in series.chunks(step).enumerate() {
        let start = b * step;
        t.push(start as f64);
        peaks.push(chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        u.push(th.u[start]);
    }
    Ok(RollingDemo {
        t,
        series: peaks,
        threshold: u,
        fixed,
        theta_rolling,
        theta_fixed,
        n_exceedances: ex.len(),
        warmup: th.warmup,
    })
}
