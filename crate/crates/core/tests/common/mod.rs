//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use evtmodes::distributions::{GevParams, GpdParams};

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral of a density over `(lo, hi)`, where either end may be infinite.
/// Infinite ends are mapped onto `(0, 1)` with a scale `s`.
pub fn integrate_density<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64, s: f64) -> f64 {
    let guard = |v: f64| if v.is_finite() { v } else { 0.0 };
    // split at the midpoint of (0,1) so both halves see the bulk
    let total = |g: &dyn Fn(f64) -> f64| simpson(&g, 0.0, 0.5, 1e-10) + simpson(&g, 0.5, 1.0, 1e-10);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => total(&|t| guard(pdf(lo + (hi - lo) * t) * (hi - lo))),
        (true, false) => total(&|t| {
            if t >= 1.0 {
                return 0.0;
            }
            guard(pdf(lo + s * t / (1.0 - t)) * s / (1.0 - t).powi(2))
        }),
        (false, true) => total(&|t| {
            if t <= 0.0 {
                return 0.0;
            }
            guard(pdf(hi - s * (1.0 - t) / t) * s / (t * t))
        }),
        (false, false) => total(&|t| {
            if t <= 0.0 || t >= 1.0 {
                return 0.0;
            }
            let a = std::f64::consts::PI * (t - 0.5);
            guard(pdf(s * a.tan()) * s * std::f64::consts::PI / a.cos().powi(2))
        }),
    }
}

/// Kolmogorov–Smirnov distance between a sample and a cdf.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `ceil(q w)`-th smallest of the previous `w` values, recomputed from
/// scratch with a full sort.
pub fn resort_quantile(series: &[f64], w: usize, q: f64, t: usize) -> f64 {
    let mut v = series[t - w..t].to_vec();
    v.sort_by(f64::total_cmp);
    v[oracle_rank(q, w) - 1]
}

/// Nearest rank written independently of the library.
pub fn oracle_rank(q: f64, n: usize) -> usize {
    let exact = q * n as f64;
    let r = exact.round();
    let k = if (exact - r).abs() < 1e-9 * exact.max(1.0) { r } else { exact.ceil() };
    (k as usize).clamp(1, n)
}

/// Rolling quantile maintained in a sorted `Vec` with binary-search
/// insertion and removal. Entries before `w` are NaN.
pub fn sorted_vec_rolling(series: &[f64], w: usize, q: f64) -> Vec<f64> {
    let k = oracle_rank(q, w) - 1;
    let mut win: Vec<f64> = series[..w].to_vec();
    win.sort_by(f64::total_cmp);
    let mut out = vec![f64::NAN; series.len()];
    for t in w..series.len() {
        out[t] = win[k];
        let old = series[t - w];
        let pos = win.partition_point(|v| v.total_cmp(&old).is_lt());
        win.remove(pos);
        let new = series[t];
        let pos = win.partition_point(|v| v.total_cmp(&new).is_lt());
        win.insert(pos, new);
    }
    out
}

fn gev(gamma: f64, loc: f64, scale: f64) -> GevParams {
    GevParams::new(gamma, loc, scale).unwrap()
}

fn gpd(gamma: f64, sigma: f64) -> GpdParams {
    GpdParams::new(gamma, sigma).unwrap()
}

/// Checks the distribution identities over the parameter grid and returns a
/// description of every violation.
pub fn distribution_identity_violations() -> Vec<String> {
    let mut bad = Vec::new();
    let gammas = [-0.9, -0.5, 0.0, 0.5, 0.9];
    let scales = [0.5, 1.0, 5.0];
    for &g in &gammas {
        for &s in &scales {
            let d = gev(g, 0.3, s);
            let (lo, hi) = d.support();
            let mass = integrate_density(|x| d.pdf(x), lo, hi, s);
            if (mass - 1.0).abs() > 1e-6 {
                bad.push(format!("GEV({g},{s}) integrates to {mass}"));
            }
            let p = gpd(g, s);
            let mass = integrate_density(|x| p.pdf(x), 0.0, p.upper_endpoint(), s);
            if (mass - 1.0).abs() > 1e-6 {
                bad.push(format!("GPD({g},{s}) integrates to {mass}"));
            }

            // pdf >= 0 and cdf nondecreasing on a grid crossing the support
            let xs: Vec<f64> = (0..=4000).map(|i| -20.0 * s + i as f64 * 0.01 * s).collect();
            let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &x in &xs {
                let (fg, fp) = (d.cdf(x), p.cdf(x));
                if d.pdf(x) < 0.0 || p.pdf(x) < 0.0 || !(0.0..=1.0).contains(&fg) || !(0.0..=1.0).contains(&fp) {
                    bad.push(format!("({g},{s}) invalid value at {x}"));
                }
                if fg < prev.0 || fp < prev.1 {
                    bad.push(format!("({g},{s}) cdf decreases at {x}"));
                }
                prev = (fg, fp);
            }

            // quantile(cdf(x)) = x on interior points
            for i in 1..20 {
                let x = p.quantile(i as f64 / 20.0).unwrap();
                let back = p.quantile(p.cdf(x)).unwrap();
                if (back - x).abs() > 1e-10 * x.abs().max(1.0) {
                    bad.push(format!("GPD({g},{s}) quantile round trip {x} -> {back}"));
                }
            }

            // pdf = d/dx cdf by central differences at interior points
            for i in 1..=20 {
                let x = interior_gev_point(&d, i as f64 / 21.0);
                let h = 1e-5 * s;
                let fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
                if (fd - d.pdf(x)).abs() > 1e-6 {
                    bad.push(format!("GEV({g},{s}) derivative mismatch at {x}: {fd} vs {}", d.pdf(x)));
                }
            }
        }
    }

    for eps in [1e-8, -1e-8] {
        for x in [0.1, 1.0, 5.0] {
            let pairs = [
                (gev(eps, 0.0, 1.0).cdf(x), gev(0.0, 0.0, 1.0).cdf(x)),
                (gev(eps, 0.0, 1.0).pdf(x), gev(0.0, 0.0, 1.0).pdf(x)),
                (gpd(eps, 1.0).cdf(x), gpd(0.0, 1.0).cdf(x)),
                (gpd(eps, 1.0).pdf(x), gpd(0.0, 1.0).pdf(x)),
            ];
            for (a, b) in pairs {
                if (a - b).abs() > 1e-6 {
                    bad.push(format!("discontinuity at gamma={eps}, x={x}: {a} vs {b}"));
                }
            }
        }
    }
    bad
}

/// GEV point with cdf `p`, found by bisection on the library cdf.
fn interior_gev_point(d: &GevParams, p: f64) -> f64 {
    let (lo, hi) = d.support();
    let mut a = if lo.is_finite() { lo } else { d.loc - 50.0 * d.scale };
    let mut b = if hi.is_finite() { hi } else { d.loc + 1e6 * d.scale };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if d.cdf(m) < p {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
