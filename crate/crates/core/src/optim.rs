//! Two-dimensional Nelder–Mead simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub max_iter: usize,
    /// Relative spread of objective values across the simplex.
    pub f_tol: f64,
    /// Largest vertex distance from the best vertex.
    pub x_tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexResult {
    pub x: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn nelder_mead<F>(f: F, start: [f64; 2], step: [f64; 2], opts: SimplexOptions) -> SimplexResult
where
    F: Fn([f64; 2]) -> f64,
{
    let mut pts = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = pts.map(&f);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        // order: best, middle, worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);

        let spread = vals[2] - vals[0];
        let size = pts[1..]
            .iter()
            .map(|p| (p[0] - pts[0][0]).abs().max((p[1] - pts[0][1]).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol * (1.0 + vals[0].abs()) && size <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| {
            [
                centroid[0] + t * (pts[2][0] - centroid[0]),
                centroid[1] + t * (pts[2][1] - centroid[1]),
            ]
        };

        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[2] {
            let xc = along(-0.5);
            (xc, f(xc))
        } else {
            let xc = along(0.5);
            (xc, f(xc))
        };
        if fc < vals[2].min(fr) {
            pts[2] = xc;
            vals[2] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..3 {
            pts[i] = [
                pts[0][0] + 0.5 * (pts[i][0] - pts[0][0]),
                pts[0][1] + 0.5 * (pts[i][1] - pts[0][1]),
            ];
            vals[i] = f(pts[i]);
        }
    }

    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    SimplexResult { x: pts[best], iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |p: [f64; 2]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let opts = SimplexOptions { max_iter: 5000, f_tol: 1e-15, x_tol: 1e-10 };
        let r = nelder_mead(rosen, [-1.2, 1.0], [0.1, 0.1], opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn reports_nonconvergence() {
        let opts = SimplexOptions { max_iter: 3, f_tol: 1e-15, x_tol: 1e-12 };
        let r = nelder_mead(|p| p[0] * p[0] + p[1] * p[1], [5.0, 5.0], [1.0, 1.0], opts);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
