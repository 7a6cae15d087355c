//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use ndarray::Array2;

/// Eigenpairs of a symmetric matrix in no particular order. Column `k` of
/// the returned matrix is the eigenvector of eigenvalue `k`.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below
/// `tol * max(1, ||A||_F)`.
pub fn jacobi_eigen(a: &Array2<f64>, tol: f64, max_sweeps: usize) -> (Vec<f64>, Array2<f64>, bool) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = tol * frob.max(1.0);

    let off_norm = |m: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&m) <= target;
    let mut sweep = 0;
    while !converged && sweep < max_sweeps {
        sweep += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[r * n + p];
                    let arq = m[r * n + q];
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    m[r * n + p] = nrp;
                    m[p * n + r] = nrp;
                    m[r * n + q] = nrq;
                    m[q * n + r] = nrq;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp - s * (vrq + tau * vrp);
                    v[r * n + q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = off_norm(&m) <= target;
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    let vectors = Array2::from_shape_vec((n, n), v).expect("shape matches");
    (values, vectors, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonalizes_small_matrix() {
        let a = array![[4.0, 1.0, 2.0], [1.0, 3.0, 0.5], [2.0, 0.5, 1.0]];
        let (vals, vecs, ok) = jacobi_eigen(&a, 1e-14, 50);
        assert!(ok);
        let lambda = Array2::from_diag(&ndarray::Array1::from(vals));
        let recon = vecs.dot(&lambda).dot(&vecs.t());
        for (x, y) in recon.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let gram = vecs.t().dot(&vecs);
        for ((i, j), g) in gram.indexed_iter() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((g - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let a = array![[2.0, 0.0], [0.0, 5.0]];
        let (vals, vecs, ok) = jacobi_eigen(&a, 1e-12, 10);
        assert!(ok);
        assert_eq!(vals, vec![2.0, 5.0]);
        assert_eq!(vecs, Array2::<f64>::eye(2));
    }
}
