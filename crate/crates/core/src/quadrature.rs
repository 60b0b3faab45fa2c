//! Gauss-Hermite quadrature for expectations over a standard normal variable.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of the `n`-point probabilists' Gauss-Hermite rule,
/// normalized so that `Σ w_k f(x_k) ≈ E[f(X)]` with `X ~ N(0, 1)`.
///
/// Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix with
/// off-diagonal `√k`; the weights are the squared first eigenvector
/// components.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one node");
    let j = DMatrix::from_fn(n, n, |r, c| if r.abs_diff(c) == 1 { (r.max(c) as f64).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    // Symmetrize to remove eigen-solver noise.
    let mut x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut w: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
    for k in 0..n / 2 {
        let m = n - 1 - k;
        let xs = 0.5 * (x[m] - x[k]);
        x[k] = -xs;
        x[m] = xs;
        let ws = 0.5 * (w[k] + w[m]);
        w[k] = ws;
        w[m] = ws;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `E[f(σ X)]` for `X ~ N(0, 1)` with an `n`-point rule.
pub fn expect_normal(sigma: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(n);
    x.iter().zip(&w).map(|(&xk, &wk)| wk * f(sigma * xk)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        for n in [5, 21, 41] {
            let m2 = expect_normal(1.0, n, |x| x * x);
            let m4 = expect_normal(1.0, n, |x| x.powi(4));
            let m6 = expect_normal(2.0, n, |x| x.powi(6));
            assert!((m2 - 1.0).abs() < 1e-12);
            assert!((m4 - 3.0).abs() < 1e-11);
            assert!((m6 - 15.0 * 64.0).abs() < 1e-8);
        }
    }

    #[test]
    fn cosine_average() {
        // E[cos(aX)] = exp(-a²/2).
        let v = expect_normal(1.0, 21, |x| (1.3 * x).cos());
        assert!((v - (-0.845f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn three_point_rule() {
        let (x, w) = gauss_hermite(3);
        assert!((x[2] - 3f64.sqrt()).abs() < 1e-13);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-13);
    }
}
