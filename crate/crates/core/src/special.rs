//! Gamma-function helpers and Gauss–Laguerre rules.

use crate::error::{check_s, Result};
use crate::linalg::jacobi_eigen;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `Γ(-s)` for `s ∈ (0,1)`, via `Γ(1-s) = -s Γ(-s)`. Negative on that range.
pub fn gamma_neg(s: f64) -> f64 {
    gamma(1.0 - s) / -s
}

/// Constant in the weighted Dirichlet-to-Neumann relation,
/// `C_s = 2^{2s-1} Γ(s) / Γ(1-s)`, so that
/// `(-L)^s f = -C_s lim_{y→0} y^{1-2s} ∂_y U(·, y)`.
pub fn dtn_constant(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2f64.powf(2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s))
}

/// Nodes and normalized weights of the `n`-point generalized Gauss–Laguerre
/// rule for the weight `r^α e^{-r}` on `(0, ∞)`, `α > -1`.
///
/// Weights are divided by `Γ(α+1)` so they sum to one. Computed by
/// Golub–Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
/// three-term recurrence and the weights are squared first components of
/// its eigenvectors.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0, "invalid Gauss-Laguerre parameters");
    let mut j = vec![0.0; n * n];
    for k in 0..n {
        j[k * n + k] = 2.0 * k as f64 + alpha + 1.0;
        if k + 1 < n {
            let b = ((k + 1) as f64 * (k as f64 + 1.0 + alpha)).sqrt();
            j[k * n + k + 1] = b;
            j[(k + 1) * n + k] = b;
        }
    }
    let eig = jacobi_eigen(j, n).expect("Jacobi matrix of the Laguerre recurrence is well conditioned");
    let weights = (0..n).map(|k| eig.vector(k)[0].powi(2)).collect();
    (eig.values, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtn_constant_half_is_one() {
        assert!((dtn_constant(0.5).unwrap() - 1.0).abs() < 1e-14);
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let inv = gamma(1.0 - s) / (2f64.powf(2.0 * s - 1.0) * gamma(s));
            assert!((dtn_constant(s).unwrap() * inv - 1.0).abs() < 1e-13);
        }
        assert!(dtn_constant(1.0).is_err());
    }

    #[test]
    fn gamma_neg_half() {
        assert!((gamma_neg(0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn laguerre_moments() {
        // ∫ r^k r^α e^{-r} dr / Γ(α+1) = Γ(α+1+k)/Γ(α+1).
        let alpha = -0.6;
        let (x, w) = gauss_laguerre(20, alpha);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k)).sum();
            let exact = (ln_gamma(alpha + 1.0 + k as f64) - ln_gamma(alpha + 1.0)).exp();
            assert!((q / exact - 1.0).abs() < 1e-10, "moment {k}: {q} vs {exact}");
        }
    }
}
