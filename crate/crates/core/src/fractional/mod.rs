//! Fractional powers `(-L)^s`, `0 < s < 1`, by several independent routes:
//! spectral calculus, heat-semigroup subordination, an explicit jump kernel
//! and the Poisson extension with its Dirichlet-to-Neumann map.

mod decay;
mod kernel;
mod poisson;
mod subordination;

pub use decay::{kernel_decay_profile, DecayProfile, Lattice};
pub use kernel::{build_jump_kernel, frac_kernel_apply, JumpKernel};
pub use poisson::{poisson_extend, poisson_multiplier, semi_analytic_dtn};
pub use subordination::{frac_subordination, LogTrapezoid};

use serde::{Deserialize, Serialize};

use crate::dirichlet::SpectralDecomposition;
use crate::error::{check_s, Error, Result};

/// Trapezoid rule in `u = log t` for integrals `∫₀^∞ g(t) t^{-1-s} dt`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub nodes: usize,
    /// Lower cutoff is `tau_factor / λ_max`.
    pub tau_factor: f64,
    /// Upper cutoff is `horizon_factor / λ_min`, `λ_min` the spectral gap.
    pub horizon_factor: f64,
    /// Relative error estimate above which the quadrature is rejected.
    pub tolerance: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            nodes: 256,
            tau_factor: 1e-6,
            horizon_factor: 40.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FracConfig {
    pub s: f64,
    pub quadrature: QuadratureScheme,
}

impl FracConfig {
    pub fn new(s: f64) -> Result<Self> {
        Self::with_quadrature(s, QuadratureScheme::default())
    }

    pub fn with_quadrature(s: f64, quadrature: QuadratureScheme) -> Result<Self> {
        check_s(s)?;
        if quadrature.nodes < 8 {
            return Err(Error::InvalidInput(format!(
                "quadrature needs at least 8 nodes, got {}",
                quadrature.nodes
            )));
        }
        if !(quadrature.tau_factor > 0.0 && quadrature.horizon_factor > 0.0) {
            return Err(Error::InvalidInput("quadrature cutoffs must be positive".into()));
        }
        Ok(Self { s, quadrature })
    }

    /// Weight exponent `a = 1 - 2s` of the extension problem.
    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    /// Log-trapezoid rule for a spectrum contained in `[gap, lambda_max]`.
    pub fn rule(&self, gap: f64, lambda_max: f64) -> LogTrapezoid {
        let q = &self.quadrature;
        LogTrapezoid::new(self.s, q.nodes, q.tau_factor / lambda_max, q.horizon_factor / gap)
    }
}

/// `(-L)^s f = Σ_i λ_i^s ⟨f, φ_i⟩_μ φ_i`, the reference route.
pub fn frac_spectral(decomp: &SpectralDecomposition, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_s(s)?;
    decomp.apply_function(|l| if l > 0.0 { l.powf(s) } else { 0.0 }, f)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dirichlet::DirichletSpace;
    use crate::linalg::max_relative_error;

    #[test]
    fn two_point_half_power() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::path(2).unwrap())).unwrap();
        let out = frac_spectral(&d, 0.5, &[1.0, -1.0]).unwrap();
        let r2 = 2f64.sqrt();
        assert!(max_relative_error(&out, &[r2, -r2]) < 1e-14);
        assert!(frac_spectral(&d, 0.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn near_one_approaches_generator() {
        let space = Arc::new(DirichletSpace::ring(10).unwrap());
        let d = SpectralDecomposition::compute(space.clone()).unwrap();
        let f: Vec<f64> = (0..10).map(|i| ((i * 7 % 10) as f64 * 0.37).sin()).collect();
        let out = frac_spectral(&d, 0.99, &f).unwrap();
        let neg: Vec<f64> = space.apply_generator(&f).unwrap().iter().map(|v| -v).collect();
        let rel = out.iter().zip(&neg).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            / neg.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(rel <= 0.02, "{rel}");
    }
}
