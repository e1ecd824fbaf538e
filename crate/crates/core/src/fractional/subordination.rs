use rayon::prelude::*;

use super::FracConfig;
use crate::dirichlet::SpectralDecomposition;
use crate::error::{check_len, Error, Result};
use crate::linalg::norm_inf;
use crate::special::gamma_neg;

/// Trapezoid rule in `u = log t` for `I[g] = ∫₀^∞ g(t) t^{-1-s} dt` where
/// `g(0) = 0`.
///
/// Nodes `t_k = τ e^{kh}`, `k = 0..M`, span `[τ, T]`. Beyond the ends the
/// rule is continued to an infinite trapezoid sum using the asymptotic forms
/// `g(t) ≈ g'(0) t` below `τ` and `g(t) ≈ g(∞)` above `T`; both continuations
/// are geometric series summed in closed form:
///
/// `I ≈ h Σ_k g(t_k) t_k^{-s} + g'(0) c_lo + g(∞) c_hi`.
#[derive(Clone, Debug)]
pub struct LogTrapezoid {
    pub s: f64,
    pub step: f64,
    pub times: Vec<f64>,
    /// `h t_k^{-s}`.
    pub weights: Vec<f64>,
    /// `h τ^{1-s} / (e^{(1-s)h} - 1)`.
    pub lower_tail: f64,
    /// `h T^{-s} / (e^{sh} - 1)`.
    pub upper_tail: f64,
    /// Second-order lower tail `h τ^{2-s} / (e^{(2-s)h} - 1)`, used only for
    /// error estimates.
    pub lower_tail_second: f64,
}

impl LogTrapezoid {
    pub fn new(s: f64, nodes: usize, tau: f64, horizon: f64) -> Self {
        let nodes = nodes.max(2);
        let (lo, hi) = (tau.ln(), horizon.max(tau * 10.0).ln());
        let step = (hi - lo) / (nodes - 1) as f64;
        let times: Vec<f64> = (0..nodes).map(|k| (lo + k as f64 * step).exp()).collect();
        let weights = times.iter().map(|t| step * t.powf(-s)).collect();
        let tau = times[0];
        let top = times[nodes - 1];
        Self {
            s,
            step,
            lower_tail: step * tau.powf(1.0 - s) / ((1.0 - s) * step).exp_m1(),
            upper_tail: step * top.powf(-s) / (s * step).exp_m1(),
            lower_tail_second: step * tau.powf(2.0 - s) / ((2.0 - s) * step).exp_m1(),
            times,
            weights,
        }
    }

    /// Rule applied to `g(t) = e^{-tλ} - 1`; approximates `Γ(-s) λ^s`.
    pub fn mode_integral(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let body: f64 = self
            .times
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * (-t * lambda).exp_m1())
            .sum();
        body - lambda * self.lower_tail - self.upper_tail
    }

    /// A rule with half as many nodes over the same interval, for error
    /// estimation.
    pub fn coarsened(&self) -> Self {
        let n = self.times.len();
        Self::new(self.s, n.div_ceil(2), self.times[0], self.times[n - 1])
    }
}

/// `(-L)^s f = Γ(-s)⁻¹ ∫₀^∞ (P_t f - f) t^{-1-s} dt`, by [`LogTrapezoid`].
///
/// `P_t f - f` is evaluated from the spectral decomposition at every node;
/// the small-time continuation uses `Lf` computed directly on the graph and
/// the large-time one uses `P_∞ f - f`. The error estimate combines the
/// difference to a half-resolution rule with the size of the neglected
/// second-order tail terms; above `cfg.quadrature.tolerance` (relative) the
/// result is rejected.
pub fn frac_subordination(decomp: &SpectralDecomposition, cfg: &FracConfig, f: &[f64]) -> Result<Vec<f64>> {
    let n = decomp.len();
    check_len(n, f.len())?;
    // Constants are annihilated by L: the integrand vanishes identically.
    if f.iter().all(|v| *v == f[0]) {
        return Ok(vec![0.0; n]);
    }
    let Some(gap) = decomp.spectral_gap() else {
        return Ok(vec![0.0; n]);
    };
    let space = decomp.space();
    let rule = cfg.rule(gap, decomp.lambda_max());
    let coarse = rule.coarsened();

    let coeffs = decomp.project(f)?;
    let lambdas = decomp.eigenvalues();
    let increment = |t: f64| -> Vec<f64> {
        let c: Vec<f64> = coeffs.iter().zip(lambdas).map(|(c, l)| c * (-t * l).exp_m1()).collect();
        decomp.synthesize(&c).expect("coefficient count matches")
    };
    let lf = space.apply_generator(f)?;
    let llf = space.apply_generator(&lf)?;
    let far: Vec<f64> = decomp.zero_projection(f)?.iter().zip(f).map(|(p, v)| p - v).collect();

    let integrate = |rule: &LogTrapezoid| -> Vec<f64> {
        let samples: Vec<Vec<f64>> = rule.times.par_iter().map(|&t| increment(t)).collect();
        let mut acc = vec![0.0; n];
        for (g, w) in samples.iter().zip(&rule.weights) {
            for (a, v) in acc.iter_mut().zip(g) {
                *a += w * v;
            }
        }
        for x in 0..n {
            acc[x] += lf[x] * rule.lower_tail + far[x] * rule.upper_tail;
        }
        acc
    };
    let norm = 1.0 / gamma_neg(cfg.s);
    let fine: Vec<f64> = integrate(&rule).into_iter().map(|v| v * norm).collect();
    let rough: Vec<f64> = integrate(&coarse).into_iter().map(|v| v * norm).collect();

    let top_residual = norm_inf(
        &increment(rule.times[rule.times.len() - 1])
            .iter()
            .zip(&far)
            .map(|(g, a)| g - a)
            .collect::<Vec<_>>(),
    );
    let tails = (0.5 * norm_inf(&llf) * rule.lower_tail_second + top_residual * rule.upper_tail) * norm.abs();
    let discretization = fine.iter().zip(&rough).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = norm_inf(&fine).max(f64::MIN_POSITIVE);
    let estimate = (discretization + tails) / scale;
    if estimate > cfg.quadrature.tolerance {
        return Err(Error::QuadratureNotConverged {
            estimate,
            tolerance: cfg.quadrature.tolerance,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dirichlet::DirichletSpace;
    use crate::fractional::{frac_spectral, QuadratureScheme};
    use crate::linalg::max_relative_error;
    use crate::special::gamma;

    #[test]
    fn scalar_mode_half() {
        // ∫(e^{-2t}-1) t^{-3/2} dt / Γ(-1/2) = √2.
        let rule = LogTrapezoid::new(0.5, 256, 1e-6 / 2.0, 40.0 / 2.0);
        let v = rule.mode_integral(2.0) / gamma_neg(0.5);
        assert!((v - 2f64.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mode_integral_matches_gamma_identity() {
        for &s in &[0.05, 0.25, 0.5, 0.75, 0.95] {
            let rule = LogTrapezoid::new(s, 256, 1e-6 / 100.0, 40.0 / 0.01);
            for &l in &[0.01_f64, 0.3, 1.0, 17.0, 100.0] {
                let exact = gamma(1.0 - s) / -s * l.powf(s);
                let got = rule.mode_integral(l);
                assert!((got / exact - 1.0).abs() < 1e-7, "s={s} λ={l}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn matches_spectral_on_cycle() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(10).unwrap())).unwrap();
        let f: Vec<f64> = (0..10).map(|i| (i as f64 * 1.3).cos() + 0.2 * i as f64).collect();
        let cfg = FracConfig::new(0.3).unwrap();
        let a = frac_subordination(&d, &cfg, &f).unwrap();
        let b = frac_spectral(&d, 0.3, &f).unwrap();
        assert!(max_relative_error(&a, &b) < 1e-6);
        assert_eq!(frac_subordination(&d, &cfg, &[2.5; 10]).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn too_few_nodes_is_rejected_or_flagged() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::path(32).unwrap())).unwrap();
        let f: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let cfg = FracConfig::with_quadrature(
            0.5,
            QuadratureScheme {
                nodes: 8,
                ..QuadratureScheme::default()
            },
        )
        .unwrap();
        assert!(matches!(
            frac_subordination(&d, &cfg, &f),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
