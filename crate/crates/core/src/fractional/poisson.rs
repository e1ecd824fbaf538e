use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dirichlet::SpectralDecomposition;
use crate::error::{check_len, check_s, Error, Result};
use crate::extension::{ExtensionField, Provenance};
use crate::special::{dtn_constant, gamma, gauss_laguerre};

/// Above this value of `c = y²λ/4` the Gauss–Laguerre rule is accurate; below
/// it the factor `e^{-c/r}` varies on a scale the Laguerre nodes do not
/// resolve and a log-substituted trapezoid rule is used instead.
const LAGUERRE_THRESHOLD: f64 = 25.0;
const LAGUERRE_NODES: usize = 128;
const LOG_STEP: f64 = 0.1;

/// Probe height for the semi-analytic Dirichlet-to-Neumann limit, relative
/// to `1/√λ_max`.
const DTN_PROBE: f64 = 1e-3;

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn laguerre_rule(s: f64) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<u64, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(s.to_bits())
        .or_insert_with(|| Arc::new(gauss_laguerre(LAGUERRE_NODES, s - 1.0)))
        .clone()
}

/// Per-mode Poisson multiplier
/// `M_s(λ, y) = Γ(s)⁻¹ ∫₀^∞ e^{-r} r^{s-1} e^{-y²λ/(4r)} dr`,
/// so that the extension of `f` is `U(·,y) = M_s(-L, y) f`.
///
/// Equal to `1` when `λ = 0` or `y = 0`, in `(0, 1)` otherwise, decreasing in
/// both `λ` and `y`. Panics if `s ∉ (0,1)`.
pub fn poisson_multiplier(s: f64, lambda: f64, y: f64) -> f64 {
    assert!(s > 0.0 && s < 1.0, "s = {s} outside (0, 1)");
    if lambda <= 0.0 || y <= 0.0 {
        return 1.0;
    }
    let c = 0.25 * y * y * lambda;
    if c >= LAGUERRE_THRESHOLD {
        // Weight r^{s-1} e^{-r} is built into the rule; Γ(s) is already
        // divided out of the weights.
        let rule = laguerre_rule(s);
        rule.0.iter().zip(&rule.1).map(|(r, w)| w * (-c / r).exp()).sum()
    } else {
        log_trapezoid(s, c) / gamma(s)
    }
}

/// `∫ exp(s v - e^v - c e^{-v}) dv` over the range where the integrand is
/// above double-precision relevance.
fn log_trapezoid(s: f64, c: f64) -> f64 {
    let edge = (2.0 * c.sqrt() + 45.0).ln();
    let (lo, hi) = (c.ln() - edge, edge);
    let steps = ((hi - lo) / LOG_STEP).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    (0..=steps)
        .map(|k| {
            let v = lo + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * (s * v - v.exp() - c * (-v).exp()).exp()
        })
        .sum::<f64>()
        * h
}

/// Semi-analytic extension `U(·, y) = Σ_i M_s(λ_i, y) ⟨f, φ_i⟩_μ φ_i`
/// sampled at the heights `ys` (nondecreasing, starting at 0).
///
/// Stored as `f + Σ_i (M_s(λ_i, y) - 1)⟨f,φ_i⟩φ_i`, so the `y = 0` level is
/// `f` bit for bit.
pub fn poisson_extend(decomp: &SpectralDecomposition, s: f64, f: &[f64], ys: &[f64]) -> Result<ExtensionField> {
    check_s(s)?;
    let n = decomp.len();
    check_len(n, f.len())?;
    if ys.first() != Some(&0.0) {
        return Err(Error::InvalidInput("extension heights must start at y = 0".into()));
    }
    if ys.windows(2).any(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidInput(
            "extension heights must be finite and nondecreasing".into(),
        ));
    }
    let coeffs = decomp.project(f)?;
    let lambdas = decomp.eigenvalues();
    let mut values = Vec::with_capacity(n * ys.len());
    for &y in ys {
        if y == 0.0 {
            values.extend_from_slice(f);
            continue;
        }
        let c: Vec<f64> = coeffs
            .iter()
            .zip(lambdas)
            .map(|(c, &l)| c * (poisson_multiplier(s, l, y) - 1.0))
            .collect();
        let delta = decomp.synthesize(&c)?;
        values.extend(f.iter().zip(&delta).map(|(a, b)| a + b));
    }
    ExtensionField::new(s, ys.to_vec(), n, values, Provenance::SemiAnalytic)
}

/// Weighted Dirichlet-to-Neumann map of the semi-analytic extension,
/// `-C_s lim_{y→0} y^{1-2s} ∂_y U`.
///
/// Uses `D(y) = (U(y) - f)/y^{2s} = D₀ + B y^{2-2s} + O(y²)`, for which the
/// limit equals `2s D₀`; `D₀` is obtained by two-point Richardson
/// extrapolation from heights `y₁` and `2y₁`, `y₁ = 10⁻³/√λ_max`.
pub fn semi_analytic_dtn(decomp: &SpectralDecomposition, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_s(s)?;
    let n = decomp.len();
    check_len(n, f.len())?;
    let top = decomp.lambda_max();
    if top <= 0.0 {
        return Ok(vec![0.0; n]);
    }
    let y1 = DTN_PROBE / top.sqrt();
    let field = poisson_extend(decomp, s, f, &[0.0, y1, 2.0 * y1])?;
    let ratio = 2f64.powf(2.0 - 2.0 * s);
    let cs = dtn_constant(s)?;
    let (p1, p2) = (y1.powf(2.0 * s), (2.0 * y1).powf(2.0 * s));
    Ok((0..n)
        .map(|x| {
            let d1 = (field.get(x, 1) - f[x]) / p1;
            let d2 = (field.get(x, 2) - f[x]) / p2;
            let d0 = (ratio * d1 - d2) / (ratio - 1.0);
            -cs * 2.0 * s * d0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletSpace;
    use crate::fractional::frac_spectral;
    use crate::linalg::max_relative_error;

    /// `K_ν(z) = ∫₀^∞ e^{-z cosh t} cosh(νt) dt`, integrated independently of
    /// the library's rules.
    fn bessel_k(nu: f64, z: f64) -> f64 {
        let (n, hi) = (20_000, 12.0);
        let h = hi / n as f64;
        (0..=n)
            .map(|k| {
                let t = k as f64 * h;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * (-z * t.cosh()).exp() * (nu * t).cosh()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn matches_bessel_closed_form() {
        for &s in &[0.1, 0.3, 0.5, 0.8] {
            for &(l, y) in &[(1.0, 0.01), (1.0, 0.7), (4.0, 1.5), (2.0, 7.5), (10.0, 5.0)] {
                let z: f64 = y * f64::sqrt(l);
                let exact = 2f64.powf(1.0 - s) / gamma(s) * z.powf(s) * bessel_k(s, z);
                let got = poisson_multiplier(s, l, y);
                assert!((got - exact).abs() < 1e-10, "s={s} λ={l} y={y}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn half_is_exponential() {
        assert!((poisson_multiplier(0.5, 4.0, 1.0) - (-2.0_f64).exp()).abs() < 1e-8);
        assert!((poisson_multiplier(0.5, 4.0, 20.0) - (-40.0_f64).exp()).abs() < 1e-20);
        assert_eq!(poisson_multiplier(0.3, 0.0, 2.0), 1.0);
        assert_eq!(poisson_multiplier(0.3, 2.0, 0.0), 1.0);
    }

    #[test]
    fn dtn_matches_spectral() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(10).unwrap())).unwrap();
        let f: Vec<f64> = (0..10).map(|i| (i as f64 * 0.9).sin() + 0.1).collect();
        for &s in &[0.3, 0.5, 0.75] {
            let a = semi_analytic_dtn(&d, s, &f).unwrap();
            let b = frac_spectral(&d, s, &f).unwrap();
            assert!(
                max_relative_error(&a, &b) < 1e-5,
                "s={s}: {}",
                max_relative_error(&a, &b)
            );
        }
    }
}
