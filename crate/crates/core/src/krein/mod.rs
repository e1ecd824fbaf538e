//! Krein strings `R_zz = λ A(z) R` and the Bernstein functions
//! `ψ(λ) = -R_z(0, λ)` they define; the general extension
//! `v(·, z) = R(z, -L) f` whose boundary flux is `ψ(-L) f`.

mod riccati;
mod string;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use riccati::{solve_string, StringSolution, TRUNCATION_DECAY, TRUNCATION_SENSITIVITY};
pub use string::{string_from_weight, weight_from_string, KreinString, Weight};

use crate::dirichlet::SpectralDecomposition;
use crate::error::{check_len, check_s, Error, Result};
use crate::linalg::norm_inf;
use crate::special::gamma;

/// Slack allowed on second differences in the concavity check.
pub const CONCAVITY_SLACK: f64 = 1e-8;

/// `ψ` tabulated on a positive, increasing λ-grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BernsteinTable {
    pub lambdas: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Necessary conditions for a Bernstein function, evaluated on the grid with
/// the origin `(0, 0)` prepended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernsteinChecks {
    pub nonnegative: bool,
    pub nondecreasing: bool,
    pub concave: bool,
}

impl BernsteinChecks {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.nondecreasing && self.concave
    }
}

impl BernsteinTable {
    pub fn checks(&self) -> BernsteinChecks {
        let mut x = vec![0.0];
        let mut y = vec![0.0];
        x.extend(&self.lambdas);
        y.extend(&self.psi);
        let scale = norm_inf(&y).max(f64::MIN_POSITIVE);
        let slopes: Vec<f64> = (1..x.len()).map(|k| (y[k] - y[k - 1]) / (x[k] - x[k - 1])).collect();
        BernsteinChecks {
            nonnegative: self.psi.iter().all(|p| *p >= 0.0),
            nondecreasing: y.windows(2).all(|w| w[1] >= w[0] - CONCAVITY_SLACK * scale),
            concave: slopes
                .windows(2)
                .all(|w| w[1] <= w[0] + CONCAVITY_SLACK * w[0].abs().max(f64::MIN_POSITIVE)),
        }
    }

    /// Log-log least-squares fit `ψ ≈ c λ^p`; returns `(c, p)`.
    pub fn power_fit(&self) -> (f64, f64) {
        let lx: Vec<f64> = self.lambdas.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = self.psi.iter().map(|v| v.ln()).collect();
        let (intercept, slope) = crate::linalg::linear_fit(&lx, &ly);
        (intercept.exp(), slope)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

/// `ψ(λ_k)` for every grid value, solved concurrently.
pub fn bernstein_from_string(string: &KreinString, lambdas: &[f64]) -> Result<BernsteinTable> {
    string.validate()?;
    if lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "lambda grid must be positive and increasing".into(),
        ));
    }
    let psi = lambdas
        .par_iter()
        .map(|&l| solve_string(string, l, &[]).map(|s| s.psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(BernsteinTable {
        lambdas: lambdas.to_vec(),
        psi,
    })
}

/// `2^{1-2s} Γ(1-s)/Γ(s)`: the factor with `ψ(λ) = c_s λ^s` for the string
/// of the weight `y^{1-2s}`.
pub fn power_weight_constant(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))
}

/// `v(x, z) = Σ_i R(z, λ_i) ⟨f, φ_i⟩ φ_i(x)` on a z-grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralExtension {
    pub z: Vec<f64>,
    pub n: usize,
    /// Level-major: `values[k * n + x]`.
    pub values: Vec<f64>,
    /// `-∂_z v(·, 0) = ψ(-L) f`.
    pub dtn: Vec<f64>,
    /// `ψ(λ_i)` per eigenvalue.
    pub psi: Vec<f64>,
    /// `max_k |A(z_k) L v_k + ∂_zz v_k| / max_k |A(z_k) L v_k|` with the
    /// z-derivative taken by second differences at interior grid points.
    pub residual: f64,
}

impl GeneralExtension {
    pub fn level(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }
}

pub fn general_extension(
    decomp: &SpectralDecomposition,
    f: &[f64],
    string: &KreinString,
    z_grid: &[f64],
) -> Result<GeneralExtension> {
    string.validate()?;
    let n = decomp.len();
    check_len(n, f.len())?;
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) || z_grid.first().is_some_and(|z| *z < 0.0) {
        return Err(Error::InvalidInput("z grid must be nonnegative and increasing".into()));
    }
    let coeffs = decomp.project(f)?;
    let lambdas = decomp.eigenvalues();

    // Repeated eigenvalues share one string solve.
    let mut distinct: Vec<f64> = Vec::new();
    let mut slot = Vec::with_capacity(n);
    for &l in lambdas {
        match distinct.iter().position(|d| (d - l).abs() <= 1e-12 * l.abs().max(1.0)) {
            Some(k) => slot.push(k),
            None => {
                slot.push(distinct.len());
                distinct.push(l);
            }
        }
    }
    let solutions = distinct
        .par_iter()
        .map(|&l| solve_string(string, l, z_grid))
        .collect::<Result<Vec<_>>>()?;

    let m = z_grid.len();
    let mut values = vec![0.0; m * n];
    for k in 0..m {
        let c: Vec<f64> = coeffs.iter().zip(&slot).map(|(c, &i)| c * solutions[i].r[k]).collect();
        values[k * n..(k + 1) * n].copy_from_slice(&decomp.synthesize(&c)?);
    }
    let psi: Vec<f64> = slot.iter().map(|&i| solutions[i].psi).collect();
    let dtn = decomp.synthesize(&coeffs.iter().zip(&psi).map(|(c, p)| c * p).collect::<Vec<_>>())?;

    let space = decomp.space();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for k in 1..m.saturating_sub(1) {
        let (h0, h1) = (z_grid[k] - z_grid[k - 1], z_grid[k + 1] - z_grid[k]);
        let lv = space.apply_generator(&values[k * n..(k + 1) * n])?;
        let a = string.eval(z_grid[k]);
        for x in 0..n {
            let (lo, mid, hi) = (values[(k - 1) * n + x], values[k * n + x], values[(k + 1) * n + x]);
            let vzz = 2.0 * (h0 * hi - (h0 + h1) * mid + h1 * lo) / (h0 * h1 * (h0 + h1));
            worst = worst.max((a * lv[x] + vzz).abs());
            scale = scale.max((a * lv[x]).abs());
        }
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(GeneralExtension {
        z: z_grid.to_vec(),
        n,
        values,
        dtn,
        psi,
        residual,
    })
}

/// `√λ ∫₀^∞ e^{-tλ} G(z, t) dt` with `G(z, t) = e^{-z²/4t}/√(πt)`, which
/// equals `R(z, λ) = e^{-z√λ}` for the string `A ≡ 1`.
pub fn g_kernel_sanity(string: &KreinString, z: f64, lambda: f64) -> Result<f64> {
    if string.constant_value() != Some(1.0) {
        return Err(Error::NotConstantString);
    }
    if !(lambda >= 0.0) || !(z >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need z, lambda >= 0, got z = {z}, lambda = {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    // t = e^u; the integrand decays doubly exponentially at the top and like
    // e^{u/2} at the bottom.
    let (lo, hi) = ((1e-34 / lambda).ln(), (80.0 / lambda).ln());
    let h = 0.02;
    let count = ((hi - lo) / h).ceil() as usize;
    let q = 0.25 * z * z;
    let sum: f64 = (0..=count)
        .map(|k| {
            let u = lo + k as f64 * h;
            let w = if k == 0 || k == count { 0.5 } else { 1.0 };
            w * (0.5 * u - lambda * u.exp() - q * (-u).exp()).exp()
        })
        .sum();
    Ok(sum * h * (lambda / std::f64::consts::PI).sqrt())
}
