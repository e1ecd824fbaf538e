use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::FracConfig;
use crate::dirichlet::{DirichletSpace, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::linalg::linear_fit;

/// Periodic lattice `(ℤ/side)^dim` with unit weights, `dim ∈ {1, 2}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Lattice {
    pub side: usize,
    pub dim: usize,
}

impl Lattice {
    /// Hop-count diameter.
    pub fn diameter(&self) -> usize {
        self.dim * (self.side / 2)
    }

    pub fn build(&self) -> Result<DirichletSpace> {
        match self.dim {
            1 => DirichletSpace::ring(self.side),
            2 => DirichletSpace::torus(self.side, self.side),
            d => Err(Error::InvalidInput(format!(
                "lattice dimension must be 1 or 2, got {d}"
            ))),
        }
    }
}

/// Log–log fit of the jump kernel against hop distance from a base vertex.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub lattice: Lattice,
    pub s: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `-(dim + 2s)`.
    pub target: f64,
    pub window: (f64, f64),
    /// `(distance, mean kernel value over the distance shell)`.
    pub shells: Vec<(f64, f64)>,
}

/// Fits `log K(o, y) ≈ c + slope · log d(o, y)` over `d ∈ [3, diameter/4]`.
///
/// The row `K(o, ·)` is assembled from the spectral decomposition of the
/// one-dimensional cycle: on the torus the heat kernel is the product of two
/// cycle heat kernels, so its modes are products of cycle modes with summed
/// eigenvalues and no dense decomposition of the torus is needed. Kernel
/// values are averaged over each distance shell before fitting.
pub fn kernel_decay_profile(lattice: Lattice, cfg: &FracConfig) -> Result<DecayProfile> {
    if !(1..=2).contains(&lattice.dim) {
        return Err(Error::InvalidInput(format!(
            "lattice dimension must be 1 or 2, got {}",
            lattice.dim
        )));
    }
    let diameter = lattice.diameter();
    if diameter < 64 {
        return Err(Error::WindowTooSmall(format!(
            "lattice diameter {diameter} is below 64 hops"
        )));
    }
    let (lo, hi) = (3.0, diameter as f64 / 4.0);
    let n = lattice.side;
    let ring = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(n)?))?;
    let lambdas = ring.eigenvalues();
    let gap = ring.spectral_gap().expect("cycle is connected");
    let rule = cfg.rule(gap, lattice.dim as f64 * ring.lambda_max());
    // a[i][y] = φ_i(0) φ_i(y) on the cycle.
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let v = ring.vector(i);
            v.iter().map(|e| v[0] * e).collect()
        })
        .collect();
    let hop = |y: usize| y.min(n - y);

    let mut sums = vec![0.0; diameter + 1];
    let mut counts = vec![0usize; diameter + 1];
    if lattice.dim == 1 {
        let q: Vec<f64> = lambdas.iter().map(|&l| rule.mode_integral(l)).collect();
        for y in 1..n {
            let k: f64 = (0..n).map(|i| q[i] * a[i][y]).sum();
            sums[hop(y)] += k;
            counts[hop(y)] += 1;
        }
    } else {
        // K(o, (y1, y2)) = Σ_j [Σ_i q(λ_i + λ_j) a_i(y1)] a_j(y2).
        let q: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| rule.mode_integral(lambdas[i] + lambdas[j])).collect())
            .collect();
        for y1 in 0..n {
            let b: Vec<f64> = (0..n).map(|j| (0..n).map(|i| q[j][i] * a[i][y1]).sum()).collect();
            for y2 in 0..n {
                if y1 == 0 && y2 == 0 {
                    continue;
                }
                let k: f64 = (0..n).map(|j| b[j] * a[j][y2]).sum();
                let d = hop(y1) + hop(y2);
                sums[d] += k;
                counts[d] += 1;
            }
        }
    }
    let shells: Vec<(f64, f64)> = (1..=diameter)
        .filter(|&d| counts[d] > 0)
        .map(|d| (d as f64, sums[d] / counts[d] as f64))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = shells
        .iter()
        .filter(|(d, k)| *d >= lo && *d <= hi && *k > 0.0)
        .map(|(d, k)| (d.ln(), k.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::WindowTooSmall(format!(
            "only {} usable distances in [{lo}, {hi}]",
            xs.len()
        )));
    }
    let (intercept, slope) = linear_fit(&xs, &ys);
    Ok(DecayProfile {
        lattice,
        s: cfg.s,
        slope,
        intercept,
        target: -(lattice.dim as f64 + 2.0 * cfg.s),
        window: (lo, hi),
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lattice_is_rejected() {
        let cfg = FracConfig::new(0.5).unwrap();
        let r = kernel_decay_profile(Lattice { side: 100, dim: 1 }, &cfg);
        assert!(matches!(r, Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn ring_slope_near_target() {
        let cfg = FracConfig::new(0.5).unwrap();
        let p = kernel_decay_profile(Lattice { side: 160, dim: 1 }, &cfg).unwrap();
        assert!((p.slope - p.target).abs() < 0.3, "{} vs {}", p.slope, p.target);
    }
}
