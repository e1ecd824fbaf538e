use nalgebra::{DMatrix, DVector, LU};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{ExperimentReport, TrialRow};
use crate::dirichlet::{DirichletSpace, SpectralDecomposition};
use crate::error::{check_len, check_s, Error, Result};
use crate::fractional::JumpKernel;

/// Relative slack of the maximum-principle check.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-12;

/// Factored Dirichlet problem `(-L)^s f = 0` on `inside`, `f` prescribed on
/// the complement.
///
/// With jump rates `J(x, y) ≥ 0` (`x ≠ y`) the equation at `x` reads
/// `Σ_y J(x, y)(f(y) - f(x)) = 0`. The rows for `inside` are assembled once
/// and LU-factored; each exterior datum costs one back-substitution.
pub struct NonlocalDirichlet {
    n: usize,
    inside: Vec<usize>,
    is_inside: Vec<bool>,
    /// `J(x, ·)` for `x ∈ inside`, one row each.
    rates: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn check_inside(n: usize, inside: &[usize]) -> Result<Vec<usize>> {
    let mut inside = inside.to_vec();
    inside.sort_unstable();
    inside.dedup();
    if inside.is_empty() || inside.len() >= n {
        return Err(Error::InvalidInput(format!(
            "interior must be a nonempty strict subset; got {} of {n} vertices",
            inside.len()
        )));
    }
    if let Some(&v) = inside.iter().find(|&&v| v >= n) {
        return Err(Error::UnknownVertex(format!("index {v}")));
    }
    Ok(inside)
}

impl NonlocalDirichlet {
    /// Jump rates from the spectral calculus:
    /// `J(x, y) = -Σ_i λ_i^s φ_i(x) φ_i(y) μ(y)`, the negated off-diagonal of
    /// the matrix of `(-L)^s`.
    pub fn new(decomp: &SpectralDecomposition, s: f64, inside: &[usize]) -> Result<Self> {
        check_s(s)?;
        let n = decomp.len();
        if decomp.zero_modes() > 1 {
            return Err(Error::DisconnectedSpace {
                components: decomp.zero_modes(),
            });
        }
        let inside = check_inside(n, inside)?;
        let mu = decomp.space().measure();
        let powers: Vec<f64> = decomp.eigenvalues().iter().map(|l| l.powf(s)).collect();
        let mut rates = DMatrix::zeros(inside.len(), n);
        for (k, power) in powers.iter().enumerate() {
            if *power == 0.0 {
                continue;
            }
            let phi = decomp.vector(k);
            for (r, &x) in inside.iter().enumerate() {
                let c = power * phi[x];
                for y in 0..n {
                    rates[(r, y)] -= c * phi[y] * mu[y];
                }
            }
        }
        Self::assemble(n, inside, rates)
    }

    /// Jump rates `K(x, y) μ(y)` from a quadrature kernel.
    pub fn from_kernel(kernel: &JumpKernel, inside: &[usize]) -> Result<Self> {
        let n = kernel.len();
        kernel.require_connected(2)?;
        let inside = check_inside(n, inside)?;
        let mut rates = DMatrix::zeros(inside.len(), n);
        for (r, &x) in inside.iter().enumerate() {
            for y in 0..n {
                rates[(r, y)] = kernel.get(x, y) * kernel.measure[y];
            }
        }
        Self::assemble(n, inside, rates)
    }

    fn assemble(n: usize, inside: Vec<usize>, mut rates: DMatrix<f64>) -> Result<Self> {
        let mut is_inside = vec![false; n];
        for &x in &inside {
            is_inside[x] = true;
        }
        let m = inside.len();
        for (r, &x) in inside.iter().enumerate() {
            rates[(r, x)] = 0.0;
        }
        let mut a = DMatrix::zeros(m, m);
        for (r, _) in inside.iter().enumerate() {
            a[(r, r)] = -rates.row(r).sum();
            for (c, &y) in inside.iter().enumerate() {
                a[(r, c)] += rates[(r, y)];
            }
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem(
                "interior block of the jump operator is singular".into(),
            ));
        }
        Ok(Self {
            n,
            inside,
            is_inside,
            rates,
            lu,
        })
    }

    pub fn inside(&self) -> &[usize] {
        &self.inside
    }

    /// Solution equal to `exterior` off the interior (entries of `exterior`
    /// on the interior are ignored).
    pub fn solve(&self, exterior: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, exterior.len())?;
        let rhs = DVector::from_iterator(
            self.inside.len(),
            (0..self.inside.len()).map(|r| {
                -(0..self.n)
                    .filter(|&y| !self.is_inside[y])
                    .map(|y| self.rates[(r, y)] * exterior[y])
                    .sum::<f64>()
            }),
        );
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("LU back-substitution failed".into()))?;
        let mut f = exterior.to_vec();
        for (r, &x) in self.inside.iter().enumerate() {
            f[x] = sol[r];
        }
        Ok(f)
    }

    /// Whether `f` lies within the range of its exterior values.
    pub fn respects_maximum_principle(&self, f: &[f64]) -> bool {
        let (lo, hi) = (0..self.n)
            .filter(|&y| !self.is_inside[y])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
                (a.min(f[y]), b.max(f[y]))
            });
        let slack = MAX_PRINCIPLE_SLACK * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        self.inside.iter().all(|&x| f[x] >= lo - slack && f[x] <= hi + slack)
    }
}

pub fn nonlocal_dirichlet_solve(
    decomp: &SpectralDecomposition,
    s: f64,
    inside: &[usize],
    exterior: &[f64],
) -> Result<Vec<f64>> {
    NonlocalDirichlet::new(decomp, s, inside)?.solve(exterior)
}

/// Maps every vertex of a refined graph to the vertex of the coarse graph it
/// came from, so random data drawn on the coarse graph can be upsampled.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataRefinement {
    pub parent: Vec<usize>,
    pub coarse_len: usize,
}

impl DataRefinement {
    pub fn identity(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            coarse_len: n,
        }
    }

    /// `ring(2n)`, vertex `v` from `v / 2`.
    pub fn ring(n: usize) -> Result<(DirichletSpace, Self)> {
        let fine = DirichletSpace::ring(2 * n)?;
        Ok((
            fine,
            Self {
                parent: (0..2 * n).map(|v| v / 2).collect(),
                coarse_len: n,
            },
        ))
    }

    /// `grid(2n, 2n)`, vertex `(i, j)` from `(i / 2, j / 2)`.
    pub fn grid(n: usize) -> Result<(DirichletSpace, Self)> {
        let fine = DirichletSpace::grid(2 * n, 2 * n)?;
        Ok((fine, Self::grid_map(n)))
    }

    pub(crate) fn grid_map(n: usize) -> Self {
        let m = 2 * n;
        Self {
            parent: (0..m * m).map(|v| (v / m / 2) * n + (v % m) / 2).collect(),
            coarse_len: n * n,
        }
    }

    /// Lognormal `exp(N(0, 1))` values on the coarse vertices, upsampled.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let dist = LogNormal::new(0.0, 1.0).expect("valid parameters");
        let coarse: Vec<f64> = (0..self.coarse_len).map(|_| dist.sample(rng)).collect();
        self.parent.iter().map(|&p| coarse[p]).collect()
    }
}

/// Reproducible per-trial generator.
pub(crate) fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarnackConfig {
    pub center: usize,
    pub radius: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Multiplies every exterior datum.
    pub data_scale: f64,
}

/// Empirical interior Harnack constant: for random nonnegative exterior data
/// on the complement of `B(center, R)`, solve `(-L)^s f = 0` in the ball and
/// record `sup f / inf f` over `B(center, δR)`.
pub fn harnack_constant(
    decomp: &SpectralDecomposition,
    s: f64,
    cfg: &HarnackConfig,
    refinement: Option<&DataRefinement>,
) -> Result<ExperimentReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 1), got {}",
            cfg.delta
        )));
    }
    if !(cfg.data_scale > 0.0) {
        return Err(Error::InvalidInput("data scale must be positive".into()));
    }
    let space = decomp.space();
    let n = space.len();
    if cfg.center >= n {
        return Err(Error::UnknownVertex(format!("index {}", cfg.center)));
    }
    let identity = DataRefinement::identity(n);
    let data = refinement.unwrap_or(&identity);
    check_len(n, data.parent.len())?;
    let inside = space.ball(cfg.center, cfg.radius);
    let probe = space.ball(cfg.center, cfg.delta * cfg.radius);
    let problem = NonlocalDirichlet::new(decomp, s, &inside)?;

    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, k as u64);
            let exterior: Vec<f64> = data.sample(&mut rng).iter().map(|v| v * cfg.data_scale).collect();
            let f = problem.solve(&exterior)?;
            let (lo, hi) = probe.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(f[x]), b.max(f[x]))
            });
            Ok((hi / lo, problem.respects_maximum_principle(&f)))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = outcomes.iter().filter(|(_, ok)| !ok).count();
    let trials = outcomes
        .iter()
        .enumerate()
        .map(|(k, (r, _))| TrialRow {
            label: format!("trial{k}"),
            value: *r,
        })
        .collect();
    Ok(ExperimentReport::new(
        "harnack",
        json!({
            "vertices": n,
            "s": s,
            "center": space.ids()[cfg.center],
            "radius": cfg.radius,
            "delta": cfg.delta,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "data_scale": cfg.data_scale,
        }),
        trials,
    )
    .with_metric("solves", cfg.trials as f64)
    .with_metric("max_principle_violations", violations as f64)
    .with_metric("interior_size", inside.len() as f64)
    .with_metric("probe_size", probe.len() as f64))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    #[test]
    fn constants_solve_exactly() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(12).unwrap())).unwrap();
        let f = nonlocal_dirichlet_solve(&d, 0.4, &[2, 3, 4], &[3.0; 12]).unwrap();
        assert!(f.iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_interiors() {
        let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(5).unwrap())).unwrap();
        assert!(nonlocal_dirichlet_solve(&d, 0.4, &[], &[0.0; 5]).is_err());
        assert!(nonlocal_dirichlet_solve(&d, 0.4, &[0, 1, 2, 3, 4], &[0.0; 5]).is_err());
    }

    #[test]
    fn grid_map_parents() {
        let m = DataRefinement::grid_map(3);
        // Fine (5, 2) in a 6×6 grid comes from coarse (2, 1).
        assert_eq!(m.parent[5 * 6 + 2], 2 * 3 + 1);
    }
}
