use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{ExperimentReport, TrialRow};
use crate::dirichlet::DirichletSpace;
use crate::error::{Error, Result};
use crate::linalg::conjugate_gradient;

/// Neumann eigenfunctions of each ball used as Poincaré candidates.
pub const POINCARE_EIGENFUNCTIONS: usize = 10;
/// Smoothed random functions used as Poincaré candidates.
pub const POINCARE_RANDOM: usize = 50;
/// Dilation of the energy ball.
pub const POINCARE_DILATION: f64 = 2.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
}

/// Closed balls `B(x, r) = {y : d(x, y) ≤ r}` of one space.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(space: &DirichletSpace, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut family = Self::default();
        for &(c, r) in pairs {
            family.push(space, c, r)?;
        }
        Ok(family)
    }

    /// Every center with every radius.
    pub fn grid(space: &DirichletSpace, centers: &[usize], radii: &[f64]) -> Result<Self> {
        let pairs: Vec<_> = centers
            .iter()
            .flat_map(|&c| radii.iter().map(move |&r| (c, r)))
            .collect();
        Self::new(space, &pairs)
    }

    pub fn push(&mut self, space: &DirichletSpace, center: usize, radius: f64) -> Result<()> {
        if center >= space.len() || !(radius > 0.0) {
            return Err(Error::EmptyBall { center, radius });
        }
        let members = space.ball(center, radius);
        if members.is_empty() {
            return Err(Error::EmptyBall { center, radius });
        }
        self.balls.push(Ball {
            center,
            radius,
            members,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
}

fn mass(space: &DirichletSpace, members: &[usize]) -> f64 {
    members.iter().map(|&v| space.measure()[v]).sum()
}

/// `max μ(B(x, 2r)) / μ(B(x, r))` over the family.
pub fn doubling_constant(space: &DirichletSpace, family: &BallFamily) -> Result<ExperimentReport> {
    if family.is_empty() {
        return Err(Error::InvalidInput("ball family is empty".into()));
    }
    let trials = family
        .balls
        .par_iter()
        .map(|b| {
            let big = space.ball(b.center, 2.0 * b.radius);
            TrialRow {
                label: format!("{}:{}", space.ids()[b.center], b.radius),
                value: mass(space, &big) / mass(space, &b.members),
            }
        })
        .collect();
    Ok(ExperimentReport::new(
        "doubling",
        json!({ "vertices": space.len(), "balls": family.len() }),
        trials,
    ))
}

/// Internal-edge energy and generator data of an induced vertex set.
struct Patch<'a> {
    space: &'a DirichletSpace,
    members: Vec<usize>,
    local: HashMap<usize, usize>,
}

impl<'a> Patch<'a> {
    fn new(space: &'a DirichletSpace, members: Vec<usize>) -> Self {
        let local = members.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        Self { space, members, local }
    }

    fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.members.iter().enumerate().flat_map(move |(k, &v)| {
            self.space
                .neighbors(v)
                .iter()
                .filter_map(move |&(y, w)| self.local.get(&y).filter(|&&j| j > k).map(|&j| (k, j, w)))
        })
    }

    fn energy(&self, u: &[f64]) -> f64 {
        self.edges().map(|(i, j, w)| w * (u[i] - u[j]) * (u[i] - u[j])).sum()
    }

    fn measure(&self, k: usize) -> f64 {
        self.space.measure()[self.members[k]]
    }

    /// Lowest Neumann modes of the induced form, `μ`-normalized.
    fn neumann_modes(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.members.len();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for (i, j, w) in self.edges() {
            let (mi, mj) = (self.measure(i), self.measure(j));
            s[(i, i)] += w / mi;
            s[(j, j)] += w / mj;
            let off = -w / (mi * mj).sqrt();
            s[(i, j)] += off;
            s[(j, i)] += off;
        }
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(count)
            .map(|k| {
                (0..n)
                    .map(|i| eig.eigenvectors[(i, k)] / self.measure(i).sqrt())
                    .collect()
            })
            .collect()
    }

    /// Lazy random-walk smoothing of Gaussian noise.
    fn smooth_random(&self, rng: &mut ChaCha8Rng, sweeps: usize) -> Vec<f64> {
        let n = self.members.len();
        let mut u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let edges: Vec<_> = self.edges().collect();
        let mut deg = vec![0.0; n];
        for &(i, j, w) in &edges {
            deg[i] += w;
            deg[j] += w;
        }
        for _ in 0..sweeps {
            let mut acc = vec![0.0; n];
            for &(i, j, w) in &edges {
                acc[i] += w * u[j];
                acc[j] += w * u[i];
            }
            for k in 0..n {
                if deg[k] > 0.0 {
                    u[k] = 0.5 * u[k] + 0.5 * acc[k] / deg[k];
                }
            }
        }
        u
    }
}

/// Extends `inner` (values on the members of `inner_patch`) to `outer`
/// by the harmonic extension with free outer boundary, the extension of
/// least energy. Falls back to the constant mean when the complement has
/// parts not connected to the inner ball.
fn harmonic_extension(outer: &Patch, inner: &[usize], values: &[f64]) -> Vec<f64> {
    let n = outer.members.len();
    let mut u = vec![f64::NAN; n];
    for (&v, &val) in inner.iter().zip(values) {
        u[outer.local[&v]] = val;
    }
    let free: Vec<usize> = (0..n).filter(|&k| u[k].is_nan()).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if free.is_empty() {
        return u;
    }
    let slot: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let edges: Vec<_> = outer.edges().collect();
    let mut diag = vec![0.0; free.len()];
    let mut rhs = vec![0.0; free.len()];
    for &(i, j, w) in &edges {
        for (p, q) in [(i, j), (j, i)] {
            if let Some(&a) = slot.get(&p) {
                diag[a] += w;
                if !slot.contains_key(&q) {
                    rhs[a] += w * u[q];
                }
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        out.iter_mut().zip(&diag).zip(x).for_each(|((o, d), v)| *o = d * v);
        for &(i, j, w) in &edges {
            if let (Some(&a), Some(&b)) = (slot.get(&i), slot.get(&j)) {
                out[a] -= w * x[b];
                out[b] -= w * x[a];
            }
        }
    };
    let solved = if diag.iter().all(|d| *d > 0.0) {
        conjugate_gradient(apply, &diag, &rhs, 1e-10, 10 * free.len() + 100).ok()
    } else {
        None
    };
    match solved {
        Some(out) => {
            for (i, &k) in free.iter().enumerate() {
                u[k] = out.solution[i];
            }
        }
        None => {
            for &k in &free {
                u[k] = mean;
            }
        }
    }
    u
}

/// Largest distance from `center`.
fn eccentricity(space: &DirichletSpace, center: usize) -> f64 {
    (0..space.len()).map(|y| space.dist(center, y)).fold(0.0, f64::max)
}

/// Empirical 2-Poincaré constant
/// `max (μ(B)⁻¹ Σ_B |u - u_B| μ) / (r (μ(ΛB)⁻¹ E_{ΛB}(u))^{1/2})`
/// over the family and over candidate functions: the lowest Neumann modes
/// of each ball and smoothed random functions, both extended harmonically
/// from `B` to `ΛB`. `E_{ΛB}` counts edges inside `ΛB`.
///
/// A ball whose dilation is cut off by the extent of the space (and which is
/// not already the whole space) is rejected with `DilationExceedsSpace`.
pub fn poincare_constant(
    space: &DirichletSpace,
    family: &BallFamily,
    dilation: f64,
    seed: u64,
) -> Result<ExperimentReport> {
    if !(dilation > 1.0) {
        return Err(Error::InvalidInput(format!("dilation must exceed 1, got {dilation}")));
    }
    if family.is_empty() {
        return Err(Error::InvalidInput("ball family is empty".into()));
    }
    for b in &family.balls {
        if b.members.len() < space.len() && dilation * b.radius > eccentricity(space, b.center) {
            return Err(Error::DilationExceedsSpace(format!(
                "ball at {} of radius {} dilated by {dilation} exceeds the space",
                space.ids()[b.center],
                b.radius
            )));
        }
    }
    let rows = family
        .balls
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            let inner = Patch::new(space, b.members.clone());
            let outer = Patch::new(space, space.ball(b.center, dilation * b.radius));
            let outer_mass: f64 = (0..outer.members.len()).map(|i| outer.measure(i)).sum();
            let inner_mass: f64 = (0..inner.members.len()).map(|i| inner.measure(i)).sum();

            let mut candidates = inner.neumann_modes(POINCARE_EIGENFUNCTIONS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            candidates.extend((0..POINCARE_RANDOM).map(|_| inner.smooth_random(&mut rng, 4)));

            let mut best = 0.0_f64;
            for u in &candidates {
                let avg = (0..u.len()).map(|i| u[i] * inner.measure(i)).sum::<f64>() / inner_mass;
                let osc = (0..u.len()).map(|i| (u[i] - avg).abs() * inner.measure(i)).sum::<f64>() / inner_mass;
                let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if osc <= 1e-10 * scale {
                    continue;
                }
                let extended = harmonic_extension(&outer, &b.members, u);
                let energy = outer.energy(&extended);
                if energy <= 0.0 {
                    continue;
                }
                best = best.max(osc / (b.radius * (energy / outer_mass).sqrt()));
            }
            TrialRow {
                label: format!("{}:{}", space.ids()[b.center], b.radius),
                value: best,
            }
        })
        .collect();
    Ok(ExperimentReport::new(
        "poincare",
        json!({
            "vertices": space.len(),
            "balls": family.len(),
            "dilation": dilation,
            "seed": seed,
            "eigenfunctions": POINCARE_EIGENFUNCTIONS,
            "random": POINCARE_RANDOM,
        }),
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_doubling_by_exhaustive_count() {
        let ring = DirichletSpace::ring(64).unwrap();
        let radii: Vec<f64> = (1..=8).map(f64::from).collect();
        let fam = BallFamily::grid(&ring, &[0, 17], &radii).unwrap();
        let r = doubling_constant(&ring, &fam).unwrap();
        // |B(x, r)| = 2r + 1 while 4r + 1 < 64, so the ratio (4r+1)/(2r+1)
        // increases with r and peaks at the largest radius.
        assert_eq!(r.constant, 33.0 / 17.0);
        assert_eq!(r.trials[0].value, 5.0 / 3.0);
    }

    #[test]
    fn whole_space_ball_has_ratio_one() {
        let p = DirichletSpace::path(10).unwrap();
        let fam = BallFamily::new(&p, &[(0, 20.0)]).unwrap();
        assert_eq!(doubling_constant(&p, &fam).unwrap().constant, 1.0);
        assert!(matches!(BallFamily::new(&p, &[(0, 0.0)]), Err(Error::EmptyBall { .. })));
    }

    #[test]
    fn harmonic_extension_of_constant_is_constant() {
        let p = DirichletSpace::path(12).unwrap();
        let outer = Patch::new(&p, (0..12).collect());
        let u = harmonic_extension(&outer, &[4, 5, 6], &[2.0, 2.0, 2.0]);
        assert!(u.iter().all(|v| (v - 2.0).abs() < 1e-9));
        assert!(outer.energy(&u) < 1e-15);
    }
}
