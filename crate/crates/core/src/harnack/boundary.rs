use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::nonlocal::{trial_rng, DataRefinement, NonlocalDirichlet};
use super::report::{ExperimentReport, TrialRow};
use crate::dirichlet::{DirichletSpace, SpectralDecomposition};
use crate::error::{Error, Result};

/// Spectral decomposition of `grid(nx, ny)` as the tensor product of two
/// paths.
pub fn grid_decomposition(nx: usize, ny: usize) -> Result<SpectralDecomposition> {
    let a = SpectralDecomposition::compute(Arc::new(DirichletSpace::path(nx)?))?;
    let b = if nx == ny {
        a.clone()
    } else {
        SpectralDecomposition::compute(Arc::new(DirichletSpace::path(ny)?))?
    };
    SpectralDecomposition::tensor(Arc::new(DirichletSpace::grid(nx, ny)?), &a, &b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainShape {
    Square,
    LShape,
}

/// A vertex subset `Ω` of a square grid: a centered `inner × inner` square,
/// or that square with its upper-right quadrant removed. Both are convex
/// unions of grid boxes and hence inner uniform by construction.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub side: usize,
    pub inner: usize,
    pub shape: DomainShape,
    pub space: DirichletSpace,
    pub omega: Vec<usize>,
    in_omega: Vec<bool>,
}

impl GridDomain {
    pub fn new(side: usize, inner: usize, shape: DomainShape) -> Result<Self> {
        if inner < 4 || inner + 2 > side {
            return Err(Error::InvalidInput(format!(
                "inner size {inner} must be at least 4 and leave a margin in a grid of side {side}"
            )));
        }
        let space = DirichletSpace::grid(side, side)?;
        let off = (side - inner) / 2;
        let half = off + inner / 2;
        let contains = |i: usize, j: usize| {
            let square = (off..off + inner).contains(&i) && (off..off + inner).contains(&j);
            match shape {
                DomainShape::Square => square,
                DomainShape::LShape => square && !(i >= half && j >= half),
            }
        };
        let mut in_omega = vec![false; side * side];
        let mut omega = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if contains(i, j) {
                    in_omega[i * side + j] = true;
                    omega.push(i * side + j);
                }
            }
        }
        Ok(Self {
            side,
            inner,
            shape,
            space,
            omega,
            in_omega,
        })
    }

    pub fn square(side: usize, inner: usize) -> Result<Self> {
        Self::new(side, inner, DomainShape::Square)
    }

    pub fn l_shape(side: usize, inner: usize) -> Result<Self> {
        Self::new(side, inner, DomainShape::LShape)
    }

    /// `grid24-square16` or `grid24-l16`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown geometry {spec:?}; expected gridN-squareM or gridN-lM"));
        let rest = spec.strip_prefix("grid").ok_or_else(bad)?;
        let (side, shape) = rest.split_once('-').ok_or_else(bad)?;
        let side: usize = side.parse().map_err(|_| bad())?;
        if let Some(m) = shape.strip_prefix("square") {
            Self::square(side, m.parse().map_err(|_| bad())?)
        } else if let Some(m) = shape.strip_prefix('l') {
            Self::l_shape(side, m.parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }

    pub fn name(&self) -> String {
        match self.shape {
            DomainShape::Square => format!("grid{}-square{}", self.side, self.inner),
            DomainShape::LShape => format!("grid{}-l{}", self.side, self.inner),
        }
    }

    pub fn vertex(&self, i: usize, j: usize) -> usize {
        i * self.side + j
    }

    pub fn contains(&self, v: usize) -> bool {
        self.in_omega[v]
    }

    /// Lower-left corner of `Ω`.
    pub fn corner(&self) -> usize {
        let off = (self.side - self.inner) / 2;
        self.vertex(off, off)
    }

    /// Reentrant corner of the L-shape.
    pub fn reentrant_corner(&self) -> Option<usize> {
        let off = (self.side - self.inner) / 2;
        let half = off + self.inner / 2;
        (self.shape == DomainShape::LShape).then(|| self.vertex(half - 1, half - 1))
    }

    /// Vertices of `Ω` with a neighbor outside `Ω`.
    pub fn boundary(&self) -> Vec<usize> {
        self.omega
            .iter()
            .copied()
            .filter(|&v| self.space.neighbors(v).iter().any(|&(y, _)| !self.in_omega[y]))
            .collect()
    }

    /// `corner`, `reentrant`, or a vertex label `i,j`.
    pub fn resolve_point(&self, name: &str) -> Result<usize> {
        match name {
            "corner" => Ok(self.corner()),
            "reentrant" => self
                .reentrant_corner()
                .ok_or_else(|| Error::InvalidInput("only the L-shape has a reentrant corner".into())),
            id => self.space.index_of(id),
        }
    }

    /// The same shape at twice the resolution, with the data map from this
    /// grid.
    pub fn refined(&self) -> Result<(Self, DataRefinement)> {
        Ok((
            Self::new(2 * self.side, 2 * self.inner, self.shape)?,
            DataRefinement::grid_map(self.side),
        ))
    }

    /// Image of a vertex under refinement.
    pub fn refine_vertex(&self, v: usize) -> usize {
        let (i, j) = (v / self.side, v % self.side);
        2 * i * 2 * self.side + 2 * j
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryHarnackConfig {
    pub xi: usize,
    /// Probe radius.
    pub r: f64,
    /// Radius of the collar `Ω ∩ B(ξ, collar)` where the equation holds.
    pub collar: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Empirical boundary Harnack constant near `ξ`.
///
/// Each trial draws two independent positive data sets on `Ω` outside the
/// collar `D = Ω ∩ B(ξ, collar)`, with zero data off `Ω`, solves
/// `(-L)^s u = 0` in `D` for both, and records
/// `max_{x, x' ∈ Ω ∩ B(ξ, r)} u(x) v(x') / (u(x') v(x))`.
pub fn boundary_harnack_experiment(
    domain: &GridDomain,
    decomp: &SpectralDecomposition,
    s: f64,
    cfg: &BoundaryHarnackConfig,
    refinement: Option<&DataRefinement>,
) -> Result<ExperimentReport> {
    let n = domain.space.len();
    if decomp.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: decomp.len(),
        });
    }
    if !(cfg.r > 0.0 && cfg.collar > cfg.r) {
        return Err(Error::InvalidInput(format!(
            "need 0 < r < collar, got r = {}, collar = {}",
            cfg.r, cfg.collar
        )));
    }
    let within = |radius: f64| -> Vec<usize> {
        domain
            .space
            .ball(cfg.xi, radius)
            .into_iter()
            .filter(|&v| domain.contains(v))
            .collect()
    };
    let probe = within(cfg.r);
    let collar = within(cfg.collar);
    if probe.is_empty() {
        return Err(Error::DegenerateProbe(format!(
            "no vertex of the domain within {} of the point",
            cfg.r
        )));
    }
    if collar.len() == domain.omega.len() {
        return Err(Error::InvalidInput(
            "collar covers the whole domain; no positive data remain".into(),
        ));
    }
    let problem = NonlocalDirichlet::new(decomp, s, &collar)?;
    let identity = DataRefinement::identity(n);
    let data = refinement.unwrap_or(&identity);

    let draw = |stream: u64| -> Result<Vec<f64>> {
        let mut rng = trial_rng(cfg.seed, stream);
        let mut g = data.sample(&mut rng);
        for (v, val) in g.iter_mut().enumerate() {
            if !domain.contains(v) {
                *val = 0.0;
            }
        }
        problem.solve(&g)
    };
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let u = draw(2 * k as u64)?;
            let v = draw(2 * k as u64 + 1)?;
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for &x in &probe {
                if !(u[x] > 0.0 && v[x] > 0.0) {
                    return Err(Error::DegenerateProbe(format!(
                        "solution vanishes at {} in trial {k}",
                        domain.space.ids()[x]
                    )));
                }
                let q = u[x] / v[x];
                lo = lo.min(q);
                hi = hi.max(q);
            }
            Ok((
                hi / lo,
                problem.respects_maximum_principle(&u) && problem.respects_maximum_principle(&v),
            ))
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
        "boundary-harnack",
        json!({
            "geometry": domain.name(),
            "s": s,
            "xi": domain.space.ids()[cfg.xi],
            "r": cfg.r,
            "collar": cfg.collar,
            "trials": cfg.trials,
            "seed": cfg.seed,
        }),
        trials,
    )
    .with_metric("solves", 2.0 * cfg.trials as f64)
    .with_metric("max_principle_violations", violations as f64)
    .with_metric("probe_size", probe.len() as f64)
    .with_metric("collar_size", collar.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_parsing() {
        let sq = GridDomain::parse("grid24-square16").unwrap();
        assert_eq!(sq.omega.len(), 256);
        assert_eq!(sq.corner(), sq.vertex(4, 4));
        assert_eq!(sq.boundary().len(), 60);
        let l = GridDomain::parse("grid24-l16").unwrap();
        assert_eq!(l.omega.len(), 256 - 64);
        assert!(l.reentrant_corner().is_some());
        assert!(GridDomain::parse("ring24").is_err());
        let (fine, map) = sq.refined().unwrap();
        assert_eq!(fine.corner(), sq.refine_vertex(sq.corner()));
        assert_eq!(map.parent[fine.corner()], sq.corner());
    }

    #[test]
    fn tensor_decomposition_matches_grid() {
        let d = grid_decomposition(4, 5).unwrap();
        let f: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let lf = d.space().apply_generator(&f).unwrap();
        let spectral = d.apply_function(|l| -l, &f).unwrap();
        for (a, b) in lf.iter().zip(&spectral) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
