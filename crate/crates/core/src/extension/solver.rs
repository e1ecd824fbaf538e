use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::field::{ExtensionField, Provenance};
use super::mesh::YMesh;
use crate::dirichlet::{DirichletSpace, SpectralDecomposition};
use crate::error::{check_len, Error, Result};
use crate::fractional::poisson_multiplier;
use crate::linalg::conjugate_gradient;

/// Largest `n · N` for which the block-tridiagonal direct solver is used
/// automatically.
pub const DIRECT_SOLVE_LIMIT: usize = 50_000;

pub const CG_TOLERANCE: f64 = 1e-10;

/// Boundary condition at the top of the truncated half-line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopBc {
    /// `∂_y U = 0` at `y = Y`.
    Neumann,
    /// `U(·, Y) = Σ_i M_s(λ_i, Y) f_i φ_i`, the exact modal values; needs a
    /// spectral decomposition.
    ModalDirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Direct when `n · N ≤ DIRECT_SOLVE_LIMIT`, conjugate gradients above.
    Auto,
    ConjugateGradient,
    Direct,
    /// Per-eigenmode tridiagonal solves of the same discrete system.
    Modal,
}

/// The finite-volume system of the extension problem on `X × [0, Y]`.
///
/// At an unknown node `(x, y_j)`, `j ≥ 1`, the equation (multiplied by
/// `-μ(x)`) reads
///
/// `m_j (W U_j)(x) + μ(x)[(β_{j-1/2} + β_{j+1/2}) U_j - β_{j-1/2} U_{j-1} - β_{j+1/2} U_{j+1}](x) = 0`
///
/// with `W = μ(-L)` the graph Laplacian matrix; `β_{N+1/2} = 0` encodes the
/// Neumann top. The row `j = 0` is the Dirichlet datum and is eliminated.
/// The resulting matrix is symmetric positive definite and an M-matrix.
pub struct ExtensionSystem<'a> {
    space: &'a DirichletSpace,
    mesh: YMesh,
    top: TopBc,
    /// Unknown levels are `1..=last`.
    last: usize,
}

impl<'a> ExtensionSystem<'a> {
    pub fn new(space: &'a DirichletSpace, mesh: YMesh, top: TopBc) -> Self {
        let last = match top {
            TopBc::Neumann => mesh.cells(),
            TopBc::ModalDirichlet => mesh.cells() - 1,
        };
        Self { space, mesh, top, last }
    }

    pub fn mesh(&self) -> &YMesh {
        &self.mesh
    }

    fn levels(&self) -> usize {
        self.last
    }

    fn beta_below(&self, j: usize) -> f64 {
        self.mesh.faces[j - 1]
    }

    fn beta_above(&self, j: usize) -> f64 {
        if j < self.mesh.cells() {
            self.mesh.faces[j]
        } else {
            0.0
        }
    }

    /// Matrix-vector product on the unknown levels (level `j` stored at
    /// offset `(j-1) n`).
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.space.len();
        let mu = self.space.measure();
        let mut wu = vec![0.0; n];
        for j in 1..=self.last {
            let k = j - 1;
            let uj = &u[k * n..(k + 1) * n];
            self.space.apply_laplacian_matrix(uj, &mut wu);
            let (bl, ba) = (self.beta_below(j), self.beta_above(j));
            let m = self.mesh.masses[j];
            for x in 0..n {
                let mut v = m * wu[x] + mu[x] * (bl + ba) * uj[x];
                if j > 1 {
                    v -= mu[x] * bl * u[(k - 1) * n + x];
                }
                if j < self.last {
                    v -= mu[x] * ba * u[(k + 1) * n + x];
                }
                out[k * n + x] = v;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.space.len();
        let mu = self.space.measure();
        let mut d = Vec::with_capacity(n * self.last);
        for j in 1..=self.last {
            let (bl, ba) = (self.beta_below(j), self.beta_above(j));
            for x in 0..n {
                d.push(self.mesh.masses[j] * self.space.degree(x) + mu[x] * (bl + ba));
            }
        }
        d
    }

    /// Right-hand side from the bottom datum `f` and, for a Dirichlet top,
    /// the top values.
    pub fn rhs(&self, f: &[f64], top_values: Option<&[f64]>) -> Vec<f64> {
        let n = self.space.len();
        let mu = self.space.measure();
        let mut r = vec![0.0; n * self.last];
        let b0 = self.mesh.faces[0];
        for x in 0..n {
            r[x] += mu[x] * b0 * f[x];
        }
        if let Some(t) = top_values {
            let k = self.last - 1;
            let bt = self.mesh.faces[self.mesh.cells() - 1];
            for x in 0..n {
                r[k * n + x] += mu[x] * bt * t[x];
            }
        }
        r
    }

    /// Block LU factorization of the block-tridiagonal matrix. Diagonal
    /// blocks are `m_j W + (β_{j-1/2}+β_{j+1/2}) diag μ`, off-diagonal blocks
    /// `-β diag μ`; the Schur complements stay symmetric positive definite.
    pub fn factor(&self) -> Result<BlockFactor> {
        let n = self.space.len();
        let mu = self.space.measure();
        let mut w = DMatrix::zeros(n, n);
        for x in 0..n {
            w[(x, x)] = self.space.degree(x);
            for &(y, c) in self.space.neighbors(x) {
                w[(x, y)] -= c;
            }
        }
        let mut factors = Vec::with_capacity(self.levels());
        let mut prev_inverse: Option<DMatrix<f64>> = None;
        for j in 1..=self.last {
            let (bl, ba) = (self.beta_below(j), self.beta_above(j));
            let mut block = &w * self.mesh.masses[j];
            for x in 0..n {
                block[(x, x)] += mu[x] * (bl + ba);
            }
            if let Some(inv) = &prev_inverse {
                // S_j = D_j - (β diag μ) S_{j-1}⁻¹ (β diag μ).
                for x in 0..n {
                    for y in 0..n {
                        block[(x, y)] -= bl * bl * mu[x] * mu[y] * inv[(x, y)];
                    }
                }
            }
            let chol = Cholesky::new(block)
                .ok_or_else(|| Error::SingularSystem(format!("extension block {j} is not positive definite")))?;
            prev_inverse = (j < self.last).then(|| chol.inverse());
            factors.push(chol);
        }
        Ok(BlockFactor {
            n,
            mu: mu.to_vec(),
            couplings: (1..self.last).map(|j| self.beta_above(j)).collect(),
            factors,
        })
    }
}

/// Factored extension matrix, reusable across right-hand sides.
pub struct BlockFactor {
    n: usize,
    mu: Vec<f64>,
    /// `β` between unknown levels `k` and `k+1`.
    couplings: Vec<f64>,
    factors: Vec<Cholesky<f64, Dyn>>,
}

impl BlockFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let levels = self.factors.len();
        // Forward: g_k = r_k + β μ ⊙ S_{k-1}⁻¹ g_{k-1}.
        let mut g: Vec<DVector<f64>> = Vec::with_capacity(levels);
        for k in 0..levels {
            let mut gk = DVector::from_column_slice(&rhs[k * n..(k + 1) * n]);
            if k > 0 {
                let z = self.factors[k - 1].solve(&g[k - 1]);
                let b = self.couplings[k - 1];
                for x in 0..n {
                    gk[x] += b * self.mu[x] * z[x];
                }
            }
            g.push(gk);
        }
        // Backward: U_k = S_k⁻¹ (g_k + β μ ⊙ U_{k+1}).
        let mut u = vec![0.0; n * levels];
        for k in (0..levels).rev() {
            let mut gk = g[k].clone();
            if k + 1 < levels {
                let b = self.couplings[k];
                for x in 0..n {
                    gk[x] += b * self.mu[x] * u[(k + 1) * n + x];
                }
            }
            let z = self.factors[k].solve(&gk);
            u[k * n..(k + 1) * n].copy_from_slice(z.as_slice());
        }
        u
    }
}

/// Solver for the extension problem with a fixed space, mesh, boundary
/// condition and method; factorizations are computed once and reused.
pub struct ExtensionSolver<'a> {
    system: ExtensionSystem<'a>,
    decomp: Option<&'a SpectralDecomposition>,
    s: f64,
    method: SolveMethod,
    factor: Option<BlockFactor>,
}

impl<'a> ExtensionSolver<'a> {
    pub fn new(
        space: &'a DirichletSpace,
        decomp: Option<&'a SpectralDecomposition>,
        mesh: YMesh,
        top: TopBc,
        method: SolveMethod,
    ) -> Result<Self> {
        let s = (1.0 - mesh.a) / 2.0;
        if top == TopBc::ModalDirichlet && decomp.is_none() {
            return Err(Error::BadTopBc(
                "modal Dirichlet top condition needs a spectral decomposition".into(),
            ));
        }
        if method == SolveMethod::Modal && decomp.is_none() {
            return Err(Error::InvalidInput("modal solve needs a spectral decomposition".into()));
        }
        if let Some(d) = decomp {
            check_len(space.len(), d.len())?;
        }
        let system = ExtensionSystem::new(space, mesh, top);
        let method = match method {
            SolveMethod::Auto if space.len() * system.mesh.cells() <= DIRECT_SOLVE_LIMIT => SolveMethod::Direct,
            SolveMethod::Auto => SolveMethod::ConjugateGradient,
            m => m,
        };
        let factor = if method == SolveMethod::Direct {
            Some(system.factor()?)
        } else {
            None
        };
        Ok(Self {
            system,
            decomp,
            s,
            method,
            factor,
        })
    }

    pub fn mesh(&self) -> &YMesh {
        &self.system.mesh
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    pub fn solve(&self, f: &[f64]) -> Result<ExtensionField> {
        let space = self.system.space;
        let n = space.len();
        check_len(n, f.len())?;
        let mesh = &self.system.mesh;
        let top_values = match self.system.top {
            TopBc::Neumann => None,
            TopBc::ModalDirichlet => {
                let d = self.decomp.expect("checked at construction");
                let y = mesh.top();
                Some(d.apply_function(|l| poisson_multiplier(self.s, l, y), f)?)
            }
        };
        let unknowns = match self.method {
            SolveMethod::Modal => self.solve_modal(f, top_values.is_some())?,
            _ => {
                let rhs = self.system.rhs(f, top_values.as_deref());
                match &self.factor {
                    Some(fac) => fac.solve(&rhs),
                    None => {
                        let diag = self.system.diagonal();
                        let out = conjugate_gradient(
                            |u, o| self.system.apply(u, o),
                            &diag,
                            &rhs,
                            CG_TOLERANCE,
                            20 * rhs.len().max(100),
                        )?;
                        out.solution
                    }
                }
            }
        };
        let mut values = Vec::with_capacity(n * (mesh.cells() + 1));
        values.extend_from_slice(f);
        values.extend_from_slice(&unknowns);
        if let Some(t) = top_values {
            values.extend_from_slice(&t);
        }
        ExtensionField::new(self.s, mesh.nodes.clone(), n, values, Provenance::PdeSolve)
    }

    /// Same discrete system diagonalized by the eigenbasis of `-L`: for each
    /// mode a tridiagonal system in `j` with diagonal
    /// `m_j λ + β_{j-1/2} + β_{j+1/2}`.
    fn solve_modal(&self, f: &[f64], dirichlet_top: bool) -> Result<Vec<f64>> {
        let d = self.decomp.expect("checked at construction");
        let n = d.len();
        let mesh = &self.system.mesh;
        let levels = self.system.levels();
        let coeffs = d.project(f)?;
        let mut modal = vec![0.0; n * levels];
        for (i, (&c, &l)) in coeffs.iter().zip(d.eigenvalues()).enumerate() {
            let mut diag: Vec<f64> = (1..=levels)
                .map(|j| mesh.masses[j] * l + self.system.beta_below(j) + self.system.beta_above(j))
                .collect();
            let off: Vec<f64> = (1..levels).map(|j| -self.system.beta_above(j)).collect();
            let mut r = vec![0.0; levels];
            r[0] = mesh.faces[0] * c;
            if dirichlet_top {
                r[levels - 1] += mesh.faces[mesh.cells() - 1] * c * poisson_multiplier(self.s, l, mesh.top());
            }
            // Thomas algorithm.
            for k in 1..levels {
                let w = off[k - 1] / diag[k - 1];
                diag[k] -= w * off[k - 1];
                r[k] -= w * r[k - 1];
            }
            let mut u = vec![0.0; levels];
            u[levels - 1] = r[levels - 1] / diag[levels - 1];
            for k in (0..levels - 1).rev() {
                u[k] = (r[k] - off[k] * u[k + 1]) / diag[k];
            }
            for k in 0..levels {
                modal[k * n + i] = u[k];
            }
        }
        let mut out = Vec::with_capacity(n * levels);
        for k in 0..levels {
            out.extend(d.synthesize(&modal[k * n..(k + 1) * n])?);
        }
        Ok(out)
    }
}

/// One-shot solve of the extension problem.
pub fn solve_extension_pde(
    space: &DirichletSpace,
    decomp: Option<&SpectralDecomposition>,
    f: &[f64],
    mesh: YMesh,
    top: TopBc,
    method: SolveMethod,
) -> Result<ExtensionField> {
    ExtensionSolver::new(space, decomp, mesh, top, method)?.solve(f)
}
