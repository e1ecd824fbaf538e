use serde::{Deserialize, Serialize};

use super::field::ExtensionField;
use super::mesh::{build_graded_mesh, default_grading, YMesh};
use super::solver::{ExtensionSolver, SolveMethod, TopBc};
use crate::dirichlet::{DirichletSpace, SpectralDecomposition};
use crate::error::{check_len, check_s, Error, Result};
use crate::linalg::norm_inf;
use crate::special::dtn_constant;

/// Multiple of `1/√λ_gap` used as the default truncation height; the
/// slowest mode has decayed by `e^{-12}` there.
pub const DEFAULT_HEIGHT_FACTOR: f64 = 12.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceOptions {
    pub cells: usize,
    /// Truncation height; `None` means `12/√λ_gap`.
    pub height: Option<f64>,
    /// Mesh grading; `None` means [`default_grading`].
    pub grading: Option<f64>,
    pub top: TopBc,
    pub method: SolveMethod,
    /// Largest accepted relative gap between the fine-mesh trace and the
    /// extrapolated one.
    pub tolerance: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            cells: 256,
            height: None,
            grading: None,
            top: TopBc::Neumann,
            method: SolveMethod::Auto,
            tolerance: 5e-2,
        }
    }
}

impl TraceOptions {
    pub fn mesh(&self, s: f64, decomp: Option<&SpectralDecomposition>) -> Result<YMesh> {
        check_s(s)?;
        let height = match self.height {
            Some(h) => h,
            None => default_height(decomp)?,
        };
        build_graded_mesh(
            height,
            self.cells,
            self.grading.unwrap_or_else(|| default_grading(s)),
            1.0 - 2.0 * s,
        )
    }
}

/// `12/√λ_gap`; needs the spectrum.
pub fn default_height(decomp: Option<&SpectralDecomposition>) -> Result<f64> {
    let d = decomp.ok_or_else(|| Error::BadMeshParams("automatic height needs a spectral decomposition".into()))?;
    let gap = d.spectral_gap().unwrap_or(1.0);
    Ok(DEFAULT_HEIGHT_FACTOR / gap.sqrt())
}

/// `-C_s lim_{y→0} y^a ∂_y U` from the first cell of a PDE field.
///
/// Integrating the equation `∂_y(y^a ∂_y U) = -y^a LU` over the bottom cell
/// `[0, y_{1/2}]` gives `lim y^a U_y = β_{1/2}(U_1 - U_0) + m_0 Lf` up to the
/// variation of `LU` inside the cell.
pub fn first_cell_trace(space: &DirichletSpace, field: &ExtensionField) -> Result<Vec<f64>> {
    check_len(space.len(), field.n)?;
    if field.levels() < 2 {
        return Err(Error::BadMeshParams("field needs at least two levels".into()));
    }
    let mesh = YMesh::from_nodes(field.ys.clone(), field.a())?;
    let f = field.level(0);
    let lf = space.apply_generator(f)?;
    let cs = dtn_constant(field.s)?;
    let (b, m0) = (mesh.faces[0], mesh.masses[0]);
    Ok((0..space.len())
        .map(|x| -cs * (b * (field.get(x, 1) - f[x]) + m0 * lf[x]))
        .collect())
}

/// Trace on two nested meshes and its Richardson extrapolation.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEstimate {
    pub values: Vec<f64>,
    pub fine: Vec<f64>,
    pub coarse: Vec<f64>,
    /// `‖values - fine‖_∞ / ‖values‖_∞`.
    pub disagreement: f64,
}

/// PDE-based Dirichlet-to-Neumann solver: factors the extension system on
/// the mesh with `N` cells and on its nested half, once.
pub struct TraceSolver<'a> {
    space: &'a DirichletSpace,
    fine: ExtensionSolver<'a>,
    coarse: ExtensionSolver<'a>,
    tolerance: f64,
}

impl<'a> TraceSolver<'a> {
    pub fn new(
        space: &'a DirichletSpace,
        decomp: Option<&'a SpectralDecomposition>,
        s: f64,
        opts: &TraceOptions,
    ) -> Result<Self> {
        let mesh = opts.mesh(s, decomp)?;
        let coarse_mesh = mesh.coarsened()?;
        Ok(Self {
            space,
            fine: ExtensionSolver::new(space, decomp, mesh, opts.top, opts.method)?,
            coarse: ExtensionSolver::new(space, decomp, coarse_mesh, opts.top, opts.method)?,
            tolerance: opts.tolerance,
        })
    }

    pub fn fine_solver(&self) -> &ExtensionSolver<'a> {
        &self.fine
    }

    /// The bottom-cell flux is second-order in the mesh width, so
    /// `T ≈ (4 T_N - T_{N/2}) / 3`.
    pub fn trace(&self, f: &[f64]) -> Result<TraceEstimate> {
        let fine = first_cell_trace(self.space, &self.fine.solve(f)?)?;
        let coarse = first_cell_trace(self.space, &self.coarse.solve(f)?)?;
        let values: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
        let scale = norm_inf(&values);
        let gap = fine.iter().zip(&values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let disagreement = if scale > 0.0 { gap / scale } else { gap };
        if disagreement > self.tolerance {
            return Err(Error::MeshTooCoarse {
                disagreement,
                tolerance: self.tolerance,
            });
        }
        Ok(TraceEstimate {
            values,
            fine,
            coarse,
            disagreement,
        })
    }
}

/// `(-L)^s f` from the weighted Neumann trace of the discrete extension.
pub fn neumann_trace(
    space: &DirichletSpace,
    decomp: Option<&SpectralDecomposition>,
    s: f64,
    f: &[f64],
    opts: &TraceOptions,
) -> Result<TraceEstimate> {
    TraceSolver::new(space, decomp, s, opts)?.trace(f)
}

/// Discrete form `E_a(U, h) = Σ_j m_j E(U_j, h_j) + Σ_x μ(x) Σ_j β_{j+1/2} ΔU Δh`
/// on the field's mesh.
pub fn extension_form(space: &DirichletSpace, field: &ExtensionField, h: &[f64]) -> Result<f64> {
    let n = space.len();
    check_len(n, field.n)?;
    check_len(field.values().len(), h.len())?;
    let mesh = YMesh::from_nodes(field.ys.clone(), field.a())?;
    let mu = space.measure();
    let mut total = 0.0;
    let mut wu = vec![0.0; n];
    for j in 0..field.levels() {
        space.apply_laplacian_matrix(field.level(j), &mut wu);
        let hj = &h[j * n..(j + 1) * n];
        total += mesh.masses[j] * wu.iter().zip(hj).map(|(a, b)| a * b).sum::<f64>();
    }
    for j in 0..mesh.cells() {
        let b = mesh.faces[j];
        for x in 0..n {
            let du = field.get(x, j + 1) - field.get(x, j);
            let dh = h[(j + 1) * n + x] - h[j * n + x];
            total += mu[x] * b * du * dh;
        }
    }
    Ok(total)
}

/// `max_h |E_a(U, h)|` over test functions that vanish on the bottom and
/// top levels.
pub fn weak_residual(space: &DirichletSpace, field: &ExtensionField, tests: &[Vec<f64>]) -> Result<f64> {
    let n = field.n;
    let top = field.levels() - 1;
    let mut worst = 0.0_f64;
    for (k, h) in tests.iter().enumerate() {
        check_len(field.values().len(), h.len())?;
        let boundary = h[..n].iter().chain(&h[top * n..]).any(|v| *v != 0.0);
        if boundary {
            return Err(Error::TestFunctionSupportViolation(format!(
                "test function {k} is nonzero on the bottom or top level"
            )));
        }
        worst = worst.max(extension_form(space, field, h)?.abs());
    }
    Ok(worst)
}

/// `E_a(U, δ_{(x, y_j)})` for every interior node, i.e. the residual of
/// every interior row of the discrete equation; level-major like the field.
pub fn hat_residuals(space: &DirichletSpace, field: &ExtensionField) -> Result<Vec<f64>> {
    let n = space.len();
    check_len(n, field.n)?;
    let mesh = YMesh::from_nodes(field.ys.clone(), field.a())?;
    let mu = space.measure();
    let mut out = Vec::with_capacity(n * field.levels().saturating_sub(2));
    let mut wu = vec![0.0; n];
    for j in 1..field.levels() - 1 {
        space.apply_laplacian_matrix(field.level(j), &mut wu);
        let (bl, ba) = (mesh.faces[j - 1], mesh.faces[j]);
        for x in 0..n {
            let u = field.get(x, j);
            out.push(
                mesh.masses[j] * wu[x] + mu[x] * (bl * (u - field.get(x, j - 1)) + ba * (u - field.get(x, j + 1))),
            );
        }
    }
    Ok(out)
}
