use std::sync::Arc;

use crate::dirichlet::{dirichlet_form, DirichletSpace, Metric};
use crate::error::{check_len, check_s, Error, Result};
use crate::extension::{build_graded_mesh, ExtensionField, YMesh};

/// `X × [-Y, Y]` with measure `μ × ν_a`, `ν_a = |y|^a dy`, `a = 1 - 2s`,
/// discretized on a mesh symmetric about 0.
///
/// Vertex `(x, j)` has index `x * levels + j`; level `N` (the middle one) is
/// `y = 0`. Horizontal edges carry `w_xx' m_j`, vertical edges `μ(x) β`, with
/// the cell masses `m_j` and face coefficients `β` of the half-line
/// extension mesh mirrored to negative `y`. The metric is
/// `d_a² = d² + |Δy|²`.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    pub s: f64,
    pub base: Arc<DirichletSpace>,
    pub half_mesh: YMesh,
    pub y_nodes: Vec<f64>,
    pub y_masses: Vec<f64>,
    pub y_faces: Vec<f64>,
    pub space: DirichletSpace,
}

/// Product over a uniform mesh with `cells` cells on each side of 0.
pub fn build_product_space(base: Arc<DirichletSpace>, s: f64, top: f64, cells: usize) -> Result<ProductSpace> {
    check_s(s)?;
    let mesh = build_graded_mesh(top, cells, 1.0, 1.0 - 2.0 * s)?;
    ProductSpace::from_half_mesh(base, s, mesh)
}

impl ProductSpace {
    pub fn from_half_mesh(base: Arc<DirichletSpace>, s: f64, mesh: YMesh) -> Result<Self> {
        check_s(s)?;
        if (mesh.a - (1.0 - 2.0 * s)).abs() > 1e-12 {
            return Err(Error::BadMeshParams(format!(
                "mesh weight exponent {} does not match a = 1 - 2s = {}",
                mesh.a,
                1.0 - 2.0 * s
            )));
        }
        let n = mesh.cells();
        let mut y_nodes: Vec<f64> = mesh.nodes[1..].iter().rev().map(|y| -y).collect();
        y_nodes.extend_from_slice(&mesh.nodes);
        let mut y_masses: Vec<f64> = mesh.masses[1..].iter().rev().copied().collect();
        y_masses.push(2.0 * mesh.masses[0]);
        y_masses.extend_from_slice(&mesh.masses[1..]);
        let mut y_faces: Vec<f64> = mesh.faces.iter().rev().copied().collect();
        y_faces.extend_from_slice(&mesh.faces);

        let levels = 2 * n + 1;
        let ids = (0..levels).map(|j| format!("y{j}")).collect();
        let edges: Vec<_> = (0..levels - 1).map(|j| (j, j + 1, y_faces[j])).collect();
        let line = DirichletSpace::from_parts(
            ids,
            y_masses.clone(),
            &edges,
            Some(Metric::Dense {
                n: levels,
                values: (0..levels * levels)
                    .map(|k| (y_nodes[k / levels] - y_nodes[k % levels]).abs())
                    .collect(),
            }),
        )?;
        let metric = Metric::Product {
            base: Box::new(base.metric().clone()),
            coords: y_nodes.clone(),
        };
        let space = DirichletSpace::cartesian_product(&base, &line, Some(metric))?;
        Ok(Self {
            s,
            base,
            half_mesh: mesh,
            y_nodes,
            y_masses,
            y_faces,
            space,
        })
    }

    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    /// Number of y-levels, `2N + 1`.
    pub fn levels(&self) -> usize {
        self.y_nodes.len()
    }

    /// Level of `y = 0`.
    pub fn center_level(&self) -> usize {
        self.half_mesh.cells()
    }

    pub fn index(&self, x: usize, j: usize) -> usize {
        x * self.levels() + j
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `ν_a([-Y, Y])` as carried by the mesh.
    pub fn y_total_mass(&self) -> f64 {
        self.y_masses.iter().sum()
    }

    /// `E_a(u, v)` summed over the edges of the product graph.
    pub fn form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        dirichlet_form(&self.space, u, v)
    }

    /// `(Σ_j m_j E(u(·, y_j)), Σ_x μ(x) Σ_faces β |Δ_y u|²)`, assembled level by
    /// level and fibre by fibre; the sum equals `E_a(u, u)`.
    pub fn form_parts(&self, u: &[f64]) -> Result<(f64, f64)> {
        check_len(self.len(), u.len())?;
        let m = self.levels();
        let nb = self.base.len();
        let mut level = vec![0.0; nb];
        let mut horizontal = 0.0;
        for j in 0..m {
            for (x, v) in level.iter_mut().enumerate() {
                *v = u[x * m + j];
            }
            horizontal += self.y_masses[j] * dirichlet_form(&self.base, &level, &level)?;
        }
        let mut vertical = 0.0;
        for x in 0..nb {
            let fibre = &u[x * m..(x + 1) * m];
            let sum: f64 = fibre
                .windows(2)
                .zip(&self.y_faces)
                .map(|(p, b)| b * (p[1] - p[0]) * (p[1] - p[0]))
                .sum();
            vertical += self.base.measure()[x] * sum;
        }
        Ok((horizontal, vertical))
    }

    /// `Ũ(x, y) = U(x, |y|)` for a half-line field on this product's mesh.
    pub fn even_extension(&self, field: &ExtensionField) -> Result<Vec<f64>> {
        check_len(self.base.len(), field.n)?;
        let nodes = &self.half_mesh.nodes;
        if field.ys.len() != nodes.len()
            || field
                .ys
                .iter()
                .zip(nodes)
                .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::BadMeshParams("field levels differ from the product mesh".into()));
        }
        let m = self.levels();
        let c = self.center_level();
        let mut out = vec![0.0; self.len()];
        for x in 0..self.base.len() {
            for j in 0..m {
                out[x * m + j] = field.get(x, j.abs_diff(c));
            }
        }
        Ok(out)
    }

    /// Lifts `f` on the base to `f(x)` at every level.
    pub fn lift(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.base.len(), f.len())?;
        let m = self.levels();
        Ok((0..self.len()).map(|k| f[k / m]).collect())
    }

    /// The coordinate function `y`.
    pub fn height(&self) -> Vec<f64> {
        let m = self.levels();
        (0..self.len()).map(|k| self.y_nodes[k % m]).collect()
    }
}
