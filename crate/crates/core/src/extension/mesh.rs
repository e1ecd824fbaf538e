use serde::Serialize;

use crate::error::{Error, Result};

/// Graded mesh `0 = y_0 < … < y_N = Y` on the half-line with the cell masses
/// and face coefficients of the weighted measure `|y|^a dy`.
///
/// Dual cells are bounded by the midpoints `y_{j±1/2}`; the first cell is
/// `[0, y_{1/2}]` and the last `[y_{N-1/2}, Y]`.
#[derive(Clone, Debug, Serialize)]
pub struct YMesh {
    pub nodes: Vec<f64>,
    pub grading: f64,
    pub a: f64,
    /// `m_j = ∫_{cell j} |y|^a dy`.
    pub masses: Vec<f64>,
    /// `β_{j+1/2} = (∫_{y_j}^{y_{j+1}} |y|^{-a} dy)⁻¹`, one per interval.
    pub faces: Vec<f64>,
}

/// Grading `max(2, 1/(2s))`.
///
/// Uniform meshes (`γ = 1`) are too coarse at the bottom for `s ≥ 1/2`; the
/// quadratic floor keeps the first-cell flux second-order accurate for every
/// `s`, which the trace extrapolation relies on.
pub fn default_grading(s: f64) -> f64 {
    (1.0 / (2.0 * s)).max(2.0)
}

/// `y_j = Y (j/N)^γ`.
pub fn build_graded_mesh(top: f64, cells: usize, grading: f64, a: f64) -> Result<YMesh> {
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::BadMeshParams(format!("height Y = {top} must be positive")));
    }
    if cells < 8 {
        return Err(Error::BadMeshParams(format!("N = {cells} must be at least 8")));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::BadMeshParams(format!("grading {grading} must be at least 1")));
    }
    let nodes: Vec<f64> = (0..=cells)
        .map(|j| top * (j as f64 / cells as f64).powf(grading))
        .collect();
    let mut mesh = YMesh::from_nodes(nodes, a)?;
    mesh.grading = grading;
    Ok(mesh)
}

impl YMesh {
    /// Mesh data for arbitrary strictly increasing nodes starting at 0.
    pub fn from_nodes(nodes: Vec<f64>, a: f64) -> Result<Self> {
        if !(a > -1.0 && a < 1.0) {
            return Err(Error::BadMeshParams(format!("weight exponent a = {a} outside (-1, 1)")));
        }
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(Error::BadMeshParams(
                "mesh must start at 0 and have a positive cell".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::BadMeshParams("mesh nodes must be strictly increasing".into()));
        }
        let n = nodes.len() - 1;
        let weighted = |y: f64| y.powf(1.0 + a) / (1.0 + a);
        let mid = |j: usize| 0.5 * (nodes[j] + nodes[j + 1]);
        let masses = (0..=n)
            .map(|j| {
                let lo = if j == 0 { 0.0 } else { mid(j - 1) };
                let hi = if j == n { nodes[n] } else { mid(j) };
                weighted(hi) - weighted(lo)
            })
            .collect();
        let faces = (0..n)
            .map(|j| (1.0 - a) / (nodes[j + 1].powf(1.0 - a) - nodes[j].powf(1.0 - a)))
            .collect();
        Ok(Self {
            nodes,
            grading: f64::NAN,
            a,
            masses,
            faces,
        })
    }

    /// Number of cells `N`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn top(&self) -> f64 {
        self.nodes[self.cells()]
    }

    /// Every second node; for a graded mesh this is the graded mesh with
    /// `N/2` cells.
    pub fn coarsened(&self) -> Result<Self> {
        if !self.cells().is_multiple_of(2) {
            return Err(Error::BadMeshParams(format!(
                "cannot halve a mesh with an odd number of cells ({})",
                self.cells()
            )));
        }
        let nodes = self.nodes.iter().step_by(2).copied().collect();
        let mut out = Self::from_nodes(nodes, self.a)?;
        out.grading = self.grading;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫_lo^hi y^a dy` by Simpson's rule after `y = lo + (hi-lo) u^8`, which
    /// makes the integrand smooth at 0 for every `a > -1`.
    fn numeric_mass(lo: f64, hi: f64, a: f64) -> f64 {
        let k = 8.0;
        let g = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let y = lo + (hi - lo) * u.powf(k);
            y.powf(a) * (hi - lo) * k * u.powf(k - 1.0)
        };
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut sum = g(0.0) + g(1.0);
        for i in 1..n {
            sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    #[test]
    fn uniform_and_formula() {
        let m = build_graded_mesh(1.0, 8, 1.0, 0.0).unwrap();
        for (j, y) in m.nodes.iter().enumerate() {
            assert!((y - j as f64 / 8.0).abs() < 1e-15);
        }
        let g = build_graded_mesh(1.0, 8, 2.0, 0.0).unwrap();
        assert_eq!(g.nodes[4], 0.25);
    }

    #[test]
    fn masses_telescope_and_match_quadrature() {
        for &a in &[-0.5, 0.0, 0.4, 0.9] {
            let m = build_graded_mesh(3.0, 16, 2.0, a).unwrap();
            let total: f64 = m.masses.iter().sum();
            assert!((total - 3f64.powf(1.0 + a) / (1.0 + a)).abs() < 1e-12);
            let mids: Vec<f64> = m.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            for j in 0..=16 {
                let lo = if j == 0 { 0.0 } else { mids[j - 1] };
                let hi = if j == 16 { 3.0 } else { mids[j] };
                assert!((m.masses[j] - numeric_mass(lo, hi, a)).abs() < 1e-12, "a={a} j={j}");
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(
            build_graded_mesh(0.0, 16, 1.0, 0.0),
            Err(Error::BadMeshParams(_))
        ));
        assert!(matches!(
            build_graded_mesh(1.0, 4, 1.0, 0.0),
            Err(Error::BadMeshParams(_))
        ));
        assert!(matches!(
            build_graded_mesh(1.0, 16, 0.5, 0.0),
            Err(Error::BadMeshParams(_))
        ));
        assert!(matches!(
            build_graded_mesh(1.0, 16, 1.0, 1.0),
            Err(Error::BadMeshParams(_))
        ));
    }

    #[test]
    fn coarsening_is_nested() {
        let m = build_graded_mesh(2.0, 32, 2.0, 0.3).unwrap();
        let c = m.coarsened().unwrap();
        let direct = build_graded_mesh(2.0, 16, 2.0, 0.3).unwrap();
        for (x, y) in c.nodes.iter().zip(&direct.nodes) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
