use serde::Serialize;

use super::space::DirichletSpace;
use crate::error::{check_len, Result};

/// Per-vertex carré-du-champ density
/// `Γ(u,v)(x) = (2μ(x))⁻¹ Σ_y w_xy (u(x)-u(y))(v(x)-v(y))`.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyMeasure {
    pub density: Vec<f64>,
}

impl EnergyMeasure {
    /// `Σ_x Γ(u,v)(x) μ(x)`, which is `E(u, v)`.
    pub fn total(&self, space: &DirichletSpace) -> f64 {
        self.density.iter().zip(space.measure()).map(|(g, m)| g * m).sum()
    }
}

/// `E(u,v) = ½ Σ_{x,y} w_xy (u(x)-u(y))(v(x)-v(y))`.
pub fn dirichlet_form(space: &DirichletSpace, u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(space.len(), u.len())?;
    check_len(space.len(), v.len())?;
    let mut sum = 0.0;
    for (x, y, w) in space.edges() {
        sum += w * (u[x] - u[y]) * (v[x] - v[y]);
    }
    Ok(sum)
}

pub fn energy_measure(space: &DirichletSpace, u: &[f64], v: &[f64]) -> Result<EnergyMeasure> {
    check_len(space.len(), u.len())?;
    check_len(space.len(), v.len())?;
    let density = (0..space.len())
        .map(|x| {
            let s: f64 = space
                .neighbors(x)
                .iter()
                .map(|&(y, w)| w * (u[x] - u[y]) * (v[x] - v[y]))
                .sum();
            s / (2.0 * space.measure()[x])
        })
        .collect();
    Ok(EnergyMeasure { density })
}
