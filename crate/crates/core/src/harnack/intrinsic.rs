use serde_json::json;

use super::product::ProductSpace;
use super::report::{ExperimentReport, TrialRow};
use crate::dirichlet::energy_measure;
use crate::error::{Error, Result};

/// Scales `u` so that its energy density `Γ_a(u, u)` is at most 1 everywhere.
fn normalize(product: &ProductSpace, mut u: Vec<f64>) -> Result<Vec<f64>> {
    let peak = energy_measure(&product.space, &u, &u)?
        .density
        .into_iter()
        .fold(0.0_f64, f64::max);
    if peak > 1.0 {
        let c = peak.sqrt().recip();
        u.iter_mut().for_each(|v| *v *= c);
        let check = energy_measure(&product.space, &u, &u)?
            .density
            .into_iter()
            .fold(0.0_f64, f64::max);
        if check > 1.0 + 1e-12 {
            return Err(Error::InfeasibleCompetitor { density: check });
        }
    }
    Ok(u)
}

/// Bounds on the intrinsic metric `d(z, w) = sup{F(z) - F(w) : Γ_a(F, F) ≤ 1}`
/// of the product form for each pair.
///
/// The lower bound maximizes `|F(z) - F(w)|` over the competitors
/// `F = ½(f ± y)`, `f` and `y`, where `f` is the base distance from the base
/// point of `z` or of `w` and every competitor is rescaled to be feasible.
/// The product metric `d_a(z, w)` is reported as the comparison value and
/// each trial records `d_a / lower`.
pub fn intrinsic_metric_bounds(product: &ProductSpace, pairs: &[(usize, usize)]) -> Result<ExperimentReport> {
    let n = product.len();
    let m = product.levels();
    let base = &product.base;
    let height = product.height();
    let mut rows = Vec::with_capacity(pairs.len());
    let mut worst_lower = f64::INFINITY;
    for &(z, w) in pairs {
        if z >= n || w >= n {
            return Err(Error::UnknownVertex(format!("index {}", z.max(w))));
        }
        let mut competitors = vec![normalize(product, height.clone())?];
        for anchor in [z / m, w / m] {
            let f: Vec<f64> = (0..base.len()).map(|x| base.dist(anchor, x)).collect();
            let lifted = product.lift(&f)?;
            competitors.push(normalize(product, lifted.clone())?);
            for sign in [1.0, -1.0] {
                let mixed = lifted.iter().zip(&height).map(|(f, y)| 0.5 * (f + sign * y)).collect();
                competitors.push(normalize(product, mixed)?);
            }
        }
        let lower = competitors.iter().map(|f| (f[z] - f[w]).abs()).fold(0.0, f64::max);
        let upper = product.space.dist(z, w);
        let ratio = if upper == 0.0 && lower == 0.0 {
            1.0
        } else {
            upper / lower
        };
        if upper > 0.0 {
            worst_lower = worst_lower.min(lower / upper);
        }
        rows.push(TrialRow {
            label: format!("{}~{}", product.space.ids()[z], product.space.ids()[w]),
            value: ratio,
        });
    }
    Ok(ExperimentReport::new(
        "intrinsic-metric",
        json!({ "vertices": n, "levels": m, "pairs": pairs.len(), "s": product.s }),
        rows,
    )
    .with_bound("sandwich ratio d_a / lower bound")
    .with_metric("min_lower_over_product_metric", worst_lower))
}
