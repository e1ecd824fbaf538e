use std::sync::Arc;

use serde_json::json;

use super::nonlocal::NonlocalDirichlet;
use super::product::ProductSpace;
use super::report::{ExperimentReport, TrialRow};
use crate::dirichlet::{dirichlet_form, SpectralDecomposition};
use crate::error::{check_len, Error, Result};
use crate::extension::{
    build_graded_mesh, default_grading, default_height, solve_extension_pde, ExtensionField, SolveMethod, TopBc,
};
use crate::linalg::norm_inf;

/// `E_a(Ũ, h)` for each test function `h`, where `Ũ(x, y) = U(x, |y|)`.
///
/// Tests must be supported in `inside × (-Y, Y)`; touching another base
/// vertex or the top level is a `SupportViolation`.
pub fn even_extension_check(
    product: &ProductSpace,
    field: &ExtensionField,
    inside: &[usize],
    tests: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let even = product.even_extension(field)?;
    let m = product.levels();
    let mut allowed = vec![false; product.base.len()];
    for &x in inside {
        allowed[x] = true;
    }
    tests
        .iter()
        .map(|h| {
            check_len(product.len(), h.len())?;
            if let Some(k) = (0..h.len()).find(|&k| h[k] != 0.0 && (!allowed[k / m] || k % m == 0 || k % m == m - 1)) {
                return Err(Error::SupportViolation(format!(
                    "test function is nonzero at {}",
                    product.space.ids()[k]
                )));
            }
            dirichlet_form(&product.space, &even, h)
        })
        .collect()
}

/// `|E_a(Ũ, h_p)| / (E_a(h_p, h_p) ‖Ũ‖_∞)` for the hat function `h_p` of
/// every product vertex `p` over `inside` below the top level.
pub fn hat_residuals(product: &ProductSpace, field: &ExtensionField, inside: &[usize]) -> Result<Vec<(usize, f64)>> {
    let even = product.even_extension(field)?;
    let scale = norm_inf(&even).max(f64::MIN_POSITIVE);
    let m = product.levels();
    let mut out = Vec::new();
    for &x in inside {
        for j in 1..m - 1 {
            let p = product.index(x, j);
            let (mut flux, mut degree) = (0.0, 0.0);
            for &(q, w) in product.space.neighbors(p) {
                flux += w * (even[p] - even[q]);
                degree += w;
            }
            out.push((p, flux.abs() / (degree * scale)));
        }
    }
    Ok(out)
}

/// Even-extension study on a sequence of meshes.
///
/// `f` solves `(-L)^s f = 0` in `inside` with the given exterior data, so the
/// Neumann trace of its extension vanishes there and `Ũ` should be
/// `E_a`-harmonic across `y = 0`. For each cell count the extension is
/// solved, reflected, and the largest scaled hat residual over
/// `inside × (-Y, Y)` is recorded in the refinement trace; the trial table
/// holds the per-hat residuals on the finest mesh.
pub fn even_extension_study(
    decomp: &SpectralDecomposition,
    s: f64,
    inside: &[usize],
    exterior: &[f64],
    cells: &[usize],
) -> Result<ExperimentReport> {
    if cells.is_empty() {
        return Err(Error::InvalidInput("no mesh sizes given".into()));
    }
    let f = NonlocalDirichlet::new(decomp, s, inside)?.solve(exterior)?;
    let space: Arc<_> = decomp.space().clone();
    let top = default_height(Some(decomp))?;
    let a = 1.0 - 2.0 * s;
    let mut trace = Vec::new();
    let mut last = Vec::new();
    for &n in cells {
        let mesh = build_graded_mesh(top, n, default_grading(s), a)?;
        let field = solve_extension_pde(
            &space,
            Some(decomp),
            &f,
            mesh.clone(),
            TopBc::Neumann,
            SolveMethod::Auto,
        )?;
        let product = ProductSpace::from_half_mesh(space.clone(), s, mesh)?;
        let residuals = hat_residuals(&product, &field, inside)?;
        let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
        trace.push((n, worst));
        last = residuals
            .into_iter()
            .map(|(p, r)| TrialRow {
                label: product.space.ids()[p].clone(),
                value: r,
            })
            .collect();
    }
    let ratio = trace.windows(2).map(|w| w[1].1 / w[0].1).fold(0.0, f64::max);
    let mut report = ExperimentReport::new(
        "even-extension",
        json!({ "vertices": space.len(), "s": s, "height": top, "cells": cells, "interior": inside.len() }),
        last,
    )
    .with_bound("max scaled residual")
    .with_metric("worst_refinement_ratio", ratio);
    for (n, r) in trace {
        report.push_refinement(format!("N={n}"), r);
    }
    Ok(report)
}
