use std::sync::Arc;

use fraclab::dirichlet::{DirichletSpace, SpectralDecomposition};
use fraclab::extension::{
    build_graded_mesh, default_grading, extension_form, hat_residuals, neumann_trace, solve_extension_pde,
    weak_residual, ExtensionSolver, SolveMethod, TopBc, TraceOptions,
};
use fraclab::fractional::{frac_spectral, poisson_extend, poisson_multiplier};
use fraclab::linalg::{max_relative_error, norm_inf};
use fraclab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decomp(space: DirichletSpace) -> SpectralDecomposition {
    SpectralDecomposition::compute(Arc::new(space)).unwrap()
}

fn random_f(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn constant_datum_gives_constant_field() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    let mesh = build_graded_mesh(20.0, 64, 2.0, 0.4).unwrap();
    let field = solve_extension_pde(d.space(), None, &[1.5; 10], mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
    assert!(field.values().iter().all(|v| (v - 1.5).abs() < 1e-12));
}

#[test]
fn eigenmode_field_matches_poisson_multiplier() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    for &s in &[0.25, 0.5, 0.75] {
        for i in [1, 5, 9] {
            let l = d.eigenvalues()[i];
            let phi = d.vector(i).to_vec();
            let mesh = build_graded_mesh(12.0 / l.sqrt(), 256, default_grading(s), 1.0 - 2.0 * s).unwrap();
            let field =
                solve_extension_pde(d.space(), Some(&d), &phi, mesh, TopBc::Neumann, SolveMethod::Auto).unwrap();
            let scale = norm_inf(&phi);
            let mut worst = 0.0_f64;
            let tol = if s == 0.5 { 1e-4 } else { 1e-3 };
            for (j, &y) in field.ys.iter().enumerate() {
                let m = poisson_multiplier(s, l, y);
                for (x, p) in phi.iter().enumerate() {
                    worst = worst.max((field.get(x, j) - m * p).abs() / scale);
                }
            }
            assert!(worst <= tol, "s={s} mode {i}: {worst}");
        }
    }
}

#[test]
fn two_point_trace() {
    let d = decomp(DirichletSpace::path(2).unwrap());
    let est = neumann_trace(d.space(), Some(&d), 0.5, &[1.0, -1.0], &TraceOptions::default()).unwrap();
    let r2 = 2f64.sqrt();
    assert!(max_relative_error(&est.values, &[r2, -r2]) < 1e-4);
}

#[test]
fn trace_is_second_order() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    let f = random_f(10, 3);
    let exact = frac_spectral(&d, 0.5, &f).unwrap();
    let err = |cells: usize| {
        let opts = TraceOptions {
            cells,
            ..TraceOptions::default()
        };
        let mesh = opts.mesh(0.5, Some(&d)).unwrap();
        let field = solve_extension_pde(d.space(), Some(&d), &f, mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
        let t = fraclab::extension::first_cell_trace(d.space(), &field).unwrap();
        max_relative_error(&t, &exact)
    };
    let (e1, e2) = (err(64), err(128));
    assert!(e1 / e2 >= 1.8, "{e1} / {e2}");
}

#[test]
fn trace_matches_spectral_on_fixture_spaces() {
    for space in [
        DirichletSpace::ring(10).unwrap(),
        DirichletSpace::path(32).unwrap(),
        DirichletSpace::grid(8, 8).unwrap(),
    ] {
        let d = decomp(space);
        for &s in &[0.25, 0.5, 0.75] {
            let f = random_f(d.len(), 11);
            let est = neumann_trace(d.space(), Some(&d), s, &f, &TraceOptions::default()).unwrap();
            let exact = frac_spectral(&d, s, &f).unwrap();
            let e = max_relative_error(&est.values, &exact);
            assert!(e <= 1e-3, "n={} s={s}: {e}", d.len());
        }
    }
}

#[test]
fn solvers_agree() {
    let d = decomp(DirichletSpace::grid(4, 5).unwrap());
    let f = random_f(20, 5);
    let mesh = build_graded_mesh(30.0, 64, 2.0, -0.3).unwrap();
    let direct = solve_extension_pde(
        d.space(),
        Some(&d),
        &f,
        mesh.clone(),
        TopBc::Neumann,
        SolveMethod::Direct,
    )
    .unwrap();
    let cg = solve_extension_pde(
        d.space(),
        Some(&d),
        &f,
        mesh.clone(),
        TopBc::Neumann,
        SolveMethod::ConjugateGradient,
    )
    .unwrap();
    let modal = solve_extension_pde(d.space(), Some(&d), &f, mesh, TopBc::Neumann, SolveMethod::Modal).unwrap();
    assert!(max_relative_error(cg.values(), direct.values()) < 1e-6);
    assert!(max_relative_error(modal.values(), direct.values()) < 1e-10);
}

#[test]
fn projection_commutes_with_solve() {
    let d = decomp(DirichletSpace::ring(12).unwrap());
    let f = random_f(12, 8);
    let mesh = build_graded_mesh(25.0, 64, 2.0, 0.2).unwrap();
    let solver = ExtensionSolver::new(d.space(), Some(&d), mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
    let full = solver.solve(&f).unwrap();
    let i = 3;
    let ci = d.project(&f).unwrap()[i];
    let part: Vec<f64> = d.vector(i).iter().map(|v| v * ci).collect();
    let mode = solver.solve(&part).unwrap();
    for j in 0..full.levels() {
        let projected = d.project(full.level(j)).unwrap()[i];
        let direct = d.project(mode.level(j)).unwrap()[i];
        assert!((projected - direct).abs() < 1e-10);
    }
}

#[test]
fn maximum_principle_and_energy_minimality() {
    let d = decomp(DirichletSpace::grid(5, 5).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let f: Vec<f64> = (0..25).map(|_| rng.random_range(0.0..1.0)).collect();
    let mesh = build_graded_mesh(30.0, 64, 2.0, 0.5).unwrap();
    let field = solve_extension_pde(d.space(), Some(&d), &f, mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
    assert!(field.values().iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));

    let energy = |u: &fraclab::extension::ExtensionField| extension_form(d.space(), u, u.values()).unwrap();
    let base = energy(&field);
    for _ in 0..20 {
        let mut values = field.values().to_vec();
        for v in values.iter_mut().skip(25) {
            *v += rng.random_range(-0.01..0.01);
        }
        let other =
            fraclab::extension::ExtensionField::new(field.s, field.ys.clone(), 25, values, field.provenance).unwrap();
        assert!(energy(&other) >= base - 1e-12);
    }
}

#[test]
fn weak_residuals() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    let f = random_f(10, 2);
    let s = 0.4;
    let mesh = build_graded_mesh(40.0, 256, default_grading(s), 1.0 - 2.0 * s).unwrap();
    let field = solve_extension_pde(d.space(), Some(&d), &f, mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
    let r = hat_residuals(d.space(), &field).unwrap();
    assert!(norm_inf(&r) <= 1e-8 * norm_inf(field.values()));

    let zero = vec![vec![0.0; field.values().len()]];
    assert_eq!(weak_residual(d.space(), &field, &zero).unwrap(), 0.0);
    let mut bad = vec![0.0; field.values().len()];
    bad[0] = 1.0;
    assert!(matches!(
        weak_residual(d.space(), &field, &[bad]),
        Err(Error::TestFunctionSupportViolation(_))
    ));

    // The semi-analytic field is not the discrete solution; its residual
    // shrinks under refinement.
    let mut last = f64::INFINITY;
    for cells in [32, 64, 128] {
        let mesh = build_graded_mesh(40.0, cells, default_grading(s), 1.0 - 2.0 * s).unwrap();
        let semi = poisson_extend(&d, s, &f, &mesh.nodes).unwrap();
        let res = norm_inf(&hat_residuals(d.space(), &semi).unwrap());
        assert!(res > 0.0 && res < last, "{cells}: {res} vs {last}");
        last = res;
    }
}

#[test]
fn trace_consistency_between_routes() {
    let d = decomp(DirichletSpace::path(12).unwrap());
    let f = random_f(12, 9);
    for &s in &[0.3, 0.6] {
        let opts = TraceOptions::default();
        let mesh = opts.mesh(s, Some(&d)).unwrap();
        let semi = poisson_extend(&d, s, &f, &mesh.nodes).unwrap();
        let pde = solve_extension_pde(d.space(), Some(&d), &f, mesh, TopBc::Neumann, SolveMethod::Direct).unwrap();
        let a = fraclab::extension::first_cell_trace(d.space(), &semi).unwrap();
        let b = fraclab::extension::first_cell_trace(d.space(), &pde).unwrap();
        assert!(
            max_relative_error(&a, &b) <= 2e-3,
            "s={s}: {}",
            max_relative_error(&a, &b)
        );
    }
}

#[test]
fn modal_top_needs_spectrum() {
    let s = DirichletSpace::ring(6).unwrap();
    let mesh = build_graded_mesh(10.0, 16, 1.0, 0.0).unwrap();
    let r = solve_extension_pde(&s, None, &[0.0; 6], mesh, TopBc::ModalDirichlet, SolveMethod::Auto);
    assert!(matches!(r, Err(Error::BadTopBc(_))));
}

#[test]
fn modal_dirichlet_top_matches_semi_analytic() {
    let d = decomp(DirichletSpace::ring(8).unwrap());
    let f = random_f(8, 4);
    let s = 0.5;
    let mesh = build_graded_mesh(3.0, 256, 2.0, 0.0).unwrap();
    let field = solve_extension_pde(
        d.space(),
        Some(&d),
        &f,
        mesh.clone(),
        TopBc::ModalDirichlet,
        SolveMethod::Direct,
    )
    .unwrap();
    let semi = poisson_extend(&d, s, &f, &mesh.nodes).unwrap();
    assert!(max_relative_error(field.values(), semi.values()) < 1e-4);
}
