use std::f64::consts::PI;
use std::sync::Arc;

use fraclab::dirichlet::{dirichlet_form, energy_measure, DirichletSpace, SpectralDecomposition};
use fraclab::fractional::frac_spectral;
use fraclab::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decomp(space: DirichletSpace) -> SpectralDecomposition {
    SpectralDecomposition::compute(Arc::new(space)).unwrap()
}

/// Connected random graph: a spanning path plus extra random edges.
fn random_space(seed: u64, n: usize) -> DirichletSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..4.0)).collect();
    let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i - 1, i, rng.random_range(0.1..3.0))).collect();
    for _ in 0..n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u.abs_diff(v) > 1 {
            edges.push((u, v, rng.random_range(0.1..3.0)));
        }
    }
    edges.sort_by_key(|e| (e.0.min(e.1), e.0.max(e.1)));
    edges.dedup_by_key(|e| (e.0.min(e.1), e.0.max(e.1)));
    DirichletSpace::from_parts(ids, mu, &edges, None).unwrap()
}

fn random_f(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn cycle_spectrum_is_circulant() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    let mut expected: Vec<f64> = (0..10)
        .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / 10.0).cos())
        .collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in d.eigenvalues().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn two_point_heat_kernel() {
    let d = decomp(DirichletSpace::path(2).unwrap());
    let p = d.heat_kernel(1.0).unwrap();
    assert!((p[(0, 1)] - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-14);
    assert!((p[(0, 0)] - (1.0 + (-2f64).exp()) / 2.0).abs() < 1e-14);
    assert!(matches!(d.heat_kernel(0.0), Err(Error::NonPositiveTime(_))));
    assert!(matches!(d.heat_apply(-1.0, &[1.0, 0.0]), Err(Error::NegativeTime(_))));
}

#[test]
fn semigroup_composition_on_cycle() {
    let d = decomp(DirichletSpace::ring(10).unwrap());
    let f = random_f(&mut ChaCha8Rng::seed_from_u64(3), 10);
    let two = d.heat_apply(0.3, &d.heat_apply(0.7, &f).unwrap()).unwrap();
    let one = d.heat_apply(1.0, &f).unwrap();
    for (a, b) in two.iter().zip(&one) {
        assert!((a - b).abs() < 1e-10);
    }
}

/// The cycle has doubly degenerate eigenvalues; relabelling its vertices
/// produces a different eigenbasis inside each eigenspace, which must not
/// change any spectral function.
#[test]
fn results_do_not_depend_on_eigenbasis() {
    let n = 12;
    let perm: Vec<usize> = (0..n).map(|i| (5 * i + 3) % n).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (perm[i], perm[(i + 1) % n], 1.0)).collect();
    let shuffled = decomp(DirichletSpace::from_parts(ids, vec![1.0; n], &edges, None).unwrap());
    let plain = decomp(DirichletSpace::ring(n).unwrap());
    let f = random_f(&mut ChaCha8Rng::seed_from_u64(8), n);
    let mut g = vec![0.0; n];
    for i in 0..n {
        g[perm[i]] = f[i];
    }
    for s in [0.3, 0.8] {
        let a = frac_spectral(&plain, s, &f).unwrap();
        let b = frac_spectral(&shuffled, s, &g).unwrap();
        for i in 0..n {
            assert!((a[i] - b[perm[i]]).abs() < 1e-8);
        }
    }
}

#[test]
fn beurling_deny_identity() {
    let space = random_space(4, 15);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let u = random_f(&mut rng, 15);
        let v = random_f(&mut rng, 15);
        let gamma = energy_measure(&space, &u, &v).unwrap();
        let e = dirichlet_form(&space, &u, &v).unwrap();
        assert!((gamma.total(&space) - e).abs() <= 1e-12 * e.abs().max(1.0));
        assert_eq!(dirichlet_form(&space, &[1.0; 15], &v).unwrap(), 0.0);
    }
}

#[test]
fn invalid_graphs_are_rejected() {
    let v = vec![("a".to_string(), 1.0), ("b".to_string(), 1.0)];
    let asym = vec![("a".into(), "b".into(), 1.0), ("b".into(), "a".into(), 2.0)];
    assert!(matches!(
        DirichletSpace::build(v.clone(), asym, None),
        Err(Error::NonSymmetricConductance { .. })
    ));
    let zero = vec![("a".to_string(), 0.0), ("b".to_string(), 1.0)];
    assert!(matches!(
        DirichletSpace::build(zero, vec![], None),
        Err(Error::NonPositiveMeasure { .. })
    ));
    let bad_metric = Some(vec![vec![0.0, 1.0], vec![1.0, 1.0]]);
    assert!(matches!(
        DirichletSpace::build(v, vec![], bad_metric),
        Err(Error::MetricAxiomViolation(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_is_self_adjoint(seed in 0u64..10_000, n in 2usize..20) {
        let space = random_space(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let (f, g) = (random_f(&mut rng, n), random_f(&mut rng, n));
        let lf = space.apply_generator(&f).unwrap();
        let lg = space.apply_generator(&g).unwrap();
        prop_assert!((space.inner(&lf, &g) - space.inner(&f, &lg)).abs() < 1e-12);
        prop_assert!(space.inner(&lf, &f) <= 1e-14);
        prop_assert!((dirichlet_form(&space, &f, &g).unwrap() + space.inner(&lf, &g)).abs() < 1e-12);
    }

    #[test]
    fn heat_semigroup_axioms(seed in 0u64..10_000, n in 2usize..16, t in 0.0f64..5.0) {
        let space = random_space(seed, n);
        let d = SpectralDecomposition::compute(Arc::new(space.clone())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let one = d.heat_apply(t, &vec![1.0; n]).unwrap();
        prop_assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let f = random_f(&mut rng, n);
        prop_assert!(space.norm(&d.heat_apply(t, &f).unwrap()) <= space.norm(&f) + 1e-14);
        let g: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        prop_assert!(d.heat_apply(t, &g).unwrap().iter().all(|v| *v >= -1e-12));
        let v: Vec<f64> = f.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        prop_assert!(dirichlet_form(&space, &v, &v).unwrap() <= dirichlet_form(&space, &f, &f).unwrap() + 1e-15);
    }
}
