use std::sync::Arc;

use fraclab::dirichlet::{DirichletSpace, SpectralDecomposition};
use fraclab::fractional::{
    build_jump_kernel, frac_kernel_apply, frac_spectral, frac_subordination, poisson_extend, poisson_multiplier,
    semi_analytic_dtn, FracConfig,
};
use fraclab::linalg::max_relative_error;
use fraclab::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring10() -> SpectralDecomposition {
    SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(10).unwrap())).unwrap()
}

fn random_f(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn constants_are_annihilated_by_every_route() {
    let d = ring10();
    let c = vec![2.5; 10];
    let cfg = FracConfig::new(0.4).unwrap();
    let kernel = build_jump_kernel(&d, &cfg).unwrap();
    assert!(frac_spectral(&d, 0.4, &c).unwrap().iter().all(|v| v.abs() < 1e-12));
    assert!(frac_subordination(&d, &cfg, &c).unwrap().iter().all(|v| *v == 0.0));
    assert!(frac_kernel_apply(&kernel, &c).unwrap().iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn single_mode_half_power() {
    let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::path(2).unwrap())).unwrap();
    let out = frac_subordination(&d, &FracConfig::new(0.5).unwrap(), &[1.0, -1.0]).unwrap();
    assert!((out[0] - 2f64.sqrt()).abs() < 1e-8);
    assert!((out[1] + 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn near_one_approaches_generator() {
    let d = ring10();
    let f = random_f(1, 10);
    let lf: Vec<f64> = d.space().apply_generator(&f).unwrap().into_iter().map(|v| -v).collect();
    let near = frac_spectral(&d, 0.99, &f).unwrap();
    let num: f64 = near.iter().zip(&lf).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = lf.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num / den <= 0.02);
}

#[test]
fn s_outside_unit_interval_is_rejected() {
    for s in [0.0, 1.0, -0.2, 1.5] {
        assert!(matches!(FracConfig::new(s), Err(Error::SOutOfRange(_))));
        assert!(matches!(
            frac_spectral(&ring10(), s, &[0.0; 10]),
            Err(Error::SOutOfRange(_))
        ));
    }
}

#[test]
fn routes_agree_on_cycle() {
    let d = ring10();
    let f = random_f(2, 10);
    for s in [0.25, 0.3, 0.5, 0.75] {
        let exact = frac_spectral(&d, s, &f).unwrap();
        let cfg = FracConfig::new(s).unwrap();
        let kernel = build_jump_kernel(&d, &cfg).unwrap();
        assert!(max_relative_error(&frac_subordination(&d, &cfg, &f).unwrap(), &exact) <= 1e-6);
        assert!(max_relative_error(&frac_kernel_apply(&kernel, &f).unwrap(), &exact) <= 1e-6);
        assert!(max_relative_error(&semi_analytic_dtn(&d, s, &f).unwrap(), &exact) <= 1e-4);
    }
}

#[test]
fn half_power_multiplier_is_exponential() {
    assert!((poisson_multiplier(0.5, 4.0, 1.0) - (-2f64).exp()).abs() < 1e-8);
    let d = ring10();
    let f = random_f(3, 10);
    let field = poisson_extend(&d, 0.5, &f, &[0.0, 1e-4, 2e-4]).unwrap();
    assert_eq!(field.level(0), &f[..]);
    // Second-order one-sided difference of the harmonic extension.
    let exact = frac_spectral(&d, 0.5, &f).unwrap();
    let slope: Vec<f64> = (0..10)
        .map(|x| (4.0 * field.get(x, 1) - field.get(x, 2) - 3.0 * f[x]) / 2e-4)
        .collect();
    let neg: Vec<f64> = exact.iter().map(|v| -v).collect();
    assert!(max_relative_error(&slope, &neg) <= 1e-6);
}

#[test]
fn kernel_is_symmetric_and_positive() {
    let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::grid(4, 5).unwrap())).unwrap();
    let k = build_jump_kernel(&d, &FracConfig::new(0.6).unwrap()).unwrap();
    for x in 0..20 {
        for y in 0..20 {
            if x != y {
                assert!(k.get(x, y) > 0.0);
                assert!((k.get(x, y) - k.get(y, x)).abs() <= 1e-12 * k.get(x, y));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadratic_form_is_symmetric_and_positive(seed in 0u64..10_000, s in 0.05f64..0.95) {
        let d = ring10();
        let (f, g) = (random_f(seed, 10), random_f(seed + 1, 10));
        let sp = d.space();
        let (af, ag) = (frac_spectral(&d, s, &f).unwrap(), frac_spectral(&d, s, &g).unwrap());
        prop_assert!(sp.inner(&af, &f) >= 0.0);
        prop_assert!((sp.inner(&af, &g) - sp.inner(&f, &ag)).abs() < 1e-10);
    }

    #[test]
    fn powers_compose(seed in 0u64..10_000, s1 in 0.05f64..0.45, s2 in 0.05f64..0.45) {
        let d = ring10();
        let f = random_f(seed, 10);
        let two = frac_spectral(&d, s1, &frac_spectral(&d, s2, &f).unwrap()).unwrap();
        let one = frac_spectral(&d, s1 + s2, &f).unwrap();
        prop_assert!(two.iter().zip(&one).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn multiplier_is_a_decreasing_fraction(s in 0.05f64..0.95, lambda in 0.0f64..50.0, y in 0.0f64..5.0) {
        let m = poisson_multiplier(s, lambda, y);
        prop_assert!(m > 0.0 && m <= 1.0);
        if lambda == 0.0 || y == 0.0 {
            prop_assert_eq!(m, 1.0);
        }
        prop_assert!(poisson_multiplier(s, lambda, y + 0.1) <= m + 1e-12);
        prop_assert!(poisson_multiplier(s, lambda + 0.5, y) <= m + 1e-12);
    }
}
