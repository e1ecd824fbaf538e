//! The reproducibility harness: ten acceptance criteria run against the
//! shipped fixture graphs, each reported as pass or fail with the worst
//! observed metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{dirichlet_form, DirichletSpace, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::extension::{TraceOptions, TraceSolver};
use crate::fractional::{
    build_jump_kernel, frac_kernel_apply, frac_spectral, frac_subordination, kernel_decay_profile, poisson_extend,
    semi_analytic_dtn, FracConfig, Lattice,
};
use crate::harnack::{
    boundary_harnack_experiment, build_product_space, doubling_constant, even_extension_study, grid_decomposition,
    harnack_constant, intrinsic_metric_bounds, poincare_constant, BallFamily, BoundaryHarnackConfig, DataRefinement,
    GridDomain, HarnackConfig, POINCARE_DILATION,
};
use crate::io::{read_space, FORMAT_VERSION};
use crate::krein::{
    bernstein_from_string, log_grid, power_weight_constant, solve_string, string_from_weight, KreinString, Weight,
};
use crate::linalg::{linear_fit, max_relative_error, norm_inf};
use crate::special::dtn_constant;

pub const CRITERIA: [&str; 10] = [
    "four-route agreement",
    "unit DtN constant at s = 1/2",
    "constant string closed form",
    "weight-string loop",
    "kernel decay",
    "product-space geometry",
    "even extension",
    "interior Harnack",
    "boundary Harnack and intrinsic metric",
    "semigroup and form axioms",
];

pub const FIXTURES: [&str; 6] = ["ring10", "path32", "grid8", "ring64", "grid16", "weighted12"];

/// Tolerance tier: `Relaxed` multiplies every numeric tolerance by 10.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    #[default]
    Strict,
    Relaxed,
}

impl Tier {
    pub fn factor(self) -> f64 {
        match self {
            Tier::Strict => 1.0,
            Tier::Relaxed => 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub fixtures: PathBuf,
    pub tier: Tier,
    pub seed: u64,
    /// Criteria to run, numbered from 1; empty means all.
    pub only: Vec<usize>,
    /// Extra fractional orders for the four-route criterion, typically
    /// close to 0 or 1 where quadrature and mesh routes converge slowly.
    #[serde(default)]
    pub stress_s: Vec<f64>,
}

impl AcceptanceConfig {
    pub fn new(fixtures: impl Into<PathBuf>) -> Self {
        Self {
            fixtures: fixtures.into(),
            tier: Tier::Strict,
            seed: 7,
            only: Vec::new(),
            stress_s: Vec::new(),
        }
    }

    fn selected(&self) -> Vec<usize> {
        if self.only.is_empty() {
            (1..=CRITERIA.len()).collect()
        } else {
            self.only.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionOutcome {
    /// `criterion 3 [constant string closed form]: PASS (0.4 s) ...`
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}]: {} ({:.1} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceSummary {
    pub format_version: u32,
    pub config: AcceptanceConfig,
    pub passed: bool,
    pub outcomes: Vec<CriterionOutcome>,
}

impl AcceptanceSummary {
    pub fn tsv(&self) -> String {
        let mut out =
            format!("# fraclab format_version={FORMAT_VERSION}\n# criterion\tname\tresult\tseconds\tdetail\n");
        for o in &self.outcomes {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.3}\t{}\n",
                o.id,
                o.name,
                if o.passed { "PASS" } else { "FAIL" },
                o.seconds,
                o.detail
            ));
        }
        out
    }
}

/// Fixture spaces loaded from disk.
pub struct Fixtures {
    spaces: BTreeMap<String, Arc<DirichletSpace>>,
}

impl Fixtures {
    pub fn load(dir: &Path) -> Result<Self> {
        let mut spaces = BTreeMap::new();
        for name in FIXTURES {
            let path = dir.join(format!("{name}.json"));
            if !path.is_file() {
                return Err(Error::FixtureMissing(path.display().to_string()));
            }
            spaces.insert(name.to_string(), Arc::new(read_space(&path)?));
        }
        Ok(Self { spaces })
    }

    pub fn get(&self, name: &str) -> Result<&Arc<DirichletSpace>> {
        self.spaces
            .get(name)
            .ok_or_else(|| Error::FixtureMissing(name.to_string()))
    }
}

/// Runs the selected criteria. Missing or unreadable fixtures abort the
/// run; any other error inside a criterion makes that criterion fail.
pub fn run_acceptance_suite(config: &AcceptanceConfig) -> Result<AcceptanceSummary> {
    let fixtures = Fixtures::load(&config.fixtures)?;
    let mut outcomes = Vec::new();
    for id in config.selected() {
        outcomes.push(run_criterion(id, config, &fixtures)?);
    }
    Ok(AcceptanceSummary {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    })
}

pub fn run_criterion(id: usize, config: &AcceptanceConfig, fixtures: &Fixtures) -> Result<CriterionOutcome> {
    if !(1..=CRITERIA.len()).contains(&id) {
        return Err(Error::InvalidInput(format!("no acceptance criterion {id}")));
    }
    let start = Instant::now();
    let mut tally = Tally::new(config.tier.factor());
    let ran = match id {
        1 => four_routes(&mut tally, fixtures, config.seed, &config.stress_s),
        2 => unit_dtn(&mut tally, fixtures, config.seed),
        3 => constant_string(&mut tally, config.seed),
        4 => weight_string_loop(&mut tally),
        5 => kernel_decay(&mut tally),
        6 => product_geometry(&mut tally, config.seed),
        7 => even_extension(&mut tally),
        8 => interior_harnack(&mut tally, fixtures, config.seed),
        9 => boundary_harnack(&mut tally, fixtures, config.seed),
        _ => semigroup_axioms(&mut tally, fixtures, config.seed),
    };
    if let Err(e) = ran {
        tally.fail(format!("error: {e}"));
    }
    let seconds = start.elapsed().as_secs_f64();
    match id {
        1 => tally.le("seconds", seconds, 120.0, false),
        5 => tally.le("seconds", seconds, 180.0, false),
        _ => {}
    }
    Ok(tally.finish(id, seconds))
}

/// Collects comparisons; each records the worst value seen under its key.
struct Tally {
    factor: f64,
    failures: Vec<String>,
    metrics: BTreeMap<String, f64>,
}

impl Tally {
    fn new(factor: f64) -> Self {
        Self {
            factor,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn record(&mut self, key: &str, value: f64, larger_is_worse: bool) {
        let slot = self.metrics.entry(key.to_string()).or_insert(value);
        if (larger_is_worse && value > *slot) || (!larger_is_worse && value < *slot) || slot.is_nan() {
            *slot = value;
        }
    }

    /// `value ≤ bound`, the bound scaled by the tier when `tolerance` is set.
    fn le(&mut self, key: &str, value: f64, bound: f64, tolerance: bool) {
        self.record(key, value, true);
        let bound = if tolerance { bound * self.factor } else { bound };
        if !(value <= bound) {
            self.fail(format!("{key} = {value:.3e} exceeds {bound:.1e}"));
        }
    }

    fn ge(&mut self, key: &str, value: f64, bound: f64) {
        self.record(key, value, false);
        if !(value >= bound) {
            self.fail(format!("{key} = {value:.3e} below {bound:.3e}"));
        }
    }

    fn require(&mut self, what: &str, ok: bool) {
        if !ok {
            self.fail(what.to_string());
        }
    }

    fn fail(&mut self, msg: String) {
        if !self.failures.contains(&msg) {
            self.failures.push(msg);
        }
    }

    fn finish(self, id: usize, seconds: f64) -> CriterionOutcome {
        let passed = self.failures.is_empty();
        let detail = if passed {
            self.metrics
                .iter()
                .filter(|(k, _)| k.as_str() != "seconds")
                .map(|(k, v)| format!("{k}={v:.3e}"))
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            self.failures.join("; ")
        };
        CriterionOutcome {
            id,
            name: CRITERIA[id - 1].to_string(),
            passed,
            seconds,
            detail,
            metrics: self.metrics,
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

const ROUTE_SPACES: [&str; 3] = ["ring10", "path32", "grid8"];
const ROUTE_S: [f64; 3] = [0.25, 0.5, 0.75];
const ROUTE_SAMPLES: usize = 20;

/// Orders this close to 0 or 1 are flagged as slow to converge.
const EDGE_OF_RANGE: f64 = 0.1;

/// Relative gap between the fine-mesh and extrapolated traces above which
/// the extension route is reported as converging slowly.
const SLOW_TRACE: f64 = 1e-2;

fn four_routes(t: &mut Tally, fixtures: &Fixtures, seed: u64, stress: &[f64]) -> Result<()> {
    let orders: Vec<f64> = ROUTE_S.iter().chain(stress).copied().collect();
    for &s in stress {
        if s.min(1.0 - s) < EDGE_OF_RANGE {
            log::warn!("s = {s} is near the edge of (0, 1); quadrature and mesh routes converge slowly");
        }
    }
    for name in ROUTE_SPACES {
        let space = fixtures.get(name)?.clone();
        let d = SpectralDecomposition::compute(space.clone())?;
        for &s in &orders {
            let cfg = FracConfig::new(s)?;
            let kernel = build_jump_kernel(&d, &cfg)?;
            let trace = TraceSolver::new(&space, Some(&d), s, &TraceOptions::default())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..ROUTE_SAMPLES {
                let f = random_vec(&mut rng, d.len());
                let exact = frac_spectral(&d, s, &f)?;
                t.le(
                    "subordination",
                    max_relative_error(&frac_subordination(&d, &cfg, &f)?, &exact),
                    1e-6,
                    true,
                );
                t.le(
                    "kernel",
                    max_relative_error(&frac_kernel_apply(&kernel, &f)?, &exact),
                    1e-6,
                    true,
                );
                let est = trace.trace(&f)?;
                if est.disagreement > SLOW_TRACE {
                    log::warn!(
                        "{name}, s = {s}: extension trace moved by {:.1e} under extrapolation",
                        est.disagreement
                    );
                }
                t.record("trace_disagreement", est.disagreement, true);
                t.le("extension", max_relative_error(&est.values, &exact), 1e-3, true);
                t.le(
                    "semi_analytic",
                    max_relative_error(&semi_analytic_dtn(&d, s, &f)?, &exact),
                    1e-4,
                    true,
                );
            }
        }
    }
    Ok(())
}

/// At `s = 1/2` the weight is trivial and the DtN constant is 1: the plain
/// normal derivative of the Poisson extension is `-√(-L) f`. The derivative
/// is taken here by three-level Richardson extrapolation of one-sided
/// differences, independently of the library's weighted DtN.
fn unit_dtn(t: &mut Tally, fixtures: &Fixtures, seed: u64) -> Result<()> {
    t.le("constant_minus_one", (dtn_constant(0.5)? - 1.0).abs(), 1e-15, false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for name in ROUTE_SPACES {
        let d = SpectralDecomposition::compute(fixtures.get(name)?.clone())?;
        let h = 1e-3 / d.lambda_max().sqrt();
        for _ in 0..5 {
            let f = random_vec(&mut rng, d.len());
            let field = poisson_extend(&d, 0.5, &f, &[0.0, h, 2.0 * h, 4.0 * h])?;
            let q =
                |j: usize, k: f64| -> Vec<f64> { (0..d.len()).map(|x| (field.get(x, j) - f[x]) / (k * h)).collect() };
            let (d1, d2, d4) = (q(1, 1.0), q(2, 2.0), q(3, 4.0));
            // D(h) = D₀ + c₁h + c₂h² + …
            let slope: Vec<f64> = (0..d.len())
                .map(|x| {
                    let r1 = 2.0 * d1[x] - d2[x];
                    let r2 = 2.0 * d2[x] - d4[x];
                    (4.0 * r1 - r2) / 3.0
                })
                .collect();
            let target: Vec<f64> = frac_spectral(&d, 0.5, &f)?.into_iter().map(|v| -v).collect();
            t.le("normal_derivative", max_relative_error(&slope, &target), 1e-6, true);
        }
    }
    Ok(())
}

fn check_bernstein(t: &mut Tally, label: &str, string: &KreinString, lambdas: &[f64]) -> Result<Vec<f64>> {
    let table = bernstein_from_string(string, lambdas)?;
    let c = table.checks();
    t.require(&format!("{label}: nonnegative"), c.nonnegative);
    t.require(&format!("{label}: nondecreasing"), c.nondecreasing);
    t.require(&format!("{label}: concave"), c.concave);
    Ok(table.psi)
}

fn constant_string(t: &mut Tally, seed: u64) -> Result<()> {
    let lambdas = log_grid(1e-2, 1e2, 41);
    let psi = check_bernstein(t, "constant", &KreinString::Constant { c: 1.0 }, &lambdas)?;
    let worst = lambdas
        .iter()
        .zip(&psi)
        .map(|(l, p)| (p - l.sqrt()).abs() / l.sqrt())
        .fold(0.0, f64::max);
    t.le("constant_rel_error", worst, 1e-7, true);
    let zero = solve_string(&KreinString::Constant { c: 1.0 }, 0.0, &[])?;
    t.le("psi_at_zero", zero.psi.abs(), 0.0, false);
    check_bernstein(t, "power-law", &KreinString::PowerLaw { c: 1.0, beta: -0.5 }, &lambdas)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..5 {
        let mut z = vec![0.0];
        let mut a = vec![rng.random_range(0.2..5.0)];
        for _ in 0..6 {
            z.push(z.last().unwrap() + rng.random_range(0.2..1.5));
            a.push(rng.random_range(0.2..5.0));
        }
        check_bernstein(t, &format!("piecewise {k}"), &KreinString::Sampled { z, a }, &lambdas)?;
    }
    Ok(())
}

fn weight_string_loop(t: &mut Tally) -> Result<()> {
    let lambdas = log_grid(1e-2, 1e2, 21);
    for s in [0.3, 0.5, 0.7] {
        let string = string_from_weight(&Weight::Power {
            c: 1.0,
            exponent: 1.0 - 2.0 * s,
        })?;
        let table = bernstein_from_string(&string, &lambdas)?;
        let (c, p) = table.power_fit();
        t.le("exponent_error", (p - s).abs(), 1e-3, true);
        let expected = power_weight_constant(s)?;
        t.le("constant_rel_error", (c - expected).abs() / expected, 1e-3, true);
    }
    Ok(())
}

fn kernel_decay(t: &mut Tally) -> Result<()> {
    for (lattice, tol) in [
        (Lattice { side: 512, dim: 1 }, 0.3),
        (Lattice { side: 64, dim: 2 }, 0.45),
    ] {
        for s in [0.25, 0.5] {
            let p = kernel_decay_profile(lattice, &FracConfig::new(s)?)?;
            let key = if lattice.dim == 1 {
                "ring_slope_offset"
            } else {
                "torus_slope_offset"
            };
            t.le(key, (p.slope - p.target).abs(), tol, false);
        }
    }
    Ok(())
}

fn product_geometry(t: &mut Tally, seed: u64) -> Result<()> {
    for n in [16usize, 32, 64] {
        let base = Arc::new(DirichletSpace::ring(n)?);
        let radii: Vec<f64> = (0..)
            .map(|k| 2f64.powi(k))
            .take_while(|r| *r <= n as f64 / 8.0)
            .collect();
        let centers = [0, n / 4];
        let family = BallFamily::grid(&base, &centers, &radii)?;
        let bd = doubling_constant(&base, &family)?.constant;
        let bp = poincare_constant(&base, &family, POINCARE_DILATION, seed)?.constant;
        for a in [-0.5, 0.0, 0.5] {
            let cells = (n / 4).max(8);
            let p = build_product_space(base.clone(), (1.0 - a) / 2.0, cells as f64, cells)?;
            let pc: Vec<usize> = centers.iter().map(|&x| p.index(x, p.center_level())).collect();
            let pf = BallFamily::grid(&p.space, &pc, &radii)?;
            let pd = doubling_constant(&p.space, &pf)?.constant;
            let pp = poincare_constant(&p.space, &pf, POINCARE_DILATION, seed)?.constant;
            t.le("doubling_factor", (pd / bd).max(bd / pd), 4.0, false);
            t.le("poincare_factor", (pp / bp).max(bp / pp), 4.0, false);
            // Sensitivity to the dilation; informational, not a pass criterion.
            match poincare_constant(&p.space, &pf, 2.0 * POINCARE_DILATION, seed) {
                Ok(r) => t.record("poincare_dilation4_ratio", r.constant / pp, true),
                Err(Error::DilationExceedsSpace(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let base = Arc::new(DirichletSpace::grid(4, 4)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..100 {
        let s = [0.25, 0.5, 0.75][k % 3];
        let p = build_product_space(base.clone(), s, 3.0, 8)?;
        let u = random_vec(&mut rng, p.len());
        let (h, v) = p.form_parts(&u)?;
        let total = dirichlet_form(&p.space, &u, &u)?;
        t.le("decomposition_rel_error", (h + v - total).abs() / total, 1e-12, true);
    }
    Ok(())
}

fn even_extension(t: &mut Tally) -> Result<()> {
    let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(20)?))?;
    let inside: Vec<usize> = (7..13).collect();
    let exterior: Vec<f64> = (0..20).map(|i| 1.0 + 0.5 * (i as f64 * 0.7).sin()).collect();
    for s in [0.3, 0.5, 0.7] {
        let r = even_extension_study(&d, s, &inside, &exterior, &[32, 64, 128, 256])?;
        t.le("refinement_ratio", r.metrics["worst_refinement_ratio"], 0.6, false);
        t.le(
            "residual_at_256",
            r.refinement.last().map_or(f64::NAN, |x| x.value),
            1e-6,
            true,
        );
    }
    Ok(())
}

/// Finiteness, scale invariance, monotonicity in δ and one-step refinement
/// stability of the interior Harnack constant.
fn harnack_case(
    t: &mut Tally,
    d: &SpectralDecomposition,
    fine: &SpectralDecomposition,
    map: &DataRefinement,
    base: HarnackConfig,
    fine_center: usize,
) -> Result<f64> {
    let mut solves = 0.0;
    let mut last = 0.0;
    let mut at_half = f64::NAN;
    for delta in [0.25, 0.5, 0.75] {
        let r = harnack_constant(d, 0.5, &HarnackConfig { delta, ..base.clone() }, None)?;
        t.require("finite constant", r.constant.is_finite() && r.constant >= 1.0);
        t.require("monotone in delta", r.constant >= last);
        t.le(
            "max_principle_violations",
            r.metrics["max_principle_violations"],
            0.0,
            false,
        );
        solves += r.metrics["solves"];
        last = r.constant;
        if delta == 0.5 {
            at_half = r.constant;
            let scaled = harnack_constant(
                d,
                0.5,
                &HarnackConfig {
                    delta,
                    data_scale: 1e3,
                    ..base.clone()
                },
                None,
            )?;
            let drift = r
                .trials
                .iter()
                .zip(&scaled.trials)
                .map(|(a, b)| (a.value - b.value).abs() / a.value)
                .fold(0.0, f64::max);
            t.le("scale_drift", drift, 1e-12, true);
            solves += scaled.metrics["solves"];
        }
    }
    let refined = harnack_constant(
        fine,
        0.5,
        &HarnackConfig {
            center: fine_center,
            radius: 2.0 * base.radius,
            delta: 0.5,
            ..base
        },
        Some(map),
    )?;
    t.le(
        "max_principle_violations",
        refined.metrics["max_principle_violations"],
        0.0,
        false,
    );
    solves += refined.metrics["solves"];
    t.le(
        "refinement_factor",
        (refined.constant / at_half).max(at_half / refined.constant),
        2.0,
        false,
    );
    Ok(solves)
}

fn same_graph(a: &DirichletSpace, b: &DirichletSpace) -> bool {
    a.ids() == b.ids() && a.measure() == b.measure() && a.edges() == b.edges()
}

fn interior_harnack(t: &mut Tally, fixtures: &Fixtures, seed: u64) -> Result<()> {
    let base = HarnackConfig {
        center: 0,
        radius: 8.0,
        delta: 0.5,
        trials: 200,
        seed,
        data_scale: 1.0,
    };
    let ring = fixtures.get("ring64")?;
    t.require(
        "ring64 fixture is the 64-cycle",
        same_graph(ring, &DirichletSpace::ring(64)?),
    );
    let d = SpectralDecomposition::compute(ring.clone())?;
    let (fine_ring, map) = DataRefinement::ring(64)?;
    let fine = SpectralDecomposition::compute(Arc::new(fine_ring))?;
    let mut solves = harnack_case(t, &d, &fine, &map, base.clone(), 0)?;

    let grid = fixtures.get("grid16")?;
    t.require(
        "grid16 fixture is the 16x16 grid",
        same_graph(grid, &DirichletSpace::grid(16, 16)?),
    );
    let d = grid_decomposition(16, 16)?;
    let (_, map) = DataRefinement::grid(16)?;
    let fine = grid_decomposition(32, 32)?;
    let center = grid.index_of("8,8")?;
    let fine_center = fine.space().index_of("16,16")?;
    solves += harnack_case(
        t,
        &d,
        &fine,
        &map,
        HarnackConfig {
            center,
            radius: 4.0,
            ..base
        },
        fine_center,
    )?;
    t.ge("solves", solves, 400.0);
    Ok(())
}

fn boundary_harnack(t: &mut Tally, fixtures: &Fixtures, seed: u64) -> Result<()> {
    let domain = GridDomain::square(24, 16)?;
    let d = grid_decomposition(24, 24)?;
    let cfg = BoundaryHarnackConfig {
        xi: domain.corner(),
        r: 3.0,
        collar: 6.0,
        trials: 50,
        seed,
    };
    let coarse = boundary_harnack_experiment(&domain, &d, 0.5, &cfg, None)?;
    let (fine_domain, map) = domain.refined()?;
    let fine = grid_decomposition(48, 48)?;
    let refined = boundary_harnack_experiment(
        &fine_domain,
        &fine,
        0.5,
        &BoundaryHarnackConfig {
            xi: fine_domain.corner(),
            r: 2.0 * cfg.r,
            collar: 2.0 * cfg.collar,
            ..cfg
        },
        Some(&map),
    )?;
    t.require(
        "finite boundary constant",
        coarse.constant.is_finite() && refined.constant.is_finite(),
    );
    t.le(
        "refinement_factor",
        (refined.constant / coarse.constant).max(coarse.constant / refined.constant),
        2.0,
        false,
    );

    let base = fixtures.get("grid8")?.clone();
    let p = build_product_space(base, 0.5, 8.0, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..20)
        .map(|_| (rng.random_range(0..p.len()), rng.random_range(0..p.len())))
        .collect();
    let r = intrinsic_metric_bounds(&p, &pairs)?;
    t.le("sandwich_ratio", r.constant, 4.0, false);
    Ok(())
}

const AXIOM_TIMES: [f64; 4] = [0.01, 0.3, 1.0, 7.5];

fn semigroup_axioms(t: &mut Tally, fixtures: &Fixtures, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for name in ["ring10", "path32", "grid8", "weighted12"] {
        let space = fixtures.get(name)?.clone();
        let d = SpectralDecomposition::compute(space.clone())?;
        let n = d.len();
        for &time in &AXIOM_TIMES {
            let one = d.heat_apply(time, &vec![1.0; n])?;
            t.le(
                "conservation",
                one.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max),
                1e-12,
                true,
            );
            for _ in 0..5 {
                let f = random_vec(&mut rng, n);
                let pf = d.heat_apply(time, &f)?;
                t.le("contraction_excess", space.norm(&pf) - space.norm(&f), 0.0, false);
                let g: Vec<f64> = f.iter().map(|v| v.abs()).collect();
                let pg = d.heat_apply(time, &g)?;
                t.ge(
                    "positivity_min",
                    pg.iter().copied().fold(f64::INFINITY, f64::min),
                    -1e-12 * t.factor,
                );
                let two = d.heat_apply(0.5 * time, &d.heat_apply(0.5 * time, &f)?)?;
                let scale = norm_inf(&pf).max(1.0);
                let gap = pf.iter().zip(&two).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
                t.le("composition", gap, 1e-10, true);
            }
        }
        for _ in 0..100 {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..1.5)).collect();
            let v: Vec<f64> = u.iter().map(|x| x.clamp(0.0, 1.0)).collect();
            let (eu, ev) = (dirichlet_form(&space, &u, &u)?, dirichlet_form(&space, &v, &v)?);
            t.le("clamp_excess", ev - eu, 0.0, false);
        }
    }
    // A discrete Gaussian on a long cycle is the sharpest consistency check of
    // the heat flow: variance grows like 2t.
    let d = SpectralDecomposition::compute(Arc::new(DirichletSpace::ring(64)?))?;
    let mut delta = vec![0.0; 64];
    delta[0] = 1.0;
    let times = [0.5, 1.0, 2.0, 4.0];
    let variances: Vec<f64> = times
        .iter()
        .map(|&time| {
            let p = d.heat_apply(time, &delta)?;
            Ok((0..64)
                .map(|x| {
                    let k = if x < 32 { x as f64 } else { x as f64 - 64.0 };
                    k * k * p[x]
                })
                .sum())
        })
        .collect::<Result<_>>()?;
    let (_, slope) = linear_fit(&times, &variances);
    t.le("variance_slope_error", (slope - 2.0).abs(), 1e-8, true);
    Ok(())
}
