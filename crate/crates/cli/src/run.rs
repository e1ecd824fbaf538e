use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use fraclab::acceptance::{run_criterion, AcceptanceConfig, AcceptanceSummary, Fixtures, Tier, CRITERIA};
use fraclab::dirichlet::{DirichletSpace, SpectralDecomposition};
use fraclab::extension::{
    build_graded_mesh, default_grading, default_height, first_cell_trace, neumann_trace, solve_extension_pde,
    SolveMethod, TopBc, TraceOptions,
};
use fraclab::fractional::{build_jump_kernel, frac_kernel_apply, frac_spectral, frac_subordination, FracConfig};
use fraclab::harnack::{
    boundary_harnack_experiment, build_product_space, doubling_constant, grid_decomposition, harnack_constant,
    poincare_constant, BallFamily, BoundaryHarnackConfig, ExperimentReport, GridDomain, HarnackConfig,
};
use fraclab::io::{
    builtin_space, field_tsv, format_number, function_tsv, numeric_table, parse_field, read_function, read_space,
    space_json, FORMAT_VERSION,
};
use fraclab::krein::{bernstein_from_string, log_grid, string_from_weight, KreinString, Weight};
use fraclab::linalg::max_relative_error;
use fraclab::Error;
use serde_json::{json, Value};

use crate::args::*;

/// Why a command stopped: bad input (exit 2) or a numerical failure (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    /// The command ran but its checks did not pass.
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) if e.is_validation() => 2,
            Failure::Lib(_) | Failure::Failed(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Failed(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Lib(e.into())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Lib(e.into()))
        }
    }
}

fn report_json(command: &str, report: &ExperimentReport) -> Result<String, Failure> {
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": report.config,
        "report": report,
        "trial_table": report.trial_table(),
    });
    Ok(serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n")
}

fn load(path: &Path) -> Result<Arc<DirichletSpace>, Failure> {
    Ok(Arc::new(read_space(path)?))
}

fn decompose(space: &Arc<DirichletSpace>) -> Result<SpectralDecomposition, Failure> {
    Ok(SpectralDecomposition::compute(space.clone())?)
}

pub fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Space(a) => space(a),
        Command::Frac(FracCommand::Apply(a)) => frac_apply(a),
        Command::Frac(FracCommand::Compare(a)) => frac_compare(a),
        Command::Extend(ExtendCommand::Solve(a)) => extend_solve(a),
        Command::Extend(ExtendCommand::Dtn(a)) => extend_dtn(a),
        Command::Krein(KreinCommand::Psi(a)) => krein_psi(a),
        Command::Krein(KreinCommand::FromWeight(a)) => krein_from_weight(a),
        Command::Harnack(HarnackCommand::Run(a)) => harnack(a),
        Command::Bharnack(BharnackCommand::Run(a)) => bharnack(a),
        Command::Geometry(GeometryCommand::Doubling(a)) => geometry(a, None),
        Command::Geometry(GeometryCommand::Poincare(a)) => geometry(a.geometry, Some((a.dilation, a.seed))),
        Command::Accept(a) => accept(a),
    }
}

fn space(a: SpaceArgs) -> Outcome {
    if let Some(name) = &a.builtin {
        let space = builtin_space(name)?;
        return emit(a.out.as_deref(), &(space_json(&space, a.with_metric)? + "\n"));
    }
    let path = a
        .space
        .as_deref()
        .ok_or_else(|| Failure::Usage("--space or --builtin is required".into()))?;
    let space = load(path)?;
    let d = decompose(&space)?;
    let summary = json!({
        "format_version": FORMAT_VERSION,
        "config": { "space": path },
        "vertices": space.len(),
        "edges": space.edges().len(),
        "total_measure": space.total_measure(),
        "components": space.component_count(),
        "lambda_max": d.lambda_max(),
        // Finite spaces always have a gap; it is recorded, not assumed away.
        "spectral_gap": d.spectral_gap(),
        "zero_modes": d.zero_modes(),
    });
    emit(
        a.out.as_deref(),
        &(serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n"),
    )
}

fn route(method: Method, d: &SpectralDecomposition, s: f64, f: &[f64], cells: usize) -> Result<Vec<f64>, Failure> {
    Ok(match method {
        Method::Spectral => frac_spectral(d, s, f)?,
        Method::Subord => frac_subordination(d, &FracConfig::new(s)?, f)?,
        Method::Kernel => frac_kernel_apply(&build_jump_kernel(d, &FracConfig::new(s)?)?, f)?,
        Method::Extension => {
            let opts = TraceOptions {
                cells,
                ..TraceOptions::default()
            };
            neumann_trace(d.space(), Some(d), s, f, &opts)?.values
        }
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Spectral => "spectral",
        Method::Subord => "subord",
        Method::Kernel => "kernel",
        Method::Extension => "extension",
    }
}

fn frac_apply(a: FracApplyArgs) -> Outcome {
    let space = load(&a.space)?;
    let f = read_function(&a.f, &space)?;
    let d = decompose(&space)?;
    let out = route(a.method, &d, a.s, &f, a.cells)?;
    let config = json!({
        "command": "frac apply", "space": a.space, "f": a.f, "s": a.s,
        "method": method_name(a.method), "N": a.cells,
    });
    emit(a.out.as_deref(), &function_tsv(&space, &out, Some(config)))
}

fn frac_compare(a: FracCompareArgs) -> Outcome {
    let space = load(&a.space)?;
    let f = read_function(&a.f, &space)?;
    let d = decompose(&space)?;
    let methods = [Method::Spectral, Method::Subord, Method::Kernel, Method::Extension];
    let values = methods
        .iter()
        .map(|&m| route(m, &d, a.s, &f, a.cells))
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec!["quantity".to_string()];
    let mut errors = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            columns.push(format!("{}~{}", method_name(methods[i]), method_name(methods[j])));
            errors.push(max_relative_error(&values[j], &values[i]));
        }
    }
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let config = json!({ "command": "frac compare", "space": a.space, "f": a.f, "s": a.s, "N": a.cells });
    let text = numeric_table(Some(config), &columns, [("max_relative_error".to_string(), errors)]);
    emit(a.out.as_deref(), &text)
}

fn extend_solve(a: ExtendSolveArgs) -> Outcome {
    let space = load(&a.space)?;
    let f = read_function(&a.f, &space)?;
    let height: Option<f64> = match a.height.as_str() {
        "auto" => None,
        h => match h.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Some(v),
            _ => {
                return Err(Failure::Usage(format!(
                    "--Y must be `auto` or a positive number, got {h:?}"
                )))
            }
        },
    };
    let top = match a.top {
        Top::Neumann => TopBc::Neumann,
        Top::Modal => TopBc::ModalDirichlet,
    };
    let method = match a.solver {
        Solver::Auto => SolveMethod::Auto,
        Solver::Cg => SolveMethod::ConjugateGradient,
        Solver::Direct => SolveMethod::Direct,
        Solver::Modal => SolveMethod::Modal,
    };
    let needs_spectrum = height.is_none() || top == TopBc::ModalDirichlet || method == SolveMethod::Modal;
    let d = if needs_spectrum { Some(decompose(&space)?) } else { None };
    let height = match height {
        Some(h) => h,
        None => default_height(d.as_ref())?,
    };
    let grading = a.grading.unwrap_or_else(|| default_grading(a.s));
    let mesh = build_graded_mesh(height, a.cells, grading, 1.0 - 2.0 * a.s)?;
    let field = solve_extension_pde(&space, d.as_ref(), &f, mesh, top, method)?;
    let config = json!({
        "command": "extend solve", "space": a.space, "f": a.f, "s": a.s, "N": a.cells,
        "Y": height, "grading": grading, "top": format!("{:?}", a.top).to_lowercase(),
        "solver": format!("{:?}", a.solver).to_lowercase(),
    });
    emit(a.out.as_deref(), &field_tsv(&space, &field, Some(config)))
}

fn extend_dtn(a: ExtendDtnArgs) -> Outcome {
    let space = load(&a.space)?;
    let text = fs::read_to_string(&a.field).map_err(Error::from)?;
    let field = parse_field(&text, &space, a.s)?;
    let trace = first_cell_trace(&space, &field)?;
    let config = json!({ "command": "extend dtn", "space": a.space, "field": a.field, "s": field.s });
    emit(a.out.as_deref(), &function_tsv(&space, &trace, Some(config)))
}

fn lambdas(r: &LambdaRange) -> Result<Vec<f64>, Failure> {
    if r.lmin > r.lmax {
        return Err(Failure::Usage(format!("--lmin {} exceeds --lmax {}", r.lmin, r.lmax)));
    }
    Ok(if r.lmin == r.lmax {
        vec![r.lmin]
    } else {
        log_grid(r.lmin, r.lmax, r.points.max(2))
    })
}

fn psi_table(string: &KreinString, r: &LambdaRange, config: Value) -> Result<String, Failure> {
    let grid = lambdas(r)?;
    let table = bernstein_from_string(string, &grid)?;
    Ok(numeric_table(
        Some(config),
        &["lambda", "psi"],
        grid.iter().zip(&table.psi).map(|(l, p)| (format_number(*l), vec![*p])),
    ))
}

fn krein_psi(a: KreinPsiArgs) -> Outcome {
    let string: KreinString = match a.string.trim() {
        "constant" => KreinString::Constant { c: 1.0 },
        text => serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--string: {e}")))?,
    };
    string.validate()?;
    let config = json!({
        "command": "krein psi", "string": string, "lmin": a.range.lmin, "lmax": a.range.lmax,
        "points": a.range.points,
    });
    emit(a.out.as_deref(), &psi_table(&string, &a.range, config)?)
}

fn krein_from_weight(a: KreinWeightArgs) -> Outcome {
    let weight: Weight = serde_json::from_str(&a.weight).map_err(|e| Failure::Usage(format!("--weight: {e}")))?;
    let string = string_from_weight(&weight)?;
    let config = json!({
        "command": "krein from-weight", "weight": weight, "string": string,
        "lmin": a.range.lmin, "lmax": a.range.lmax, "points": a.range.points,
    });
    emit(a.out.as_deref(), &psi_table(&string, &a.range, config)?)
}

fn harnack(a: HarnackArgs) -> Outcome {
    let space = load(&a.space)?;
    let (center, radius) = a
        .ball
        .rsplit_once(':')
        .ok_or_else(|| Failure::Usage(format!("--ball expects center:radius, got {:?}", a.ball)))?;
    let radius: f64 = match radius.parse() {
        Ok(r) if r > 0.0 => r,
        _ => {
            return Err(Failure::Usage(format!(
                "--ball radius must be positive, got {radius:?}"
            )))
        }
    };
    let center = space.index_of(center)?;
    let d = decompose(&space)?;
    let cfg = HarnackConfig {
        center,
        radius,
        delta: a.delta,
        trials: a.trials,
        seed: a.seed,
        data_scale: a.data_scale,
    };
    let mut report = harnack_constant(&d, a.s, &cfg, None)?;
    if let Some(obj) = report.config.as_object_mut() {
        obj.insert("space".into(), json!(a.space));
    }
    emit(a.out.as_deref(), &report_json("harnack run", &report)?)
}

fn bharnack(a: BharnackArgs) -> Outcome {
    let domain = GridDomain::parse(&a.geometry)?;
    let d = grid_decomposition(domain.side, domain.side)?;
    let cfg = BoundaryHarnackConfig {
        xi: domain.resolve_point(&a.xi)?,
        r: a.r,
        collar: a.collar.unwrap_or(2.0 * a.r),
        trials: a.trials,
        seed: a.seed,
    };
    let report = boundary_harnack_experiment(&domain, &d, a.s, &cfg, None)?;
    emit(a.out.as_deref(), &report_json("bharnack run", &report)?)
}

fn geometry(a: GeometryArgs, poincare: Option<(f64, u64)>) -> Outcome {
    let base = load(&a.space)?;
    let centers = a
        .centers
        .iter()
        .map(|c| base.index_of(c))
        .collect::<Result<Vec<_>, _>>()?;
    let command = if poincare.is_some() {
        "geometry poincare"
    } else {
        "geometry doubling"
    };
    let (space, centers) = match a.a {
        Some(weight) => {
            if !(weight > -1.0 && weight < 1.0) {
                return Err(Failure::Usage(format!(
                    "--a = {weight} must lie strictly inside (-1, 1)"
                )));
            }
            let height = a.height.unwrap_or(a.cells as f64);
            let p = build_product_space(base, (1.0 - weight) / 2.0, height, a.cells)?;
            let centers = centers.iter().map(|&x| p.index(x, p.center_level())).collect();
            (Arc::new(p.space), centers)
        }
        None => (base, centers),
    };
    let family = BallFamily::grid(&space, &centers, &a.radii)?;
    let mut report = match poincare {
        Some((dilation, seed)) => poincare_constant(&space, &family, dilation, seed)?,
        None => doubling_constant(&space, &family)?,
    };
    if let Some(obj) = report.config.as_object_mut() {
        obj.insert("space".into(), json!(a.space));
        obj.insert("a".into(), json!(a.a));
    }
    emit(a.out.as_deref(), &report_json(command, &report)?)
}

fn accept(a: AcceptArgs) -> Outcome {
    let mut config = AcceptanceConfig::new(&a.fixtures);
    config.tier = match a.tier {
        TierArg::Strict => Tier::Strict,
        TierArg::Relaxed => Tier::Relaxed,
    };
    config.seed = a.seed;
    config.only = a.only.clone();
    config.stress_s = a.stress_s.clone();
    if let Some(bad) = config.only.iter().find(|&&k| !(1..=CRITERIA.len()).contains(&k)) {
        return Err(Failure::Usage(format!(
            "--only: no criterion {bad}; valid are 1..={}",
            CRITERIA.len()
        )));
    }
    let fixtures = Fixtures::load(&config.fixtures)?;
    let ids: Vec<usize> = if config.only.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        config.only.clone()
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let outcome = run_criterion(id, &config, &fixtures)?;
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let summary = AcceptanceSummary {
        format_version: FORMAT_VERSION,
        passed: outcomes.iter().all(|o| o.passed),
        config,
        outcomes,
    };
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n";
        fs::write(path, text).map_err(Error::from)?;
    }
    if let Some(path) = &a.tsv {
        fs::write(path, summary.tsv()).map_err(Error::from)?;
    }
    if summary.passed {
        Ok(())
    } else {
        let failed: Vec<String> = summary
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.id.to_string())
            .collect();
        Err(Failure::Failed(format!(
            "acceptance criteria failed: {}",
            failed.join(", ")
        )))
    }
}
