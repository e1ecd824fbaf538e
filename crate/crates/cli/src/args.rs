use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fraclab",
    version,
    about = "Fractional powers of graph Dirichlet-form generators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a graph file, or write a built-in graph as JSON.
    Space(SpaceArgs),
    /// Apply (-L)^s by one route, or compare all four.
    #[command(subcommand)]
    Frac(FracCommand),
    /// Solve the extension problem and take its Neumann trace.
    #[command(subcommand)]
    Extend(ExtendCommand),
    /// Bernstein functions of Krein strings.
    #[command(subcommand)]
    Krein(KreinCommand),
    /// Interior Harnack experiment for (-L)^s.
    #[command(subcommand)]
    Harnack(HarnackCommand),
    /// Boundary Harnack experiment on a grid domain.
    #[command(subcommand)]
    Bharnack(BharnackCommand),
    /// Empirical doubling and Poincaré constants.
    #[command(subcommand)]
    Geometry(GeometryCommand),
    /// Run the acceptance suite on the fixture graphs.
    Accept(AcceptArgs),
}

fn parse_s(v: &str) -> Result<f64, String> {
    let s: f64 = v.parse().map_err(|_| format!("{v:?} is not a number"))?;
    if s > 0.0 && s < 1.0 {
        Ok(s)
    } else {
        Err(format!("s = {s} must lie strictly inside (0, 1)"))
    }
}

fn parse_positive(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("{v:?} is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive and finite"))
    }
}

fn parse_count(v: &str) -> Result<usize, String> {
    let n: usize = v.parse().map_err(|_| format!("{v:?} is not a positive integer"))?;
    if n >= 1 {
        Ok(n)
    } else {
        Err("must be at least 1".into())
    }
}

fn parse_delta(v: &str) -> Result<f64, String> {
    let d: f64 = v.parse().map_err(|_| format!("{v:?} is not a number"))?;
    if d > 0.0 && d < 1.0 {
        Ok(d)
    } else {
        Err(format!("delta = {d} must lie in (0, 1)"))
    }
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    pub space: Option<PathBuf>,
    /// `ring10`, `path32`, `grid8x8`, `torus16x16`, ...
    #[arg(long)]
    pub builtin: Option<String>,
    /// Write the explicit distance matrix into the graph file.
    #[arg(long)]
    pub with_metric: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Subord,
    Kernel,
    Extension,
}

#[derive(Debug, Subcommand)]
pub enum FracCommand {
    Apply(FracApplyArgs),
    Compare(FracCompareArgs),
}

#[derive(Debug, Args)]
pub struct FracApplyArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_parser = parse_s)]
    pub s: f64,
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: Method,
    #[arg(long)]
    pub f: PathBuf,
    /// Cells of the y-mesh for the extension route.
    #[arg(long = "N", default_value_t = 256, value_parser = parse_count)]
    pub cells: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FracCompareArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_parser = parse_s)]
    pub s: f64,
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long = "N", default_value_t = 256, value_parser = parse_count)]
    pub cells: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Top {
    Neumann,
    Modal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Auto,
    Cg,
    Direct,
    Modal,
}

#[derive(Debug, Subcommand)]
pub enum ExtendCommand {
    Solve(ExtendSolveArgs),
    Dtn(ExtendDtnArgs),
}

#[derive(Debug, Args)]
pub struct ExtendSolveArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, value_parser = parse_s)]
    pub s: f64,
    #[arg(long = "N", default_value_t = 256, value_parser = parse_count)]
    pub cells: usize,
    /// Truncation height, or `auto` for 12/√gap.
    #[arg(long = "Y", default_value = "auto")]
    pub height: String,
    /// Mesh grading exponent; defaults to max(2, 1/(2s)).
    #[arg(long, value_parser = parse_positive)]
    pub grading: Option<f64>,
    #[arg(long, value_enum, default_value = "neumann")]
    pub top: Top,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: Solver,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtendDtnArgs {
    #[arg(long)]
    pub field: PathBuf,
    /// Graph the field lives on.
    #[arg(long)]
    pub space: PathBuf,
    /// Overrides the `s` recorded in the field file.
    #[arg(long, value_parser = parse_s)]
    pub s: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KreinCommand {
    Psi(KreinPsiArgs),
    FromWeight(KreinWeightArgs),
}

#[derive(Debug, Args)]
pub struct LambdaRange {
    #[arg(long, value_parser = parse_positive)]
    pub lmin: f64,
    #[arg(long, value_parser = parse_positive)]
    pub lmax: f64,
    /// Log-spaced sample count; forced to 1 when lmin = lmax.
    #[arg(long, default_value_t = 41, value_parser = parse_count)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct KreinPsiArgs {
    /// String as JSON, e.g. '{"kind":"powerlaw","c":1.0,"beta":-0.5}', or
    /// the shorthand `constant`.
    #[arg(long)]
    pub string: String,
    #[command(flatten)]
    pub range: LambdaRange,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KreinWeightArgs {
    /// Weight as JSON, e.g. '{"kind":"power","exponent":0.4}'.
    #[arg(long)]
    pub weight: String,
    #[command(flatten)]
    pub range: LambdaRange,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum HarnackCommand {
    Run(HarnackArgs),
}

#[derive(Debug, Args)]
pub struct HarnackArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_parser = parse_s)]
    pub s: f64,
    /// `center:radius`, with the center given by vertex id.
    #[arg(long)]
    pub ball: String,
    #[arg(long, value_parser = parse_delta)]
    pub delta: f64,
    #[arg(long, value_parser = parse_count)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Multiplier applied to every exterior datum.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub data_scale: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BharnackCommand {
    Run(BharnackArgs),
}

#[derive(Debug, Args)]
pub struct BharnackArgs {
    /// `gridN-squareM` or `gridN-lM`.
    #[arg(long)]
    pub geometry: String,
    #[arg(long, value_parser = parse_s)]
    pub s: f64,
    /// `corner`, `reentrant`, or a vertex id `i,j`.
    #[arg(long)]
    pub xi: String,
    #[arg(long, value_parser = parse_positive)]
    pub r: f64,
    /// Radius of the region where the equation holds; defaults to 2r.
    #[arg(long, value_parser = parse_positive)]
    pub collar: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GeometryCommand {
    Doubling(GeometryArgs),
    Poincare(PoincareArgs),
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Comma-separated vertex ids.
    #[arg(long, value_delimiter = ',', required = true)]
    pub centers: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
    pub radii: Vec<f64>,
    /// Measure on the product with weight |y|^a instead of the base graph.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Half-height and cell count of the product's y-line.
    #[arg(long = "Y", value_parser = parse_positive)]
    pub height: Option<f64>,
    #[arg(long, default_value_t = 8, value_parser = parse_count)]
    pub cells: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = 2.0, value_parser = parse_positive)]
    pub dilation: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Args)]
pub struct AcceptArgs {
    #[arg(long, default_value = "fixtures")]
    pub fixtures: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    pub tier: TierArg,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Comma-separated criterion numbers; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
    /// Extra orders for the four-route criterion, e.g. 0.05.
    #[arg(long, value_delimiter = ',', value_parser = parse_s)]
    pub stress_s: Vec<f64>,
    /// Machine-readable summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Human-readable summary table.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
}
