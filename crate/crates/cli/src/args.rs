//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rlfem::{Degree, Example, FunctionExpr, MeshFamily, ReferenceKind};

#[derive(Debug, Parser)]
#[command(
    name = "rlfem",
    version,
    about = "Galerkin FEM for -D^alpha u + q u = f on (0,1) via singularity reconstruction",
    arg_required_else_help = true,
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Run the whole reproduction suite; --output names the target directory (default `tables`).
    #[arg(long)]
    pub seed_tables: bool,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Table format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Output file, or `-` for stdout.
    #[arg(long, global = true)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one source problem and tabulate w_h and u_h at sample points.
    Solve(SolveArgs),
    /// L2 errors of u_h and empirical rates over mesh levels.
    Converge(ConvergeArgs),
    /// Eigenvalue and eigenfunction errors over mesh levels.
    Eigen(EigenArgs),
    /// Condition numbers with and without the Laplacian preconditioner (P1).
    Cond(CondArgs),
}

#[derive(Debug, Args, Clone)]
pub struct ProblemArgs {
    /// Order alpha in (1, 2); a comma-separated list builds one row per value.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_alpha)]
    pub alpha: Vec<f64>,

    /// Reconstruction exponent: a number >= alpha, or `alpha-1`. Lists allowed.
    #[arg(long, value_delimiter = ',', default_value = "alpha-1", value_parser = parse_mu)]
    pub mu: Vec<Mu>,

    /// Potential q, a polynomial such as `0`, `x` or `1+x^2`.
    #[arg(long, default_value = "0", value_parser = parse_expr)]
    pub q: FunctionExpr,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in source: a = x(1-x), b1 = 1, b2 = (1-x)^0.6, c = step(0,0.5).
    #[arg(long, value_parser = parse_example)]
    pub example: Option<Example>,

    /// Explicit source, e.g. `x*(1-x)`, `(1-x)^3/5`, `step(0,0.5)`.
    #[arg(long = "f", value_parser = parse_expr)]
    pub f: Option<FunctionExpr>,
}

impl SourceArgs {
    pub fn expr(&self) -> FunctionExpr {
        match (&self.example, &self.f) {
            (Some(ex), _) => ex.source(),
            (None, Some(f)) => f.clone(),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }

    pub fn describe(&self) -> String {
        match &self.example {
            Some(ex) => format!("example {ex}"),
            None => format!("f = {}", self.expr()),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Polynomial degree, 1 or 2.
    #[arg(long, default_value = "1", value_parser = parse_degree)]
    pub degree: Degree,
    /// Mesh level.
    #[arg(long, default_value_t = 4)]
    pub m: u32,
    /// Mesh family: `pow2` (h = 1/2^m), `pow2plus1` (h = 1/(2^m+1)) or `ten_pow2` (h = 1/(10*2^m)).
    #[arg(long, value_parser = parse_family, default_value = "pow2")]
    pub mesh: MeshFamily,
    /// Number of equispaced sample points, endpoints included.
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u32).range(2..=100_000))]
    pub samples: u32,
    /// Gauss points per quadrature panel.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Degrees to run, e.g. `1,2`.
    #[arg(long, value_delimiter = ',', default_value = "1,2", value_parser = parse_degree)]
    pub degree: Vec<Degree>,
    /// Mesh levels: `3..8`, `3,5,7` or `4`.
    #[arg(long, default_value = "3..8", value_parser = parse_levels)]
    pub m: Levels,
    /// Mesh family: `pow2` (h = 1/2^m), `pow2plus1` (h = 1/(2^m+1)) or `ten_pow2` (h = 1/(10*2^m)).
    #[arg(long, value_parser = parse_family, default_value = "pow2")]
    pub mesh: MeshFamily,
    /// Ground truth: closed form when available (`auto`), `exact` or `fine`.
    #[arg(long, value_parser = parse_reference, default_value = "auto")]
    pub reference: ReferenceKind,
    /// Level of the P2 reference mesh; the reference at level m has 2^(ref-m) times as many elements.
    #[arg(long)]
    pub ref_level: Option<u32>,
    /// Gauss points per quadrature panel.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "1", value_parser = parse_degree)]
    pub degree: Degree,
    #[arg(long, default_value = "3..6", value_parser = parse_levels)]
    pub m: Levels,
    /// Mesh family: `pow2` (h = 1/2^m), `pow2plus1` (h = 1/(2^m+1)) or `ten_pow2` (h = 1/(10*2^m)).
    #[arg(long, value_parser = parse_family, default_value = "ten_pow2")]
    pub mesh: MeshFamily,
    /// Eigenvalues tracked.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub count: u32,
    /// Eigenfunctions tracked, at most --count.
    #[arg(long, default_value_t = 5)]
    pub functions: u32,
    /// Level of the P2 reference mesh in the chosen family (7 gives h = 1/1280 for ten_pow2).
    #[arg(long, default_value_t = 7)]
    pub ref_level: u32,
    /// Gauss points per quadrature panel.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "3..9", value_parser = parse_levels)]
    pub m: Levels,
}

/// `mu` as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu {
    Value(f64),
    AlphaMinusOne,
}

impl Mu {
    pub fn resolve(self, alpha: f64) -> f64 {
        match self {
            Mu::Value(v) => v,
            Mu::AlphaMinusOne => alpha - 1.0,
        }
    }
}

/// Ascending, nonempty list of mesh levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels(pub Vec<u32>);

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if a > 1.0 && a < 2.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (1, 2), got {a}"))
    }
}

fn parse_mu(s: &str) -> Result<Mu, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if t == "alpha-1" {
        return Ok(Mu::AlphaMinusOne);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Mu::Value(v)),
        _ => Err(format!("expected a number or `alpha-1`, got '{s}'")),
    }
}

fn parse_expr(s: &str) -> Result<FunctionExpr, String> {
    s.parse().map_err(|e: rlfem::Error| e.to_string())
}

fn parse_example(s: &str) -> Result<Example, String> {
    s.parse().map_err(|e: rlfem::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<MeshFamily, String> {
    s.parse().map_err(|e: rlfem::Error| e.to_string())
}

fn parse_degree(s: &str) -> Result<Degree, String> {
    let k: u32 = s.trim().parse().map_err(|_| format!("degree must be 1 or 2, got '{s}'"))?;
    Degree::from_order(k).map_err(|e| e.to_string())
}

fn parse_reference(s: &str) -> Result<ReferenceKind, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "auto" => Ok(ReferenceKind::Auto),
        "exact" => Ok(ReferenceKind::Exact),
        "fine" => Ok(ReferenceKind::FineMesh),
        other => Err(format!("unknown reference '{other}', expected auto, exact or fine")),
    }
}

pub fn parse_levels(s: &str) -> Result<Levels, String> {
    let s = s.trim();
    let bad = || format!("malformed level range '{s}', expected a..b, a,b,c or a");
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    let levels: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if levels.is_empty() {
        return Err(format!("level range '{s}' is empty"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("levels in '{s}' must be strictly ascending"));
    }
    if levels.iter().any(|&m| m > 20) {
        return Err(format!("levels in '{s}' must not exceed 20"));
    }
    Ok(Levels(levels))
}
