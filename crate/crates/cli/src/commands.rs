//! Subcommand bodies: build problems, run the core studies, shape the results into tables.

use std::collections::BTreeSet;
use std::fmt;
use std::io;

use rlfem::driver::{condition_study, solve_source_with};
use rlfem::oracle::exact_solution_q0;
use rlfem::study::{convergence_study_cached, eigen_reference, eigen_study_with_reference, ReferenceCache};
use rlfem::{Assembler, Degree, EigenStudy, FeSpace, FunctionExpr, MeshFamily, ProblemSpec, ReferenceKind, SourceStudy};

use crate::args::{CondArgs, ConvergeArgs, EigenArgs, Mu, ProblemArgs, SolveArgs};
use crate::table::{Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<rlfem::Error> for CliError {
    fn from(e: rlfem::Error) -> Self {
        use rlfem::Error as E;
        match e {
            E::InvalidArgument(_) | E::Parse { .. } | E::UnsupportedExpression(_) | E::DivergentIntegral { .. } => {
                CliError::Usage(e.to_string())
            }
            E::Numeric(_) | E::SingularMatrix { .. } | E::ConvergenceFailure(_) | E::ResourceLimit(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn log(msg: impl AsRef<str>) {
    eprintln!("[rlfem] {}", msg.as_ref());
}

fn assembler(points: Option<usize>) -> CliResult<Assembler> {
    Ok(match points {
        Some(p) => Assembler::new(p)?,
        None => Assembler::default(),
    })
}

fn single<T: Copy>(values: &[T], flag: &str, cmd: &str) -> CliResult<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Usage(format!("{cmd} takes a single value for --{flag}"))),
    }
}

pub fn mesh_label(family: MeshFamily) -> &'static str {
    match family {
        MeshFamily::Pow2 => "h = 1/2^m",
        MeshFamily::Pow2Plus1 => "h = 1/(2^m+1)",
        MeshFamily::TenPow2 => "h = 1/(10*2^m)",
    }
}

fn mu_label(problem: &ProblemSpec) -> String {
    if problem.is_regular_corner() {
        "alpha-1".into()
    } else {
        format!("{}", problem.mu())
    }
}

fn level_header(levels: &[u32]) -> impl Iterator<Item = String> + '_ {
    levels.iter().map(|m| format!("m={m}"))
}

/// Everything a convergence table needs.
#[derive(Debug, Clone)]
pub struct ConvergeSpec {
    pub alphas: Vec<f64>,
    pub mus: Vec<Mu>,
    pub q: FunctionExpr,
    pub f: FunctionExpr,
    pub source_label: String,
    pub degrees: Vec<Degree>,
    pub levels: Vec<u32>,
    pub family: MeshFamily,
    pub reference: ReferenceKind,
    pub ref_level: Option<u32>,
    pub assembler: Assembler,
}

impl ConvergeSpec {
    fn from_args(a: &ConvergeArgs) -> CliResult<Self> {
        Ok(Self {
            alphas: a.problem.alpha.clone(),
            mus: a.problem.mu.clone(),
            q: a.problem.q.clone(),
            f: a.source.expr(),
            source_label: a.source.describe(),
            degrees: a.degree.clone(),
            levels: a.m.0.clone(),
            family: a.mesh,
            reference: a.reference,
            ref_level: a.ref_level,
            assembler: assembler(a.points)?,
        })
    }
}

pub fn convergence_table(spec: &ConvergeSpec) -> CliResult<Table> {
    let mut header = vec!["alpha".to_string(), "mu".into(), "degree".into()];
    header.extend(level_header(&spec.levels));
    header.push("rate".into());
    let mut table = Table::new(String::new(), header);
    let mut references = BTreeSet::new();
    for &alpha in &spec.alphas {
        for &mu in &spec.mus {
            let problem = ProblemSpec::new(alpha, mu.resolve(alpha), spec.q.clone(), spec.f.clone())?;
            let mut cache = ReferenceCache::new();
            for &degree in &spec.degrees {
                log(format!("converge alpha={alpha} mu={} {degree} m={:?}", mu_label(&problem), spec.levels));
                let mut study = SourceStudy::new(spec.source_label.clone(), problem.clone(), degree, spec.family, spec.levels.clone());
                study.reference = spec.reference;
                study.reference_level = spec.ref_level;
                study.assembler = spec.assembler.clone();
                let report = convergence_study_cached(&study, &mut cache)?;
                references.insert(report.reference.clone());
                let mut row = vec![Cell::text(format!("{alpha}")), Cell::text(mu_label(&problem)), Cell::text(degree.to_string())];
                row.extend(report.errors.iter().map(|&e| Cell::Sci(e)));
                row.push(Cell::Rate { observed: report.final_rate(), theory: report.theoretical });
                table.push(row);
            }
        }
    }
    table.caption = format!(
        "L2 error of u - u_h, {}, q = {}, {}; reference: {}; rate = final empirical rate (predicted)",
        spec.source_label,
        spec.q,
        mesh_label(spec.family),
        references.into_iter().collect::<Vec<_>>().join(", ")
    );
    Ok(table)
}

/// One eigenvalue table: several degrees sharing a P2 reference.
#[derive(Debug, Clone)]
pub struct EigenSpec {
    pub alpha: f64,
    pub mu: Mu,
    pub q: FunctionExpr,
    pub runs: Vec<(Degree, Vec<u32>)>,
    pub family: MeshFamily,
    pub count: usize,
    pub functions: usize,
    pub ref_level: u32,
    pub assembler: Assembler,
}

impl EigenSpec {
    fn from_args(a: &EigenArgs) -> CliResult<Self> {
        Ok(Self {
            alpha: single(&a.problem.alpha, "alpha", "eigen")?,
            mu: single(&a.problem.mu, "mu", "eigen")?,
            q: a.problem.q.clone(),
            runs: vec![(a.degree, a.m.0.clone())],
            family: a.mesh,
            count: a.count as usize,
            functions: a.functions as usize,
            ref_level: a.ref_level,
            assembler: assembler(a.points)?,
        })
    }
}

pub fn eigen_table(spec: &EigenSpec) -> CliResult<Table> {
    if spec.functions > spec.count {
        return Err(CliError::Usage(format!("--functions {} exceeds --count {}", spec.functions, spec.count)));
    }
    let finest = spec.runs.iter().flat_map(|(_, l)| l.iter().copied()).max().unwrap_or(0);
    if spec.ref_level > 20 || spec.ref_level <= finest {
        return Err(CliError::Usage(format!("--ref-level {} must exceed every level and be at most 20", spec.ref_level)));
    }
    let problem = ProblemSpec::eigen(spec.alpha, spec.mu.resolve(spec.alpha), spec.q.clone())?;
    let mut base = EigenStudy::new("eigen", problem.clone(), Degree::P2, Vec::new());
    base.family = spec.family;
    base.count = spec.count;
    base.functions = spec.functions;
    base.reference_elements = spec.family.elements(spec.ref_level);
    base.options.assembler = spec.assembler.clone();
    log(format!("eigen reference: P2 with {} elements", base.reference_elements));
    let reference = eigen_reference(&base)?;

    let all_levels: Vec<u32> = spec.runs.iter().flat_map(|(_, l)| l.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut header = vec!["degree".to_string(), "quantity".into(), "reference".into()];
    header.extend(level_header(&all_levels));
    header.push("rate".into());
    let mut table = Table::new(String::new(), header);
    let mut all_real = true;
    for (degree, levels) in &spec.runs {
        log(format!("eigen {degree} m={levels:?}"));
        let mut study = base.clone();
        study.degree = *degree;
        study.levels = levels.clone();
        let report = eigen_study_with_reference(&study, &reference)?;
        all_real &= report.all_real;
        let spread = |errs: &[f64]| -> Vec<Cell> {
            all_levels
                .iter()
                .map(|m| levels.iter().position(|l| l == m).map_or(Cell::Empty, |k| Cell::Sci(errs[k])))
                .collect()
        };
        let rate = |r: &[Option<f64>]| match r.last().copied().flatten() {
            Some(v) => Cell::Fixed(v, 2),
            None => Cell::text("--"),
        };
        for i in 0..spec.count {
            let lam = report.lambda_ref[i];
            let value = if lam.im == 0.0 { Cell::Fixed(lam.re, 6) } else { Cell::text(format!("{:.6}{:+.6}i", lam.re, lam.im)) };
            let mut row = vec![Cell::text(degree.to_string()), Cell::text(format!("lambda_{}", i + 1)), value];
            row.extend(spread(&report.lambda_errors[i]));
            row.push(rate(&report.lambda_rates[i]));
            table.push(row);
        }
        for i in 0..spec.functions {
            let mut row = vec![Cell::text(degree.to_string()), Cell::text(format!("u_{}", i + 1)), Cell::Empty];
            row.extend(spread(&report.function_errors[i]));
            row.push(rate(&report.function_rates[i]));
            table.push(row);
        }
    }
    table.caption = format!(
        "Eigenvalue errors |lambda - lambda_h| and L2 errors of normalized eigenfunctions, alpha = {}, mu = {}, q = {}, {}; reference: P2, h = 1/{}; all eigenvalues real: {}",
        spec.alpha,
        mu_label(&problem),
        spec.q,
        mesh_label(spec.family),
        base.reference_elements,
        if all_real { "yes" } else { "no" }
    );
    Ok(table)
}

pub fn condition_table(alphas: &[f64], mus: &[Mu], q: &FunctionExpr, levels: &[u32]) -> CliResult<Table> {
    let mut header = vec!["alpha".to_string(), "mu".into(), "kind".into()];
    header.extend(level_header(levels));
    let mut table = Table::new(
        format!("Condition numbers of the P1 system, q = {q}, h = 1/2^m; P: preconditioned by the Laplacian block, W: without"),
        header,
    );
    for &alpha in alphas {
        for &mu in mus {
            let problem = ProblemSpec::eigen(alpha, mu.resolve(alpha), q.clone())?;
            log(format!("cond alpha={alpha} mu={} m={levels:?}", mu_label(&problem)));
            let rows = condition_study(&problem, levels)?;
            for (kind, pick) in [("P", true), ("W", false)] {
                let mut row = vec![Cell::text(format!("{alpha}")), Cell::text(mu_label(&problem)), Cell::text(kind)];
                row.extend(rows.iter().map(|r| Cell::Sci(if pick { r.kappa_pre } else { r.kappa_a })));
                table.push(row);
            }
        }
    }
    Ok(table)
}

pub fn converge(a: &ConvergeArgs) -> CliResult<Table> {
    convergence_table(&ConvergeSpec::from_args(a)?)
}

pub fn eigen(a: &EigenArgs) -> CliResult<Table> {
    eigen_table(&EigenSpec::from_args(a)?)
}

pub fn cond(a: &CondArgs) -> CliResult<Table> {
    condition_table(&a.problem.alpha, &a.problem.mu, &a.problem.q, &a.m.0)
}

fn single_problem(p: &ProblemArgs, f: FunctionExpr, cmd: &str) -> CliResult<ProblemSpec> {
    let alpha = single(&p.alpha, "alpha", cmd)?;
    let mu = single(&p.mu, "mu", cmd)?;
    Ok(ProblemSpec::new(alpha, mu.resolve(alpha), p.q.clone(), f)?)
}

pub fn solve(a: &SolveArgs) -> CliResult<Table> {
    let problem = single_problem(&a.problem, a.source.expr(), "solve")?;
    let n = a.mesh.elements(a.m);
    let space = FeSpace::uniform(n, a.degree)?;
    let sol = solve_source_with(&problem, &space, &assembler(a.points)?)?;
    log(format!(
        "solved {} on {n} elements: relative residual {:.2e}, (D^(2-alpha) w_h)(1) = {:.6e}",
        a.degree,
        sol.residual,
        sol.field.boundary_value()
    ));
    let exact = if problem.q().is_zero() { exact_solution_q0(problem.f(), problem.alpha()).ok() } else { None };
    let mut header = vec!["x".to_string(), "w_h".into(), "u_h".into()];
    if exact.is_some() {
        header.extend(["u".to_string(), "|u - u_h|".into()]);
    }
    let mut table = Table::new(
        format!(
            "Solution for alpha = {}, mu = {}, q = {}, {}, {} on {n} elements",
            problem.alpha(),
            mu_label(&problem),
            problem.q(),
            a.source.describe(),
            a.degree
        ),
        header,
    );
    let last = (a.samples - 1) as f64;
    for k in 0..a.samples {
        let x = k as f64 / last;
        let uh = sol.field.u(x);
        let mut row = vec![Cell::Fixed(x, 4), Cell::Sci(sol.field.w(x)), Cell::Sci(uh)];
        if let Some(u) = &exact {
            let ux = if x > 0.0 { u.eval(x) } else { 0.0 };
            row.extend([Cell::Sci(ux), Cell::Sci((ux - uh).abs())]);
        }
        table.push(row);
    }
    Ok(table)
}
