//! Convergence and eigenvalue studies over families of uniform meshes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::assemble::Assembler;
use crate::driver::{solve_fslp_with, solve_source_with, EigenOptions, EigenPair};
use crate::error::{invalid, Error, Result};
use crate::mesh::{Degree, FeSpace};
use crate::oracle::{empirical_rates, exact_solution_q0, theoretical_rate, ConvergenceReport, ErrorGrid, GridSamples};
use crate::problem::ProblemSpec;

/// Uniform mesh families indexed by the level `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeshFamily {
    /// `h = 1/2^m`
    #[default]
    Pow2,
    /// `h = 1/(2^m + 1)`
    Pow2Plus1,
    /// `h = 1/(10 2^m)`
    TenPow2,
}

impl MeshFamily {
    pub fn elements(self, m: u32) -> usize {
        match self {
            MeshFamily::Pow2 => 1 << m,
            MeshFamily::Pow2Plus1 => (1 << m) + 1,
            MeshFamily::TenPow2 => 10 << m,
        }
    }

    /// Default level of the P2 reference: the reference mesh has
    /// `elements(m) 2^(ref - m)` elements.
    pub fn default_reference_level(self) -> u32 {
        match self {
            MeshFamily::Pow2 => 12,
            MeshFamily::Pow2Plus1 => 11,
            MeshFamily::TenPow2 => 7,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            MeshFamily::Pow2 => "pow2",
            MeshFamily::Pow2Plus1 => "pow2plus1",
            MeshFamily::TenPow2 => "ten_pow2",
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pow2" => Ok(MeshFamily::Pow2),
            "pow2plus1" => Ok(MeshFamily::Pow2Plus1),
            "ten_pow2" | "tenpow2" => Ok(MeshFamily::TenPow2),
            other => Err(invalid(format!("unknown mesh family '{other}', expected pow2, pow2plus1 or ten_pow2"))),
        }
    }
}

/// Where the ground truth comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceKind {
    /// Closed form when `q = 0` and the source allows it, fine mesh otherwise.
    #[default]
    Auto,
    Exact,
    FineMesh,
}

/// A source-problem convergence run.
#[derive(Debug, Clone)]
pub struct SourceStudy {
    pub label: String,
    pub problem: ProblemSpec,
    pub degree: Degree,
    pub family: MeshFamily,
    pub levels: Vec<u32>,
    pub reference: ReferenceKind,
    /// Overrides [`MeshFamily::default_reference_level`].
    pub reference_level: Option<u32>,
    pub assembler: Assembler,
}

impl SourceStudy {
    pub fn new(label: impl Into<String>, problem: ProblemSpec, degree: Degree, family: MeshFamily, levels: Vec<u32>) -> Self {
        Self {
            label: label.into(),
            problem,
            degree,
            family,
            levels,
            reference: ReferenceKind::Auto,
            reference_level: None,
            assembler: Assembler::default(),
        }
    }
}

fn check_levels(levels: &[u32]) -> Result<()> {
    if levels.is_empty() {
        return Err(invalid("level range is empty"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("levels must be strictly ascending"));
    }
    Ok(())
}

/// Fine-mesh references sampled on their own mesh, keyed by element count.
/// Valid for one problem only.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    problem: Option<ProblemSpec>,
    entries: HashMap<usize, (ErrorGrid, GridSamples)>,
}

impl ReferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&mut self, problem: &ProblemSpec, n: usize, assembler: &Assembler) -> Result<&(ErrorGrid, GridSamples)> {
        if self.problem.as_ref() != Some(problem) {
            self.entries.clear();
            self.problem = Some(problem.clone());
        }
        if !self.entries.contains_key(&n) {
            let space = FeSpace::uniform(n, Degree::P2)?;
            let sol = solve_source_with(problem, &space, assembler)?;
            let grid = ErrorGrid::new(n, problem.alpha())?;
            let samples = grid.sample_field(&sol.field);
            self.entries.insert(n, (grid, samples));
        }
        Ok(&self.entries[&n])
    }
}

/// True when some window endpoint of the source misses the mesh nodes at a level.
fn source_off_grid(problem: &ProblemSpec, family: MeshFamily, levels: &[u32]) -> bool {
    levels.iter().any(|&m| {
        let n = family.elements(m) as f64;
        problem.f().terms().iter().filter_map(|t| t.window).any(|(l, r)| {
            [l, r].iter().any(|&x| {
                let k = x * n;
                (k - k.round()).abs() > 1e-9
            })
        })
    })
}

pub fn convergence_study(study: &SourceStudy) -> Result<ConvergenceReport> {
    convergence_study_cached(study, &mut ReferenceCache::new())
}

/// As [`convergence_study`], reusing fine-mesh references across calls.
pub fn convergence_study_cached(study: &SourceStudy, cache: &mut ReferenceCache) -> Result<ConvergenceReport> {
    check_levels(&study.levels)?;
    let problem = &study.problem;
    let exact = match study.reference {
        ReferenceKind::FineMesh => None,
        ReferenceKind::Exact | ReferenceKind::Auto if problem.q().is_zero() => match exact_solution_q0(problem.f(), problem.alpha()) {
            Ok(e) => Some(e),
            Err(err) if study.reference == ReferenceKind::Exact => return Err(err),
            Err(_) => None,
        },
        ReferenceKind::Exact => return Err(invalid("a closed-form reference needs q = 0")),
        ReferenceKind::Auto => None,
    };
    let ref_level = study.reference_level.unwrap_or_else(|| study.family.default_reference_level());
    let mut errors = Vec::with_capacity(study.levels.len());
    let mut hs = Vec::with_capacity(study.levels.len());
    let mut fine_sizes = Vec::new();
    for &m in &study.levels {
        let n = study.family.elements(m);
        let space = FeSpace::uniform(n, study.degree)?;
        let sol = solve_source_with(problem, &space, &study.assembler)
            .map_err(|e| annotate(e, &format!("level m = {m}")))?;
        let err = match &exact {
            Some(u) => {
                let grid = ErrorGrid::new(4 * n, problem.alpha())?;
                grid.distance(&grid.sample_field(&sol.field), &grid.sample_fn(|x| u.eval(x)))
            }
            None => {
                if m >= ref_level {
                    return Err(invalid(format!("reference level {ref_level} must exceed every study level (got m = {m})")));
                }
                let nf = n << (ref_level - m);
                if 2 * nf - 1 > 16383 {
                    return Err(Error::ResourceLimit(format!("reference mesh with {nf} elements exceeds the dense limit")));
                }
                fine_sizes.push(nf);
                let (grid, reference) = cache.get(problem, nf, &study.assembler)?;
                grid.distance(&grid.sample_field(&sol.field), reference)
            }
        };
        errors.push(err);
        hs.push(1.0 / n as f64);
    }
    let rates = if errors.len() >= 2 { empirical_rates(&errors, &hs)? } else { Vec::new() };
    fine_sizes.dedup();
    let reference = match (&exact, fine_sizes.as_slice()) {
        (Some(_), _) => "exact".to_string(),
        (None, [one]) => format!("P2, h=1/{one}"),
        (None, _) => format!("P2, h=h_m/2^({ref_level}-m)"),
    };
    Ok(ConvergenceReport {
        label: study.label.clone(),
        alpha: problem.alpha(),
        mu: problem.mu(),
        degree: study.degree,
        levels: study.levels.clone(),
        h: hs,
        errors,
        rates,
        theoretical: theoretical_rate(problem, study.degree, source_off_grid(problem, study.family, &study.levels)),
        reference,
    })
}

fn annotate(e: Error, what: &str) -> Error {
    match e {
        Error::ConvergenceFailure(msg) => Error::ConvergenceFailure(format!("{msg} at {what}")),
        Error::SingularMatrix { column, context } => Error::SingularMatrix { column, context: format!("{context} at {what}") },
        other => other,
    }
}

/// An eigenvalue convergence run.
#[derive(Debug, Clone)]
pub struct EigenStudy {
    pub label: String,
    pub problem: ProblemSpec,
    pub degree: Degree,
    pub family: MeshFamily,
    pub levels: Vec<u32>,
    /// Eigenvalues tracked.
    pub count: usize,
    /// Eigenfunctions tracked (at most `count`).
    pub functions: usize,
    /// Elements of the P2 reference mesh.
    pub reference_elements: usize,
    pub options: EigenOptions,
}

impl EigenStudy {
    pub fn new(label: impl Into<String>, problem: ProblemSpec, degree: Degree, levels: Vec<u32>) -> Self {
        Self {
            label: label.into(),
            problem,
            degree,
            family: MeshFamily::TenPow2,
            levels,
            count: 8,
            functions: 5,
            reference_elements: 1280,
            options: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenReport {
    pub label: String,
    pub alpha: f64,
    pub mu: f64,
    pub degree: Degree,
    pub levels: Vec<u32>,
    pub h: Vec<f64>,
    pub reference: String,
    pub lambda_ref: Vec<Complex64>,
    /// `lambda[level][i]`.
    pub lambda: Vec<Vec<Complex64>>,
    /// `lambda_errors[i][level] = |lambda_i - lambda_{i,h}|`.
    pub lambda_errors: Vec<Vec<f64>>,
    pub lambda_rates: Vec<Vec<Option<f64>>>,
    /// `function_errors[i][level]`, sign-aligned L2 distance of normalized eigenfunctions.
    pub function_errors: Vec<Vec<f64>>,
    pub function_rates: Vec<Vec<Option<f64>>>,
    /// Every computed eigenvalue, reference included, passed the realness test.
    pub all_real: bool,
}

/// Reference eigenpairs for [`eigen_study`].
pub fn eigen_reference(study: &EigenStudy) -> Result<(Vec<EigenPair>, ErrorGrid, Vec<GridSamples>)> {
    let nf = study.reference_elements;
    let space = FeSpace::uniform(nf, Degree::P2)?;
    let pairs = solve_fslp_with(&study.problem, &space, study.count, &study.options)
        .map_err(|e| annotate(e, &format!("reference h = 1/{nf}")))?;
    let grid = ErrorGrid::new(nf, study.problem.alpha())?;
    let samples = pairs.iter().take(study.functions).map(|p| p.field().map(|f| grid.sample_field(f))).collect::<Option<Vec<_>>>();
    Ok((pairs, grid, samples.unwrap_or_default()))
}

pub fn eigen_study(study: &EigenStudy) -> Result<EigenReport> {
    let reference = eigen_reference(study)?;
    eigen_study_with_reference(study, &reference)
}

pub fn eigen_study_with_reference(
    study: &EigenStudy,
    (ref_pairs, grid, ref_samples): &(Vec<EigenPair>, ErrorGrid, Vec<GridSamples>),
) -> Result<EigenReport> {
    check_levels(&study.levels)?;
    if study.functions > study.count {
        return Err(invalid("cannot track more eigenfunctions than eigenvalues"));
    }
    let nf = study.reference_elements;
    let mut all_real = ref_pairs.iter().all(|p| p.is_real());
    let lambda_ref: Vec<Complex64> = ref_pairs.iter().map(|p| p.lambda).collect();
    let mut lambda = Vec::new();
    let mut lambda_errors = vec![Vec::new(); study.count];
    let mut function_errors = vec![Vec::new(); study.functions];
    let mut hs = Vec::new();
    for &m in &study.levels {
        let n = study.family.elements(m);
        if n >= nf {
            return Err(invalid(format!("reference mesh 1/{nf} must be finer than level m = {m}")));
        }
        let space = FeSpace::uniform(n, study.degree)?;
        let pairs = solve_fslp_with(&study.problem, &space, study.count, &study.options)
            .map_err(|e| annotate(e, &format!("level m = {m}")))?;
        all_real &= pairs.iter().all(|p| p.is_real());
        for (i, p) in pairs.iter().enumerate() {
            lambda_errors[i].push((p.lambda - lambda_ref[i]).norm());
        }
        for i in 0..study.functions {
            let err = match (pairs[i].field(), ref_samples.get(i)) {
                (Some(f), Some(r)) => {
                    let mut s = grid.sample_field(f);
                    if grid.inner(&s, r) < 0.0 {
                        s.scale(-1.0);
                    }
                    grid.distance(&s, r)
                }
                _ => f64::NAN,
            };
            function_errors[i].push(err);
        }
        lambda.push(pairs.iter().map(|p| p.lambda).collect());
        hs.push(1.0 / n as f64);
    }
    let rates = |errs: &Vec<Vec<f64>>| -> Result<Vec<Vec<Option<f64>>>> {
        errs.iter().map(|e| if e.len() >= 2 { empirical_rates(e, &hs) } else { Ok(Vec::new()) }).collect()
    };
    Ok(EigenReport {
        label: study.label.clone(),
        alpha: study.problem.alpha(),
        mu: study.problem.mu(),
        degree: study.degree,
        levels: study.levels.clone(),
        h: hs.clone(),
        reference: format!("P2, h=1/{nf}"),
        lambda_ref,
        lambda,
        lambda_rates: rates(&lambda_errors)?,
        lambda_errors,
        function_rates: rates(&function_errors)?,
        function_errors,
        all_real,
    })
}
