//! Discrete fractional Sturm-Liouville problem `A w = lambda M w`.

use num_complex::Complex64;

use super::SolutionField;
use crate::assemble::{AssembledSystem, Assembler};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eig_dense, shift_invert_eigs_with, BandedLu, DenseMatrix, RankOneSolver, Scalar, ShiftInvertOptions};
use crate::mesh::FeSpace;
use crate::oracle::ErrorGrid;
use crate::problem::ProblemSpec;

/// Largest eigenpair count per call.
pub const MAX_COUNT: usize = 16;

/// Which eigensolver runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Dense QR up to `dense_limit` unknowns, shift-invert beyond.
    #[default]
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub method: EigenMethod,
    /// Shift; pairs nearest to it are returned.
    pub sigma: f64,
    pub dense_limit: usize,
    pub tol: f64,
    pub assembler: Assembler,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { method: EigenMethod::Auto, sigma: 0.0, dense_limit: 1000, tol: 1e-12, assembler: Assembler::default() }
    }
}

/// One eigenpair with its reconstructed eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    /// Coefficients of `w_h`, unit Euclidean norm.
    pub w: Vec<Complex64>,
    /// `||A w - lambda M w|| / ((||A|| + |lambda| ||M||) ||w||)`.
    pub residual: f64,
    real: bool,
    field: Option<SolutionField>,
}

impl EigenPair {
    /// `|Im lambda| <= 1e-8 |lambda|`.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `u_h` scaled to unit L2 norm and positive at `h/2`; real pairs only.
    pub fn field(&self) -> Option<&SolutionField> {
        self.field.as_ref()
    }

    pub fn u(&self, x: f64) -> Option<f64> {
        self.field.as_ref().map(|f| f.u(x))
    }

    /// Real parts of the `w_h` coefficients.
    pub fn w_coeffs(&self) -> Vec<f64> {
        self.w.iter().map(|z| z.re).collect()
    }
}

struct Operators {
    system: AssembledSystem,
    b1: DenseMatrix,
    g: Vec<f64>,
    m: Vec<f64>,
}

impl Operators {
    fn new(problem: &ProblemSpec, space: &FeSpace, assembler: &Assembler) -> Result<Self> {
        let system = assembler.system(space, problem)?;
        let (b1, g, m) = assembler.recon_mass_parts(space, problem.order(), problem.mu())?;
        Ok(Self { system, b1, g, m })
    }

    fn n(&self) -> usize {
        self.system.dim()
    }

    fn m_mul(&self, x: &[f64]) -> Vec<f64> {
        let gx: f64 = self.g.iter().zip(x).map(|(a, b)| a * b).sum();
        let mut y = self.b1.matvec(x);
        y.iter_mut().zip(&self.m).for_each(|(v, mj)| *v -= mj * gx);
        y
    }

    fn norms(&self) -> (f64, f64) {
        let n = self.n();
        let p = self.system.bandwidth();
        let g1: f64 = self.g.iter().map(|v| v.abs()).sum();
        let rmax = self.system.r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mmax = self.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lap = (0..n)
            .map(|i| (i.saturating_sub(p)..(i + p + 1).min(n)).map(|j| self.system.laplacian.get(i, j).abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        (lap + self.system.nonlocal.norm_inf() + rmax * g1, self.b1.norm_inf() + mmax * g1)
    }

    /// Solver for `tau (A - s M) = tau (L + B - s B_1) + tau (r + s m) g^T`
    /// with `tau = 1 / laplacian.scale()`, so the leading block is stored
    /// exactly; right-hand sides must be multiplied by [`Operators::tau`].
    fn shifted<T: Scalar>(&self, s: T) -> Result<RankOneSolver<T>> {
        let n = self.n();
        let p = self.system.bandwidth();
        let tau = self.tau();
        let lap = &self.system.laplacian;
        let lu = BandedLu::factor_with(n, p, |i, j| {
            T::from_real(lap.unscaled(i, j))
                + T::from_real(tau) * (T::from_real(self.system.nonlocal[(i, j)]) - s * T::from_real(self.b1[(i, j)]))
        })?;
        let u: Vec<T> = self
            .system
            .r
            .iter()
            .zip(&self.m)
            .map(|(r, m)| T::from_real(tau) * (T::from_real(*r) + s * T::from_real(*m)))
            .collect();
        let v: Vec<T> = self.g.iter().map(|g| T::from_real(*g)).collect();
        RankOneSolver::new(lu, &u, &v)
    }

    fn tau(&self) -> f64 {
        1.0 / self.system.laplacian.scale()
    }

    fn residual(&self, lambda: Complex64, v: &[Complex64], a_norm: f64, m_norm: f64) -> f64 {
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let (ar, ai) = (self.system.apply(&re), self.system.apply(&im));
        let (mr, mi) = (self.m_mul(&re), self.m_mul(&im));
        let r2: f64 = (0..v.len())
            .map(|i| (Complex64::new(ar[i], ai[i]) - lambda * Complex64::new(mr[i], mi[i])).norm_sqr())
            .sum();
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        r2.sqrt() / ((a_norm + lambda.norm() * m_norm) * vn)
    }
}

/// The `count` eigenpairs nearest 0, ascending by `|lambda|`.
pub fn solve_fslp(problem: &ProblemSpec, space: &FeSpace, count: usize) -> Result<Vec<EigenPair>> {
    solve_fslp_with(problem, space, count, &EigenOptions::default())
}

pub fn solve_fslp_with(problem: &ProblemSpec, space: &FeSpace, count: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    if count == 0 || count > MAX_COUNT {
        return Err(invalid(format!("eigenpair count must be in 1..={MAX_COUNT}, got {count}")));
    }
    let n = space.dof_count();
    if n < 4 * count {
        return Err(invalid(format!("{count} eigenpairs need at least {} unknowns, the space has {n}", 4 * count)));
    }
    let ops = Operators::new(problem, space, &opts.assembler)?;
    let (a_norm, m_norm) = ops.norms();
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => n <= opts.dense_limit,
    };
    let raw = if dense {
        dense_pairs(&ops, count, opts.sigma, a_norm, m_norm)
    } else {
        iterative_pairs(&ops, count, opts, a_norm, m_norm)
    }
    .map_err(|e| match e {
        Error::ConvergenceFailure(msg) => Error::ConvergenceFailure(format!("{msg} (h = {:.3e}, {n} unknowns)", space.mesh().max_h())),
        other => other,
    })?;
    let grid = ErrorGrid::new(space.mesh().num_elements(), problem.alpha())?;
    let probe = 0.5 * space.mesh().h(0);
    raw.into_iter()
        .map(|(lambda, w, residual)| {
            let real = lambda.im.abs() <= 1e-8 * lambda.norm();
            let field = if real {
                let coeffs: Vec<f64> = w.iter().map(|z| z.re).collect();
                let f = SolutionField::new(space.clone(), coeffs, *problem.order(), problem.mu())?;
                let norm = grid.norm(&grid.sample_field(&f));
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::Numeric(format!("eigenfunction for lambda = {lambda} has L2 norm {norm}")));
                }
                let sign = if f.u(probe) < 0.0 { -1.0 } else { 1.0 };
                Some(f.scaled(sign / norm)?)
            } else {
                None
            };
            Ok(EigenPair { lambda, w, residual, real, field })
        })
        .collect()
}

type RawPair = (Complex64, Vec<Complex64>, f64);

/// Eigenvalues of `(A - sigma M)^{-1} M` by QR, eigenvectors by complex
/// inverse iteration.
fn dense_pairs(ops: &Operators, count: usize, sigma: f64, a_norm: f64, m_norm: f64) -> Result<Vec<RawPair>> {
    let n = ops.n();
    let solver = ops.shifted(sigma)?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut rhs = ops.m_mul(&unit(n, j));
        rhs.iter_mut().for_each(|v| *v *= ops.tau());
        cols.push(solver.solve(&rhs)?);
    }
    let t = DenseMatrix::from_fn(n, n, |i, j| cols[j][i]);
    drop(cols);
    let mut theta = eig_dense(&t)?;
    let big = theta.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    theta.retain(|z| z.norm() > 1e-13 * big);
    if theta.len() < count {
        return Err(Error::ConvergenceFailure(format!("only {} finite eigenvalues found", theta.len())));
    }
    // largest |theta| are nearest the shift
    theta.reverse();
    let mut lambdas: Vec<Complex64> = theta.iter().take(count).map(|th| Complex64::from_real(sigma) + th.inv()).collect();
    crate::linalg::sort_spectrum(&mut lambdas);
    let mut out = Vec::with_capacity(count);
    for lambda in lambdas {
        let v = inverse_iteration(ops, lambda)?;
        let res = ops.residual(lambda, &v, a_norm, m_norm);
        if !(res <= 1e-8) {
            return Err(Error::ConvergenceFailure(format!("eigenpair lambda = {lambda} has relative residual {res:.3e}")));
        }
        out.push((lambda, v, res));
    }
    Ok(out)
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

fn inverse_iteration(ops: &Operators, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = ops.n();
    let mut shift = lambda * (1.0 + 1e-13);
    let solver = loop {
        match ops.shifted(shift) {
            Ok(s) => break s,
            Err(Error::SingularMatrix { .. }) if (shift - lambda).norm() < 1e-6 * lambda.norm().max(1.0) => {
                shift += lambda * 1e-10 + Complex64::new(1e-12, 0.0);
            }
            Err(e) => return Err(e),
        }
    };
    let mut v: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_real(((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).sin() + 0.1)).collect();
    for _ in 0..4 {
        let mv: Vec<f64> = ops.m_mul(&v.iter().map(|z| z.re).collect::<Vec<_>>());
        let mi: Vec<f64> = ops.m_mul(&v.iter().map(|z| z.im).collect::<Vec<_>>());
        let rhs: Vec<Complex64> = mv.iter().zip(&mi).map(|(a, b)| Complex64::new(*a, *b)).collect();
        v = solver.solve(&rhs)?;
        normalize(&mut v)?;
    }
    Ok(v)
}

/// Unit Euclidean norm, first significant entry real and positive.
fn normalize(v: &mut [Complex64]) -> Result<()> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Numeric("inverse iteration produced a degenerate vector".into()));
    }
    let big = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let pivot = v.iter().find(|z| z.norm() > 1e-3 * big).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.iter_mut().for_each(|z| *z = *z * phase / norm);
    Ok(())
}

fn iterative_pairs(ops: &Operators, count: usize, opts: &EigenOptions, a_norm: f64, m_norm: f64) -> Result<Vec<RawPair>> {
    let solver = ops.shifted(opts.sigma)?;
    let si = ShiftInvertOptions { tol: opts.tol, a_norm, m_norm, ..Default::default() };
    let pairs = shift_invert_eigs_with(
        ops.n(),
        count,
        opts.sigma,
        |b| solver.solve(&b.iter().map(|v| v * ops.tau()).collect::<Vec<_>>()),
        |x| ops.m_mul(x),
        |x| ops.system.apply(x),
        &si,
    )?;
    Ok(pairs.into_iter().map(|p| (p.lambda, p.vector, p.relative_residual)).collect())
}
