//! Eigenpairs of `A w = lambda M w` nearest a shift by block inverse
//! iteration on `T = (A - sigma M)^{-1} M` with Rayleigh-Ritz extraction.

use num_complex::Complex64;

use super::eig::{eig_dense, sort_spectrum};
use super::{dot, lu_factor, norm2, DenseMatrix, LuFactors, Scalar};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct ShiftInvertOptions {
    /// Block size; defaults to `max(2 count, count + 8)` capped at `n`.
    pub block: Option<usize>,
    /// Relative Ritz residual at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Norm estimates for the final residual check.
    pub a_norm: f64,
    pub m_norm: f64,
}

impl Default for ShiftInvertOptions {
    fn default() -> Self {
        Self { block: None, tol: 1e-12, max_iter: 500, a_norm: 1.0, m_norm: 1.0 }
    }
}

/// One eigenpair; `vector` has unit Euclidean norm and its first entry of
/// significant size is real and positive.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub lambda: Complex64,
    pub vector: Vec<Complex64>,
    /// `||A w - lambda M w|| / ((||A|| + |lambda| ||M||) ||w||)`.
    pub relative_residual: f64,
}

impl EigenSolution {
    pub fn is_real(&self, tol: f64) -> bool {
        self.lambda.im.abs() <= tol * self.lambda.norm()
    }

    /// Real part of the eigenvector.
    pub fn real_vector(&self) -> Vec<f64> {
        self.vector.iter().map(|z| z.re).collect()
    }
}

/// Normalizes to unit length with the first significant component real positive.
pub(crate) fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let big = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let pivot = v.iter().find(|z| z.norm() > 1e-3 * big).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
}

/// Modified Gram-Schmidt, applied twice; columns stored as rows of `x`.
fn orthonormalize(x: &mut [Vec<f64>]) -> Result<()> {
    for k in 0..x.len() {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = x.split_at_mut(k);
                let c = dot(&done[j], &rest[0]);
                for (a, b) in rest[0].iter_mut().zip(&done[j]) {
                    *a -= c * b;
                }
            }
        }
        let nrm = norm2(&x[k]);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::ConvergenceFailure(format!("subspace basis lost rank at column {k}")));
        }
        x[k].iter_mut().for_each(|v| *v /= nrm);
    }
    Ok(())
}

/// Eigenvector of the small dense `h` for eigenvalue `theta` by inverse iteration.
fn small_eigvec(h: &DenseMatrix, theta: Complex64) -> Result<Vec<Complex64>> {
    let b = h.rows();
    let scale = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut shift = theta + Complex64::new(1e-13 * scale, 0.0);
    for _attempt in 0..3 {
        let mat: Vec<Complex64> = (0..b * b)
            .map(|k| {
                let (i, j) = (k / b, k % b);
                Complex64::from_real(h[(i, j)]) - if i == j { shift } else { Complex64::zero() }
            })
            .collect();
        if let Ok(lu) = LuFactors::factor(b, mat) {
            let mut v: Vec<Complex64> = (0..b).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.0)).collect();
            for _ in 0..3 {
                v = lu.solve(&v)?;
                normalize_phase(&mut v);
            }
            return Ok(v);
        }
        shift += Complex64::new(1e-10 * scale, 0.0);
    }
    Err(Error::ConvergenceFailure("inverse iteration on the projected matrix failed".into()))
}

/// Operator form: `solve(b)` applies `(A - sigma M)^{-1}`, `m_mul` and `a_mul`
/// apply `M` and `A`. Returns the `count` eigenpairs nearest `sigma`,
/// ordered by ascending `|lambda|` with ties broken by the imaginary part.
pub fn shift_invert_eigs_with<S, Mm, Am>(
    n: usize,
    count: usize,
    sigma: f64,
    solve: S,
    m_mul: Mm,
    a_mul: Am,
    opts: &ShiftInvertOptions,
) -> Result<Vec<EigenSolution>>
where
    S: Fn(&[f64]) -> Result<Vec<f64>>,
    Mm: Fn(&[f64]) -> Vec<f64>,
    Am: Fn(&[f64]) -> Vec<f64>,
{
    if count == 0 || count > 16 {
        return Err(invalid(format!("eigenpair count must be in 1..=16, got {count}")));
    }
    if count > n {
        return Err(invalid(format!("requested {count} eigenpairs of a size-{n} problem")));
    }
    let b = opts.block.unwrap_or((2 * count).max(count + 8)).clamp(count, n);
    let mut x: Vec<Vec<f64>> = (0..b)
        .map(|k| {
            (0..n)
                .map(|j| (((j + 1) * (k + 1)) as f64 * std::f64::consts::PI / (n + 1) as f64).sin())
                .collect()
        })
        .collect();
    orthonormalize(&mut x)?;
    let mut last_res = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let y: Vec<Vec<f64>> = x.iter().map(|xk| solve(&m_mul(xk))).collect::<Result<_>>()?;
        // projected operator H = X^T Y
        let h = DenseMatrix::from_fn(b, b, |i, j| dot(&x[i], &y[j]));
        let mut theta = eig_dense(&h)?;
        // largest |theta| first = nearest to the shift
        theta.reverse();
        let wanted: Vec<Complex64> = theta.into_iter().take(count).collect();
        let mut worst: f64 = 0.0;
        let mut pairs = Vec::with_capacity(count);
        for &th in &wanted {
            let s = small_eigvec(&h, th)?;
            // Ritz vector v = X s and T v = Y s
            let mut v = vec![Complex64::zero(); n];
            let mut tv = vec![Complex64::zero(); n];
            for k in 0..b {
                for i in 0..n {
                    v[i] += s[k] * x[k][i];
                    tv[i] += s[k] * y[k][i];
                }
            }
            let r: f64 = v.iter().zip(&tv).map(|(a, c)| (c - th * a).norm_sqr()).sum::<f64>().sqrt();
            let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r / (th.norm() * vn).max(f64::MIN_POSITIVE));
            pairs.push((th, v));
        }
        last_res = worst;
        if worst <= opts.tol || iter + 1 == opts.max_iter {
            let mut out = Vec::with_capacity(count);
            for (th, mut v) in pairs {
                if th.norm() == 0.0 {
                    return Err(Error::ConvergenceFailure("zero Ritz value: M is singular on the subspace".into()));
                }
                let lambda = Complex64::from_real(sigma) + th.inv();
                normalize_phase(&mut v);
                let rel = true_residual(&v, lambda, &a_mul, &m_mul, opts);
                out.push(EigenSolution { lambda, vector: v, relative_residual: rel });
            }
            if worst > opts.tol {
                return Err(Error::ConvergenceFailure(format!(
                    "subspace iteration stagnated after {} sweeps; worst Ritz residual {worst:.3e}, residuals {:?}",
                    iter + 1,
                    out.iter().map(|p| p.relative_residual).collect::<Vec<_>>()
                )));
            }
            if let Some(bad) = out.iter().find(|p| !(p.relative_residual <= 1e-8)) {
                return Err(Error::ConvergenceFailure(format!(
                    "eigenpair lambda = {} has relative residual {:.3e}",
                    bad.lambda, bad.relative_residual
                )));
            }
            let mut lambdas: Vec<Complex64> = out.iter().map(|p| p.lambda).collect();
            sort_spectrum(&mut lambdas);
            out.sort_by_key(|p| lambdas.iter().position(|l| *l == p.lambda).unwrap());
            return Ok(out);
        }
        x = y;
        orthonormalize(&mut x)?;
    }
    Err(Error::ConvergenceFailure(format!("no convergence; last Ritz residual {last_res:.3e}")))
}

fn true_residual<Am, Mm>(v: &[Complex64], lambda: Complex64, a_mul: &Am, m_mul: &Mm, opts: &ShiftInvertOptions) -> f64
where
    Am: Fn(&[f64]) -> Vec<f64>,
    Mm: Fn(&[f64]) -> Vec<f64>,
{
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let (ar, ai) = (a_mul(&re), a_mul(&im));
    let (mr, mi) = (m_mul(&re), m_mul(&im));
    let mut r2 = 0.0;
    for i in 0..v.len() {
        let av = Complex64::new(ar[i], ai[i]);
        let mv = Complex64::new(mr[i], mi[i]);
        r2 += (av - lambda * mv).norm_sqr();
    }
    let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    r2.sqrt() / ((opts.a_norm + lambda.norm() * opts.m_norm) * vn)
}

/// Dense convenience: factors `A - sigma M` by LU and iterates.
pub fn shift_invert_eigs(a: &DenseMatrix, m: &DenseMatrix, count: usize, sigma: f64) -> Result<Vec<EigenSolution>> {
    if !a.is_square() || a.rows() != m.rows() || a.cols() != m.cols() {
        return Err(invalid("A and M must be square of equal size"));
    }
    let mut shifted = a.clone();
    shifted.add_scaled(-sigma, m);
    let lu = lu_factor(&shifted)?;
    let opts = ShiftInvertOptions {
        a_norm: (a.norm_one() * a.norm_inf()).sqrt(),
        m_norm: (m.norm_one() * m.norm_inf()).sqrt(),
        ..Default::default()
    };
    shift_invert_eigs_with(a.rows(), count, sigma, |b| lu.solve(b), |v| m.matvec(v), |v| a.matvec(v), &opts)
}
