//! Singular values by one-sided (Hestenes) Jacobi on the triangular factor
//! of a Householder QR.

use super::{dot, DenseMatrix};
use crate::error::{invalid, Error, Result};

const MAX_DIM: usize = 3000;
const MAX_SWEEPS: usize = 80;

/// Upper-triangular `R` with `A = Q R`, returned row by row.
fn householder_r(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    // work on columns for contiguous access
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for k in 0..n.min(m) {
        let norm = super::norm2(&cols[k][k..]);
        if norm == 0.0 {
            continue;
        }
        let alpha = -cols[k][k].signum() * norm;
        let mut v = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        if vtv == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let s = 2.0 * dot(&v, &col[k..]) / vtv;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        cols[k][k] = alpha;
        cols[k][k + 1..].iter_mut().for_each(|x| *x = 0.0);
    }
    (0..n.min(m)).map(|i| (0..n).map(|j| if j >= i { cols[j][i] } else { 0.0 }).collect()).collect()
}

/// Singular values in descending order.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows().max(a.cols()) > MAX_DIM {
        return Err(Error::ResourceLimit(format!("SVD limited to dimension {MAX_DIM}")));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let src = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    // rows of R are the columns of R^T, whose singular values equal A's
    let mut w = householder_r(&src);
    let n = w.len();
    let mut norms: Vec<f64> = w.iter().map(|r| dot(r, r)).collect();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
            }
        }
        // refresh to keep the cached norms from drifting
        for (nrm, row) in norms.iter_mut().zip(&w) {
            *nrm = dot(row, row);
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::ConvergenceFailure(format!("Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")));
    }
    let mut sv: Vec<f64> = norms.iter().map(|v| v.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// 2-norm condition number; `+inf` for a numerically singular matrix.
pub fn cond2(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(invalid(format!("cond2 needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if a.rows() == 0 {
        return Err(invalid("cond2 of an empty matrix"));
    }
    let sv = singular_values(a)?;
    let (max, min) = (sv[0], *sv.last().unwrap());
    if min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reflect(n: usize, seed: &mut u64) -> DenseMatrix {
        let v: Vec<f64> = (0..n)
            .map(|_| {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let mut h = DenseMatrix::identity(n);
        h.add_outer(-2.0 / dot(&v, &v), &v, &v);
        h
    }

    #[test]
    fn simple_condition_numbers() {
        assert_relative_eq!(cond2(&DenseMatrix::identity(5)).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(cond2(&DenseMatrix::from_diag(&[10.0, 0.1])).unwrap(), 100.0, max_relative = 1e-14);
        let sing = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(cond2(&sing).unwrap() > 1e15);
        assert!(cond2(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn laplacian_against_spectrum() {
        let n = 31;
        let h = 1.0 / 32.0;
        let lap = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 / h,
            1 => -1.0 / h,
            _ => 0.0,
        });
        let theta = std::f64::consts::PI / (n + 1) as f64;
        let want = (1.0 - (n as f64 * theta).cos()) / (1.0 - theta.cos());
        assert_relative_eq!(cond2(&lap).unwrap(), want, max_relative = 1e-6);
    }

    #[test]
    fn recovers_prescribed_singular_values() {
        let mut seed = 9;
        let n = 25;
        let sigma: Vec<f64> = (0..n).map(|k| 10f64.powf(-(k as f64) / 4.0)).collect();
        let a = reflect(n, &mut seed)
            .matmul(&DenseMatrix::from_diag(&sigma))
            .unwrap()
            .matmul(&reflect(n, &mut seed))
            .unwrap();
        let sv = singular_values(&a).unwrap();
        for (g, w) in sv.iter().zip(&sigma) {
            assert_relative_eq!(*g, *w, max_relative = 1e-9);
        }
        let mut scaled = a.clone();
        scaled.scale(37.5);
        assert_relative_eq!(cond2(&scaled).unwrap(), cond2(&a).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn rectangular_input() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
        let sv = singular_values(&a).unwrap();
        assert_relative_eq!(sv[0], 4.0, max_relative = 1e-15);
        assert_relative_eq!(sv[1], 3.0, max_relative = 1e-15);
    }
}
