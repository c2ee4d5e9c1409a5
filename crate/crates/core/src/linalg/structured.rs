//! Direct solver for `H + u v^T` where `H[i][j] = 0` for `j > i + p`.
//!
//! The systems from the transformed problem have this shape: the nonlocal
//! block is causal (lower triangular up to the element overlap) and the
//! boundary term is rank one. Eliminating on `H^T`, whose lower bandwidth
//! is `p`, with pivot search over `p + 1` rows costs O(p n^2) instead of
//! O(n^3).

use super::{DenseMatrix, Scalar};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct BandedLu<T = f64> {
    n: usize,
    p: usize,
    /// Eliminated `H^T`: `U` on and above the diagonal, multipliers in the band below.
    t: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    /// Factors `H` given entrywise; entries with `j > i + p` are never read.
    pub fn factor_with<F: FnMut(usize, usize) -> T>(n: usize, p: usize, mut entry: F) -> Result<Self> {
        let mut t = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                // T[r][c] = H[c][r]
                t.push(if r > c + p { T::zero() } else { entry(c, r) });
            }
        }
        Self::factor_transposed(n, p, t)
    }

    fn factor_transposed(n: usize, p: usize, mut t: Vec<T>) -> Result<Self> {
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + p).min(n - 1);
            let (mut best_row, mut best) = (k, t[k * n + k].modulus());
            for r in k + 1..=last {
                let v = t[r * n + k].modulus();
                if v > best {
                    best_row = r;
                    best = v;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { column: k, context: " in structured factorization".into() });
            }
            piv[k] = best_row;
            if best_row != k {
                for c in k..n {
                    t.swap(k * n + c, best_row * n + c);
                }
            }
            let (head, tail) = t.split_at_mut((k + 1) * n);
            let prow = &head[k * n..];
            let pivot = prow[k];
            for r in k + 1..=last {
                let row = &mut tail[(r - k - 1) * n..(r - k) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != T::zero() {
                    for c in k + 1..n {
                        let u = prow[c];
                        row[c] -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, p, t, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.p
    }

    /// Solves `H x = b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(invalid(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        // U^T w = b, column-oriented so rows of T are read contiguously
        let mut w = b.to_vec();
        for j in 0..n {
            let row = &self.t[j * n..(j + 1) * n];
            let wj = w[j] / row[j];
            w[j] = wj;
            if wj != T::zero() {
                for i in j + 1..n {
                    w[i] -= row[i] * wj;
                }
            }
        }
        // undo the eliminations in reverse order
        for k in (0..n).rev() {
            let last = (k + self.p).min(n - 1);
            let mut s = w[k];
            for r in k + 1..=last {
                s -= self.t[r * n + k] * w[r];
            }
            w[k] = s;
            w.swap(k, self.piv[k]);
        }
        Ok(w)
    }
}

impl BandedLu<f64> {
    /// Factors a dense `H` after checking its upper bandwidth.
    pub fn factor(h: &DenseMatrix, p: usize) -> Result<Self> {
        if !h.is_square() {
            return Err(invalid("structured factorization needs a square matrix"));
        }
        let bw = h.upper_bandwidth();
        if bw > p {
            return Err(invalid(format!("matrix has upper bandwidth {bw}, expected at most {p}")));
        }
        Self::factor_transposed(h.rows(), p, h.transpose().as_slice().to_vec())
    }
}

/// Solver for `H + u v^T` by Sherman-Morrison on top of [`BandedLu`].
#[derive(Debug, Clone)]
pub struct RankOneSolver<T = f64> {
    lu: BandedLu<T>,
    v: Vec<T>,
    z: Vec<T>,
    denom: T,
}

impl<T: Scalar> RankOneSolver<T> {
    pub fn new(lu: BandedLu<T>, u: &[T], v: &[T]) -> Result<Self> {
        let n = lu.dim();
        if u.len() != n || v.len() != n {
            return Err(invalid("rank-one vectors do not match the matrix size"));
        }
        let z = lu.solve(u)?;
        let mut denom = T::one();
        let mut mag = 1.0;
        for (a, b) in v.iter().zip(&z) {
            denom += *a * *b;
            mag += (*a * *b).modulus();
        }
        if denom.modulus() <= 1e-14 * mag {
            return Err(Error::SingularMatrix { column: n, context: " (rank-one update cancels)".into() });
        }
        Ok(Self { lu, v: v.to_vec(), z, denom })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut y = self.lu.solve(b)?;
        let mut vy = T::zero();
        for (a, c) in self.v.iter().zip(&y) {
            vy += *a * *c;
        }
        let s = vy / self.denom;
        for (yi, zi) in y.iter_mut().zip(&self.z) {
            *yi -= s * *zi;
        }
        Ok(y)
    }
}
