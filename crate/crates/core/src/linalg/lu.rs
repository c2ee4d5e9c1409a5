use super::{DenseMatrix, Scalar};
use crate::error::{invalid, Error, Result};

/// `P A = L U` with unit lower `L` and `U` packed in one row-major array.
#[derive(Debug, Clone)]
pub struct LuFactors<T = f64> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    /// Factors the row-major `n x n` matrix in `a`.
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        if a.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, a.len())));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut piv, mut best) = (k, a[k * n + k].modulus());
            for i in k + 1..n {
                let v = a[i * n + k].modulus();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { column: k, context: String::new() });
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let prow = &top[k * n..];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != T::zero() {
                    for j in k + 1..n {
                        let u = prow[j];
                        row[j] -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(invalid(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (l, xj) in row.iter().zip(&x[..i]) {
                s -= *l * *xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        Ok(x)
    }

    /// Product of the pivots with the permutation sign.
    pub fn determinant(&self) -> T {
        let n = self.n;
        let mut d = T::one();
        for i in 0..n {
            d *= self.lu[i * n + i];
        }
        let mut seen = vec![false; n];
        let mut odd = false;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                k = self.perm[k];
                len += 1;
            }
            if len % 2 == 0 {
                odd = !odd;
            }
        }
        if odd {
            -d
        } else {
            d
        }
    }
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors<f64>> {
    if !a.is_square() {
        return Err(invalid(format!("LU needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    LuFactors::factor(a.rows(), a.as_slice().to_vec())
}

pub fn lu_solve(f: &LuFactors<f64>, b: &[f64]) -> Result<Vec<f64>> {
    f.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, DenseMatrix};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn identity_and_small_system() {
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(lu_solve(&f, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = lu_solve(&lu_factor(&a).unwrap(), &[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lu_factor(&a).unwrap().determinant(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
        assert!(lu_factor(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_residuals() {
        let mut seed = 7;
        for &n in &[10usize, 50, 200] {
            for _ in 0..if n == 200 { 5 } else { 30 } {
                let a = DenseMatrix::from_fn(n, n, |_, _| lcg(&mut seed));
                let b: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
                let x = lu_solve(&lu_factor(&a).unwrap(), &b).unwrap();
                let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
                let scale = a.norm_fro() * norm2(&x) + norm2(&b);
                assert!(norm2(&r) <= 1e-11 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn complex_solve() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = vec![one, i, -i, 2.0 * one];
        let f = LuFactors::factor(2, a.clone()).unwrap();
        let x = f.solve(&[one, one]).unwrap();
        let r0 = a[0] * x[0] + a[1] * x[1] - one;
        let r1 = a[2] * x[0] + a[3] * x[1] - one;
        assert!(r0.norm() < 1e-15 && r1.norm() < 1e-15);
    }
}
