//! Eigenvalues of a real nonsymmetric matrix: balancing, Householder
//! reduction to upper Hessenberg form and the Francis double-shift QR
//! iteration in real arithmetic.

use num_complex::Complex64;

use super::DenseMatrix;
use crate::error::{invalid, Error, Result};

const MAX_DIM: usize = 3000;

/// Orders a spectrum by ascending modulus, ties by ascending imaginary part.
pub fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        let tie = 1e-12 * ma.max(mb);
        if (ma - mb).abs() <= tie {
            a.im.total_cmp(&b.im)
        } else {
            ma.total_cmp(&mb)
        }
    });
}

/// All eigenvalues of `a`, sorted by [`sort_spectrum`].
pub fn eig_dense(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(invalid(format!("eigenvalues need a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n > MAX_DIM {
        return Err(Error::ResourceLimit(format!("dense eigensolver limited to n <= {MAX_DIM}, got {n}")));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let mut h = Work::from(a);
    h.balance();
    h.to_hessenberg();
    let mut out = h.hqr()?;
    sort_spectrum(&mut out);
    Ok(out)
}

/// Eigenvalues of a matrix already in upper Hessenberg form (entries below
/// the subdiagonal are ignored), in the order the QR sweep finds them.
pub fn hessenberg_eigenvalues(h: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !h.is_square() {
        return Err(invalid("Hessenberg eigenvalues need a square matrix"));
    }
    let mut w = Work::from(h);
    for i in 3..=w.n {
        for j in 1..i - 1 {
            w.set(i, j, 0.0);
        }
    }
    w.hqr()
}

/// 1-based working copy, following the classic EISPACK index conventions.
struct Work {
    n: usize,
    a: Vec<f64>,
}

impl From<&DenseMatrix> for Work {
    fn from(m: &DenseMatrix) -> Self {
        Self { n: m.rows(), a: m.as_slice().to_vec() }
    }
}

impl Work {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i - 1) * self.n + (j - 1)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i - 1) * self.n + (j - 1)] = v;
    }

    #[inline]
    fn sub(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i - 1) * self.n + (j - 1)] -= v;
    }

    /// Diagonal similarity by powers of two equalising row and column norms.
    fn balance(&mut self) {
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let (mut r, mut c) = (0.0, 0.0);
                for j in 1..=n {
                    if j != i {
                        c += self.get(j, i).abs();
                        r += self.get(i, j).abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / 2.0;
                while c < g {
                    f *= 2.0;
                    c *= 4.0;
                }
                g = r * 2.0;
                while c > g {
                    f /= 2.0;
                    c /= 4.0;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let gi = 1.0 / f;
                    for j in 1..=n {
                        let v = self.get(i, j) * gi;
                        self.set(i, j, v);
                    }
                    for j in 1..=n {
                        let v = self.get(j, i) * f;
                        self.set(j, i, v);
                    }
                }
            }
        }
    }

    fn to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let mut v = vec![0.0; n];
        for k in 1..=n - 2 {
            // reflector for column k, rows k+1..n
            let len = n - k;
            let mut scale = 0.0;
            for i in 0..len {
                v[i] = self.get(k + 1 + i, k);
                scale += v[i].abs();
            }
            if scale == 0.0 {
                continue;
            }
            let mut norm = 0.0;
            for x in v.iter_mut().take(len) {
                *x /= scale;
                norm += *x * *x;
            }
            let alpha = -v[0].signum() * norm.sqrt();
            v[0] -= alpha;
            let vtv: f64 = v[..len].iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let beta = 2.0 / vtv;
            // left: rows k+1..n, columns k..n
            for j in k..=n {
                let mut s = 0.0;
                for i in 0..len {
                    s += v[i] * self.get(k + 1 + i, j);
                }
                s *= beta;
                for i in 0..len {
                    self.sub(k + 1 + i, j, s * v[i]);
                }
            }
            // right: all rows, columns k+1..n
            for i in 1..=n {
                let row = (i - 1) * n + k;
                let mut s = 0.0;
                for j in 0..len {
                    s += self.a[row + j] * v[j];
                }
                s *= beta;
                for j in 0..len {
                    self.a[row + j] -= s * v[j];
                }
            }
            self.set(k + 1, k, alpha * scale);
            for i in k + 2..=n {
                self.set(i, k, 0.0);
            }
        }
    }

    /// Francis double-shift QR on the Hessenberg matrix.
    fn hqr(&mut self) -> Result<Vec<Complex64>> {
        let n = self.n;
        let mut wr = vec![0.0; n + 1];
        let mut wi = vec![0.0; n + 1];
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in i.saturating_sub(1).max(1)..=n {
                anorm += self.get(i, j).abs();
            }
        }
        let total_cap = 40 * n.max(1);
        let mut total = 0usize;
        let mut nn = n;
        let mut t = 0.0;
        let (mut p, mut q, mut r);
        let (mut x, mut y, mut z, mut w, mut s);
        while nn >= 1 {
            let mut its = 0;
            loop {
                let mut l = nn;
                while l >= 2 {
                    s = self.get(l - 1, l - 1).abs() + self.get(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.get(l, l - 1).abs() + s == s {
                        self.set(l, l - 1, 0.0);
                        break;
                    }
                    l -= 1;
                }
                x = self.get(nn, nn);
                if l == nn {
                    wr[nn] = x + t;
                    wi[nn] = 0.0;
                    nn -= 1;
                } else {
                    y = self.get(nn - 1, nn - 1);
                    w = self.get(nn, nn - 1) * self.get(nn - 1, nn);
                    if l == nn - 1 {
                        p = 0.5 * (y - x);
                        q = p * p + w;
                        z = q.abs().sqrt();
                        x += t;
                        if q >= 0.0 {
                            z = p + z.copysign(p);
                            wr[nn - 1] = x + z;
                            wr[nn] = x + z;
                            if z != 0.0 {
                                wr[nn] = x - w / z;
                            }
                            wi[nn - 1] = 0.0;
                            wi[nn] = 0.0;
                        } else {
                            wr[nn - 1] = x + p;
                            wr[nn] = x + p;
                            wi[nn - 1] = -z;
                            wi[nn] = z;
                        }
                        nn -= 2;
                    } else {
                        if its == 60 || total >= total_cap {
                            return Err(Error::ConvergenceFailure(format!(
                                "QR iteration stalled with {nn} eigenvalues left after {total} sweeps"
                            )));
                        }
                        if its == 10 || its == 20 || its == 40 {
                            // exceptional shift
                            t += x;
                            for i in 1..=nn {
                                self.sub(i, i, x);
                            }
                            s = self.get(nn, nn - 1).abs() + self.get(nn - 1, nn - 2).abs();
                            x = 0.75 * s;
                            y = x;
                            w = -0.4375 * s * s;
                        }
                        its += 1;
                        total += 1;
                        let mut m = nn - 2;
                        loop {
                            z = self.get(m, m);
                            r = x - z;
                            s = y - z;
                            p = (r * s - w) / self.get(m + 1, m) + self.get(m, m + 1);
                            q = self.get(m + 1, m + 1) - z - r - s;
                            r = self.get(m + 2, m + 1);
                            s = p.abs() + q.abs() + r.abs();
                            p /= s;
                            q /= s;
                            r /= s;
                            if m == l {
                                break;
                            }
                            let u = self.get(m, m - 1).abs() * (q.abs() + r.abs());
                            let v = p.abs() * (self.get(m - 1, m - 1).abs() + z.abs() + self.get(m + 1, m + 1).abs());
                            if u + v == v {
                                break;
                            }
                            m -= 1;
                        }
                        for i in m + 2..=nn {
                            self.set(i, i - 2, 0.0);
                            if i != m + 2 {
                                self.set(i, i - 3, 0.0);
                            }
                        }
                        let mut k = m;
                        while k + 1 <= nn {
                            if k != m {
                                p = self.get(k, k - 1);
                                q = self.get(k + 1, k - 1);
                                r = if k != nn - 1 { self.get(k + 2, k - 1) } else { 0.0 };
                                x = p.abs() + q.abs() + r.abs();
                                if x != 0.0 {
                                    p /= x;
                                    q /= x;
                                    r /= x;
                                }
                            }
                            s = (p * p + q * q + r * r).sqrt().copysign(p);
                            if s != 0.0 {
                                if k == m {
                                    if l != m {
                                        let v = -self.get(k, k - 1);
                                        self.set(k, k - 1, v);
                                    }
                                } else {
                                    self.set(k, k - 1, -s * x);
                                }
                                p += s;
                                x = p / s;
                                y = q / s;
                                z = r / s;
                                q /= p;
                                r /= p;
                                for j in k..=nn {
                                    p = self.get(k, j) + q * self.get(k + 1, j);
                                    if k != nn - 1 {
                                        p += r * self.get(k + 2, j);
                                        self.sub(k + 2, j, p * z);
                                    }
                                    self.sub(k + 1, j, p * y);
                                    self.sub(k, j, p * x);
                                }
                                let mmin = nn.min(k + 3);
                                for i in l..=mmin {
                                    p = x * self.get(i, k) + y * self.get(i, k + 1);
                                    if k != nn - 1 {
                                        p += z * self.get(i, k + 2);
                                        self.sub(i, k + 2, p * r);
                                    }
                                    self.sub(i, k + 1, p * q);
                                    self.sub(i, k, p);
                                }
                            }
                            k += 1;
                        }
                    }
                }
                if nn < 2 || l + 1 >= nn {
                    break;
                }
            }
        }
        Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
    }
}
