//! Matrices and vectors of the discrete transformed problem.
//!
//! On a test element `e` the trial derivative `D^{2-alpha} phi_i` splits into
//! a smooth part and `(x - x_e)^gamma` times a linear polynomial; the first is
//! integrated with Gauss-Legendre, the second with a Gauss-Jacobi rule that
//! absorbs the power. On uniform meshes the element integrals depend only on
//! the offset between test and trial elements, so they are tabulated once and
//! combined with the local Taylor coefficients of the polynomial potential.

use crate::error::{invalid, Error, Result};
use crate::expr::FunctionExpr;
use crate::fraccalc::{boundary_values, piece_from_distances, FracOrder};
use crate::linalg::{dot_compensated, norm_inf, BandedLu, CompensatedSum, DenseMatrix, RankOneSolver};
use crate::mesh::{Degree, FeSpace};
use crate::problem::ProblemSpec;
use crate::quad::{gauss_jacobi, gauss_legendre, QuadRule, RuleCache};

/// Points per element for every assembly rule.
pub const DEFAULT_POINTS: usize = 12;

/// Symmetric band matrix stored by upper diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    /// `scale * diags[k][i] = M[i][i + k]`.
    diags: Vec<Vec<f64>>,
    scale: f64,
}

impl SymBand {
    fn zeros(n: usize, p: usize) -> Self {
        Self { n, diags: (0..=p).map(|k| vec![0.0; n.saturating_sub(k)]).collect(), scale: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scale * self.unscaled(i, j)
    }

    /// Common factor pulled out of the stored entries.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Entry divided by [`SymBand::scale`]; exact small integers on uniform meshes.
    pub fn unscaled(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.diags.get(hi - lo).map_or(0.0, |d| d[lo])
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.diags[hi - lo][lo] += v;
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let p = self.bandwidth();
        DenseMatrix::from_fn(self.n, self.n, |i, j| if i.abs_diff(j) <= p { self.get(i, j) } else { 0.0 })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(d, v)| d * v).collect();
        for (k, d) in self.diags.iter().enumerate().skip(1) {
            for (i, &v) in d.iter().enumerate() {
                y[i] += v * x[i + k];
                y[i + k] += v * x[i];
            }
        }
        y.iter_mut().for_each(|v| *v *= self.scale);
        y
    }

    /// Factorization for repeated solves with this matrix.
    pub fn factor(&self) -> Result<BandedLu<f64>> {
        BandedLu::factor_with(self.n, self.bandwidth(), |i, j| self.get(i, j))
    }
}

/// Which part of a trial derivative piece is seen from a test element.
#[derive(Debug, Clone, Copy)]
enum PairKind {
    /// The piece lives on the test element itself.
    Own,
    /// The piece ends at the left node of the test element; `ell` is its width.
    Adjacent { ell: f64 },
    /// The piece ends further left: distances from `x_e` to its endpoints.
    Far { da: f64, db: f64 },
}

/// Rules and sizes shared by all element-pair integrals.
struct PairIntegrator<'a> {
    order: &'a FracOrder,
    space: &'a FeSpace,
    leg: QuadRule,
    jac: QuadRule,
    /// Number of Taylor moments `y^m` of the potential.
    nm: usize,
}

impl PairIntegrator<'_> {
    fn slot(&self, db: usize, loc: usize, m: usize) -> usize {
        (db * 3 + loc) * self.nm + m
    }

    fn accumulate(&self, out: &mut [f64], w: f64, y: f64, h: f64, v0: f64, v1: f64) {
        let s = y / h;
        for loc in 0..self.space.degree().local_count() {
            let base = w * self.space.shape(loc, s);
            let mut ym = base;
            for m in 0..self.nm {
                out[self.slot(0, loc, m)] += ym * v0;
                out[self.slot(1, loc, m)] += ym * v1;
                ym *= y;
            }
        }
    }

    /// `int_0^h D(piece)(x_e + y) y^m N_loc(y/h) dy` for unit `d0` (slot 0)
    /// and unit `d1` (slot 1).
    fn moments(&self, kind: PairKind, h: f64) -> Vec<f64> {
        let g = self.order.gamma();
        let gg = self.order.gamma_of_gamma();
        let mut out = vec![0.0; 6 * self.nm];
        match kind {
            PairKind::Own => {}
            PairKind::Adjacent { ell } => {
                for (y, w) in self.leg.mapped(0.0, h) {
                    let a = ell + y;
                    let ag = a.powf(g);
                    self.accumulate(&mut out, w, y, h, ag / (g * gg), ag * a / (g * (g + 1.0) * gg));
                }
            }
            PairKind::Far { da, db } => {
                for (y, w) in self.leg.mapped(0.0, h) {
                    let v0 = piece_from_distances(self.order, da + y, db + y, 1.0, 0.0);
                    let v1 = piece_from_distances(self.order, da + y, db + y, 0.0, 1.0);
                    self.accumulate(&mut out, w, y, h, v0, v1);
                }
            }
        }
        // y^gamma part, weight absorbed by the Jacobi rule
        match kind {
            PairKind::Own => {
                for (y, w) in self.jac.mapped(0.0, h) {
                    self.accumulate(&mut out, w, y, h, 1.0 / (g * gg), y / (g * (g + 1.0) * gg));
                }
            }
            PairKind::Adjacent { ell } => {
                for (y, w) in self.jac.mapped(0.0, h) {
                    let v1 = -(ell + y) / g + y / (g + 1.0);
                    self.accumulate(&mut out, w, y, h, -1.0 / (g * gg), v1 / gg);
                }
            }
            PairKind::Far { .. } => {}
        }
        out
    }
}

/// Taylor coefficients of `sum_k a_k x^k` about `x0`.
fn shifted_coeffs(a: &[f64], x0: f64) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n];
    for (k, &ak) in a.iter().enumerate() {
        if ak == 0.0 {
            continue;
        }
        // binom(k, m) x0^{k-m}
        let mut binom = 1.0;
        for m in (0..=k).rev() {
            c[m] += ak * binom * x0.powi((k - m) as i32);
            binom = binom * m as f64 / (k - m + 1) as f64;
        }
    }
    c
}

/// Assembly with a fixed number of quadrature points per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assembler {
    points: usize,
}

impl Default for Assembler {
    fn default() -> Self {
        Self { points: DEFAULT_POINTS }
    }
}

impl Assembler {
    pub fn new(points: usize) -> Result<Self> {
        if !(2..=64).contains(&points) {
            return Err(invalid(format!("quadrature points must be in 2..=64, got {points}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `(phi_i', phi_j')` in band storage. The local stiffness is an integer
    /// matrix over `d h_e`; with `d h` factored out, a uniform mesh stores
    /// exact integers and every interior row sums to zero exactly.
    pub fn laplacian(&self, space: &FeSpace) -> SymBand {
        let n = space.dof_count();
        let (p, den) = match space.degree() {
            Degree::P1 => (1, 1.0),
            Degree::P2 => (2, 3.0),
        };
        let mut band = SymBand::zeros(n, p);
        let mesh = space.mesh();
        let uniform = mesh.is_uniform();
        let h_ref = if uniform { 1.0 / mesh.num_elements() as f64 } else { mesh.max_h() };
        band.scale = 1.0 / (den * h_ref);
        for e in 0..mesh.num_elements() {
            let ratio = if uniform { 1.0 } else { h_ref / mesh.h(e) };
            let dofs = space.element_dofs(e);
            for &(li, i) in &dofs {
                for &(lj, j) in &dofs {
                    if j >= i {
                        band.add(i, j, local_stiffness(space.degree(), li, lj) * ratio);
                    }
                }
            }
        }
        band
    }

    /// `b[j][i] = (D^{2-alpha} phi_i, q phi_j)` for polynomial `q`.
    pub fn nonlocal(&self, space: &FeSpace, q: &FunctionExpr, order: &FracOrder) -> Result<DenseMatrix> {
        let coeffs = q
            .as_polynomial()
            .ok_or_else(|| Error::UnsupportedExpression(format!("nonlocal block needs a polynomial potential, got {q}")))?;
        let n = space.dof_count();
        let mut b = DenseMatrix::zeros(n, n);
        if coeffs.iter().all(|&c| c == 0.0) {
            return Ok(b);
        }
        let ctx = PairIntegrator {
            order,
            space,
            leg: gauss_legendre(self.points)?,
            jac: gauss_jacobi(self.points, 0.0, order.gamma())?,
            nm: coeffs.len(),
        };
        let mesh = space.mesh();
        let ne = mesh.num_elements();
        let tables: Option<Vec<Vec<f64>>> = mesh.is_uniform().then(|| {
            let h = mesh.h(0);
            (0..ne)
                .map(|d| {
                    let kind = match d {
                        0 => PairKind::Own,
                        1 => PairKind::Adjacent { ell: h },
                        _ => PairKind::Far { da: d as f64 * h, db: (d - 1) as f64 * h },
                    };
                    ctx.moments(kind, h)
                })
                .collect()
        });
        let mut scratch;
        for e in 0..ne {
            let xe = mesh.node(e);
            let h = mesh.h(e);
            let c = shifted_coeffs(&coeffs, xe);
            let test = space.element_dofs(e);
            for ek in 0..=e {
                let t: &[f64] = match &tables {
                    Some(t) => &t[e - ek],
                    None => {
                        let kind = if ek == e {
                            PairKind::Own
                        } else if ek + 1 == e {
                            PairKind::Adjacent { ell: mesh.h(ek) }
                        } else {
                            PairKind::Far { da: xe - mesh.node(ek), db: xe - mesh.node(ek + 1) }
                        };
                        scratch = ctx.moments(kind, h);
                        &scratch
                    }
                };
                let mut v = [[0.0; 3]; 2];
                for (db, row) in v.iter_mut().enumerate() {
                    for &(lj, _) in &test {
                        row[lj] = (0..ctx.nm).map(|m| c[m] * t[ctx.slot(db, lj, m)]).sum();
                    }
                }
                let hk = mesh.h(ek);
                for (li, i) in space.element_dofs(ek) {
                    let (d0, d1) = space.shape_deriv_coeffs(li, hk);
                    for &(lj, j) in &test {
                        b[(j, i)] += d0 * v[0][lj] + d1 * v[1][lj];
                    }
                }
            }
        }
        if let Some(k) = b.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("nonlocal entry ({}, {}) is not finite", k / n, k % n)));
        }
        Ok(b)
    }

    /// `(fun, phi_j)` for every dof.
    pub fn moments(&self, space: &FeSpace, fun: &FunctionExpr) -> Result<Vec<f64>> {
        let mut out = vec![0.0; space.dof_count()];
        if fun.is_zero() {
            return Ok(out);
        }
        let mut rules = RuleCache::new();
        let mesh = space.mesh();
        for e in 0..mesh.num_elements() {
            let (l, r) = (mesh.node(e), mesh.node(e + 1));
            let h = mesh.h(e);
            for (loc, j) in space.element_dofs(e) {
                out[j] += fun.integrate_against(l, r, |x| space.shape(loc, (x - l) / h), self.points, &mut rules)?;
            }
        }
        Ok(out)
    }

    /// Load vector `(f, phi_j)`.
    pub fn load(&self, space: &FeSpace, f: &FunctionExpr) -> Result<Vec<f64>> {
        self.moments(space, f)
    }

    /// `g_i = (D^{2-alpha} phi_i)(1)` and `r_j = (p, phi_j)`.
    pub fn rank_one(&self, space: &FeSpace, problem: &ProblemSpec) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = boundary_values(space, problem.order());
        let r = self.moments(space, &problem.p())?;
        Ok((g, r))
    }

    /// `M = B_1 - m g^T` with `B_1` the nonlocal block for `q = 1` and
    /// `m_j = (x^mu, phi_j)`, so `M[j][i] = B_1[j][i] - g_i m_j`.
    pub fn recon_mass(&self, space: &FeSpace, order: &FracOrder, mu: f64) -> Result<DenseMatrix> {
        let (mut b1, g, m) = self.recon_mass_parts(space, order, mu)?;
        b1.add_outer(-1.0, &m, &g);
        Ok(b1)
    }

    /// `(B_1, g, m)` with `M = B_1 - m g^T`.
    pub fn recon_mass_parts(&self, space: &FeSpace, order: &FracOrder, mu: f64) -> Result<(DenseMatrix, Vec<f64>, Vec<f64>)> {
        if !(mu > -1.0) {
            return Err(Error::DivergentIntegral { exponent: mu });
        }
        let b1 = self.nonlocal(space, &FunctionExpr::constant(1.0), order)?;
        let g = boundary_values(space, order);
        let m = self.moments(space, &FunctionExpr::monomial(1.0, mu))?;
        Ok((b1, g, m))
    }

    /// Every block of the source problem.
    pub fn system(&self, space: &FeSpace, problem: &ProblemSpec) -> Result<AssembledSystem> {
        let laplacian = self.laplacian(space);
        let nonlocal = self.nonlocal(space, problem.q(), problem.order())?;
        let (g, r) = self.rank_one(space, problem)?;
        let rhs = self.load(space, problem.f())?;
        Ok(AssembledSystem { laplacian, nonlocal, g, r, rhs })
    }
}

/// Reference stiffness entries times `h`.
fn local_stiffness(degree: Degree, a: usize, b: usize) -> f64 {
    match degree {
        Degree::P1 => {
            if a == b {
                1.0
            } else {
                -1.0
            }
        }
        Degree::P2 => {
            const K: [[f64; 3]; 3] = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
            K[a][b]
        }
    }
}

/// `A = L + B + r g^T` kept in parts; rows belong to test functions, so
/// `A[j][i]` carries `g_i r_j`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub laplacian: SymBand,
    pub nonlocal: DenseMatrix,
    pub g: Vec<f64>,
    pub r: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Upper bandwidth of `L + B`.
    pub fn bandwidth(&self) -> usize {
        self.laplacian.bandwidth()
    }

    /// Entry of `L + B`.
    pub fn principal(&self, i: usize, j: usize) -> f64 {
        self.laplacian.get(i, j) + self.nonlocal[(i, j)]
    }

    /// The full matrix `A`.
    pub fn matrix(&self) -> DenseMatrix {
        let mut a = self.nonlocal.clone();
        let p = self.bandwidth();
        let n = self.dim();
        for i in 0..n {
            for j in i.saturating_sub(p)..(i + p + 1).min(n) {
                a[(i, j)] += self.laplacian.get(i, j);
            }
        }
        a.add_outer(1.0, &self.r, &self.g);
        a
    }

    /// `A x` without forming `A`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.laplacian.matvec(x);
        let bx = self.nonlocal.matvec(x);
        let gx: f64 = self.g.iter().zip(x).map(|(a, b)| a * b).sum();
        for ((yi, bi), ri) in y.iter_mut().zip(bx).zip(&self.r) {
            *yi += bi + ri * gx;
        }
        y
    }

    /// `b - A x` with every row accumulated in doubled precision.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let s = self.laplacian.scale();
        self.scaled_residual(x, b).into_iter().map(|v| v * s).collect()
    }

    /// Residual of the system multiplied by `1 / laplacian.scale()`, whose
    /// leading block is stored exactly.
    fn scaled_residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let p = self.bandwidth();
        let tau = 1.0 / self.laplacian.scale();
        let gx = dot_compensated(&self.g, x);
        (0..n)
            .map(|i| {
                let mut acc = CompensatedSum::default();
                for j in i.saturating_sub(p)..(i + p + 1).min(n) {
                    acc.add_prod(-self.laplacian.unscaled(i, j), x[j]);
                }
                let mut rest = CompensatedSum::default();
                rest.add(b[i]);
                for (bij, xj) in self.nonlocal.row(i).iter().zip(x) {
                    rest.add_prod(-bij, *xj);
                }
                rest.add_prod(-self.r[i], gx);
                acc.add_prod(tau, rest.value());
                acc.value()
            })
            .collect()
    }

    /// Structured factorization of `A`, applied to the scaled system.
    pub fn factor(&self) -> Result<SystemSolver> {
        let tau = 1.0 / self.laplacian.scale();
        let lu = BandedLu::factor_with(self.dim(), self.bandwidth(), |i, j| {
            self.laplacian.unscaled(i, j) + tau * self.nonlocal[(i, j)]
        })?;
        let r: Vec<f64> = self.r.iter().map(|v| tau * v).collect();
        Ok(SystemSolver { inner: RankOneSolver::new(lu, &r, &self.g)?, tau })
    }

    /// Solution of `A w = rhs` refined against [`AssembledSystem::residual`]
    /// until the correction is at rounding level; returns `w` and the
    /// relative residual `||b - A w||_inf / ||b||_inf`.
    pub fn solve_refined(&self, max_refine: usize) -> Result<(Vec<f64>, f64)> {
        let solver = self.factor()?;
        let b = &self.rhs;
        let mut w = solver.solve(b)?;
        for _ in 0..max_refine {
            let dw = solver.inner.solve(&self.scaled_residual(&w, b))?;
            w.iter_mut().zip(&dw).for_each(|(a, d)| *a += d);
            if norm_inf(&dw) <= 4.0 * f64::EPSILON * norm_inf(&w) {
                break;
            }
        }
        let res = norm_inf(&self.residual(&w, b));
        let scale = norm_inf(b);
        Ok((w, if scale > 0.0 { res / scale } else { res }))
    }
}

/// Solver for `A` built on the scaled system `A / laplacian.scale()`.
#[derive(Debug, Clone)]
pub struct SystemSolver {
    inner: RankOneSolver<f64>,
    tau: f64,
}

impl SystemSolver {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = b.iter().map(|v| self.tau * v).collect();
        self.inner.solve(&scaled)
    }
}

pub fn assemble_laplacian(space: &FeSpace) -> DenseMatrix {
    Assembler::default().laplacian(space).to_dense()
}

pub fn assemble_nonlocal(space: &FeSpace, q: &FunctionExpr, order: &FracOrder) -> Result<DenseMatrix> {
    Assembler::default().nonlocal(space, q, order)
}

pub fn assemble_rank_one(space: &FeSpace, problem: &ProblemSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    Assembler::default().rank_one(space, problem)
}

pub fn assemble_load(space: &FeSpace, f: &FunctionExpr) -> Result<Vec<f64>> {
    Assembler::default().load(space, f)
}

pub fn assemble_recon_mass(space: &FeSpace, order: &FracOrder, mu: f64) -> Result<DenseMatrix> {
    Assembler::default().recon_mass(space, order, mu)
}

pub fn assemble_system(space: &FeSpace, problem: &ProblemSpec) -> Result<AssembledSystem> {
    Assembler::default().system(space, problem)
}
