//! Closed-form Riemann-Liouville integrals and the derivative `D^{2-alpha}`
//! of finite element functions.
//!
//! With `gamma = alpha - 1` we use `D^{2-alpha} v = I^gamma v'`, so every
//! evaluation reduces to fractional integrals of the piecewise-linear
//! derivative pieces of P1/P2 functions.

use crate::error::{invalid, Error, Result};
use crate::mesh::{DerivPiece, FeSpace, Mesh};
use crate::special::gamma as gamma_fn;

/// Order alpha in (1, 2) with gamma = alpha - 1 and the Gamma values used
/// by the piece formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    gamma: f64,
    gamma_gamma: f64,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (1, 2), got {alpha}")));
        }
        let gamma = alpha - 1.0;
        Ok(Self { alpha, gamma, gamma_gamma: gamma_fn(gamma) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Gamma(gamma).
    pub fn gamma_of_gamma(&self) -> f64 {
        self.gamma_gamma
    }
}

/// `(I^gamma t^beta)(x) = Gamma(beta+1)/Gamma(beta+gamma+1) x^{beta+gamma}`.
pub fn rl_integral_monomial(beta: f64, gamma: f64, x: f64) -> Result<f64> {
    if beta <= -1.0 {
        return Err(Error::DivergentIntegral { exponent: beta });
    }
    if !(gamma > 0.0) {
        return Err(invalid(format!("integral order must be positive, got {gamma}")));
    }
    if x < 0.0 {
        return Err(invalid(format!("point {x} is negative")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_fn(beta + 1.0) / gamma_fn(beta + gamma + 1.0) * x.powf(beta + gamma))
}

/// `A^gamma - B^gamma` for `A >= B > 0` without cancellation.
pub fn stable_pow_diff(a: f64, b: f64, gamma: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(invalid(format!("stable_pow_diff needs B > 0, got {b}")));
    }
    if a < b {
        return Err(invalid(format!("stable_pow_diff needs A >= B, got A={a}, B={b}")));
    }
    Ok(pow_diff(a, b, gamma))
}

#[inline]
fn pow_diff(a: f64, b: f64, gamma: f64) -> f64 {
    b.powf(gamma) * (gamma * ((a - b) / b).ln_1p()).exp_m1()
}

/// `K(A, B) = int_B^A s^{gamma-1} (A - s) ds` for `A > B > 0`.
///
/// For A close to B the integrand is tiny compared to either closed-form
/// term, so a binomial series in `r = (A-B)/B` takes over.
fn k_integral(a: f64, b: f64, gamma: f64) -> f64 {
    let r = (a - b) / b;
    if r <= 0.5 {
        let mut coef = 1.0; // binomial(gamma - 1, n)
        let mut rn = r * r; // r^{n+2}
        let mut sum = 0.0;
        for n in 0..200 {
            let nf = n as f64;
            let term = coef * rn / ((nf + 1.0) * (nf + 2.0));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            coef *= (gamma - 1.0 - nf) / (nf + 1.0);
            rn *= r;
        }
        b.powf(gamma + 1.0) * sum
    } else {
        a * pow_diff(a, b, gamma) / gamma - pow_diff(a, b, gamma + 1.0) / (gamma + 1.0)
    }
}

/// `(1/Gamma(gamma)) int_a^{min(x,b)} (x-t)^{gamma-1} (d0 + d1 (t-a)) dt`,
/// the fractional integral at `x` of one linear derivative piece on [a, b].
pub fn piece_integral(order: &FracOrder, a: f64, b: f64, d0: f64, d1: f64, x: f64) -> f64 {
    if x <= a {
        return 0.0;
    }
    piece_from_distances(order, x - a, x - b, d0, d1)
}

/// [`piece_integral`] given `A = x - a > 0` and `B = x - b`; `B <= 0` means
/// `x` lies inside the piece.
pub(crate) fn piece_from_distances(order: &FracOrder, big_a: f64, big_b: f64, d0: f64, d1: f64) -> f64 {
    let g = order.gamma;
    let raw = if big_b <= 0.0 {
        d0 * big_a.powf(g) / g + d1 * big_a.powf(g + 1.0) / (g * (g + 1.0))
    } else {
        let mut v = d0 * pow_diff(big_a, big_b, g) / g;
        if d1 != 0.0 {
            v += d1 * k_integral(big_a, big_b, g);
        }
        v
    };
    raw / order.gamma_gamma
}

fn pieces_value(order: &FracOrder, mesh: &Mesh, pieces: &[DerivPiece], x: f64) -> f64 {
    pieces
        .iter()
        .map(|p| piece_integral(order, mesh.node(p.elem), mesh.node(p.elem + 1), p.d0, p.d1, x))
        .sum()
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("point {x} outside [0, 1]")));
    }
    Ok(())
}

/// `(D^{2-alpha} phi_j)(x)` for any dof of a P1 or P2 space.
pub fn frac_deriv_basis(space: &FeSpace, j: usize, order: &FracOrder, x: f64) -> Result<f64> {
    check_x(x)?;
    if j >= space.dof_count() {
        return Err(invalid(format!("dof {j} out of range 0..{}", space.dof_count())));
    }
    Ok(pieces_value(order, space.mesh(), &space.deriv_pieces(j), x))
}

/// `(D^{2-alpha} phi_i)(x)` for the P1 hat at interior node `i` (1..n-1).
pub fn frac_deriv_p1_basis(mesh: &Mesh, i: usize, order: &FracOrder, x: f64) -> Result<f64> {
    if i == 0 || i >= mesh.num_elements() {
        return Err(invalid(format!("node {i} is not interior")));
    }
    let space = FeSpace::new(mesh.clone(), crate::mesh::Degree::P1);
    frac_deriv_basis(&space, i - 1, order, x)
}

/// `(D^{2-alpha} phi)(x)` for P2 dof `dof` (interleaved midpoint/vertex numbering).
pub fn frac_deriv_p2_basis(mesh: &Mesh, dof: usize, order: &FracOrder, x: f64) -> Result<f64> {
    let space = FeSpace::new(mesh.clone(), crate::mesh::Degree::P2);
    frac_deriv_basis(&space, dof, order, x)
}

/// `(D^{2-alpha} phi_j)(1)`.
pub fn frac_deriv_basis_at_one(space: &FeSpace, j: usize, order: &FracOrder) -> Result<f64> {
    frac_deriv_basis(space, j, order, 1.0)
}

/// Boundary values g_j = `(D^{2-alpha} phi_j)(1)` for every dof.
pub fn boundary_values(space: &FeSpace, order: &FracOrder) -> Vec<f64> {
    (0..space.dof_count())
        .map(|j| pieces_value(order, space.mesh(), &space.deriv_pieces(j), 1.0))
        .collect()
}

/// Derivative of an FE function stored element by element, ready for
/// repeated `D^{2-alpha}` evaluation at O(#elements) per point.
#[derive(Debug, Clone)]
pub struct FeDerivative {
    mesh: Mesh,
    order: FracOrder,
    /// (d0, d1) per element.
    pieces: Vec<(f64, f64)>,
}

impl FeDerivative {
    pub fn new(space: &FeSpace, coeffs: &[f64], order: &FracOrder) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(invalid(format!(
                "coefficient vector has length {}, space has {} dofs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        let mesh = space.mesh();
        let pieces = (0..mesh.num_elements())
            .map(|e| {
                let h = mesh.h(e);
                space.element_dofs(e).into_iter().fold((0.0, 0.0), |(a0, a1), (loc, j)| {
                    let (d0, d1) = space.shape_deriv_coeffs(loc, h);
                    (a0 + coeffs[j] * d0, a1 + coeffs[j] * d1)
                })
            })
            .collect();
        Ok(Self { mesh: mesh.clone(), order: *order, pieces })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn order(&self) -> &FracOrder {
        &self.order
    }

    /// (d0, d1) of w_h' on element e.
    pub fn piece(&self, e: usize) -> (f64, f64) {
        self.pieces[e]
    }

    /// `(D^{2-alpha} w_h)(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let last = if x <= 0.0 { 0 } else { self.mesh.element_of(x) + 1 };
        (0..last)
            .map(|e| {
                let (d0, d1) = self.pieces[e];
                piece_integral(&self.order, self.mesh.node(e), self.mesh.node(e + 1), d0, d1, x)
            })
            .sum()
    }
}

impl FeDerivative {
    /// Values at `x_e + h s` for every element `e` and offset `s` in [0, 1],
    /// laid out as `out[e * offsets.len() + k]`.
    ///
    /// On uniform meshes the kernel depends only on the element offset, so the
    /// values form a causal discrete convolution evaluated with table lookups.
    pub fn sample(&self, offsets: &[f64]) -> Vec<f64> {
        let ne = self.mesh.num_elements();
        let np = offsets.len();
        if !self.mesh.is_uniform() {
            let mut out = Vec::with_capacity(ne * np);
            for e in 0..ne {
                let (l, h) = (self.mesh.node(e), self.mesh.h(e));
                out.extend(offsets.iter().map(|s| self.eval(l + h * s)));
            }
            return out;
        }
        let h = self.mesh.h(0);
        // k0[d][k], k1[d][k]: unit d0 / d1 pieces seen d elements to the left
        let mut k0 = vec![0.0; ne * np];
        let mut k1 = vec![0.0; ne * np];
        for d in 0..ne {
            for (k, &s) in offsets.iter().enumerate() {
                let big_a = (d as f64 + s) * h;
                let big_b = (d as f64 - 1.0 + s) * h;
                k0[d * np + k] = piece_from_distances(&self.order, big_a, big_b, 1.0, 0.0);
                k1[d * np + k] = piece_from_distances(&self.order, big_a, big_b, 0.0, 1.0);
            }
        }
        let mut out = vec![0.0; ne * np];
        for e in 0..ne {
            let row = &mut out[e * np..(e + 1) * np];
            for ek in 0..=e {
                let (d0, d1) = self.pieces[ek];
                if d0 == 0.0 && d1 == 0.0 {
                    continue;
                }
                let d = e - ek;
                let (t0, t1) = (&k0[d * np..(d + 1) * np], &k1[d * np..(d + 1) * np]);
                for k in 0..np {
                    row[k] += d0 * t0[k] + d1 * t1[k];
                }
            }
        }
        out
    }
}

/// `(D^{2-alpha} w_h)(x)` with `w_h = sum_j coeffs[j] phi_j`.
pub fn frac_deriv_fefun(space: &FeSpace, coeffs: &[f64], order: &FracOrder, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(FeDerivative::new(space, coeffs, order)?.eval(x))
}
