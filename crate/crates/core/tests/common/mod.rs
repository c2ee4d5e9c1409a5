//! Oracles built without the library: adaptive Gauss-Kronrod quadrature,
//! Lagrange bases written out per element, and statrs' Gamma function.

#![allow(dead_code)]

use statrs::function::gamma::gamma;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, g * h)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, floor: f64, depth: u32) -> f64 {
    let (k, g) = gk15(f, a, b);
    if (k - g).abs() <= tol.max(floor) || depth == 0 {
        return k;
    }
    let c = 0.5 * (a + b);
    adapt(f, a, c, 0.5 * tol, floor, depth - 1) + adapt(f, c, b, 0.5 * tol, floor, depth - 1)
}

/// Adaptive Gauss-Kronrod 7-15 on [a, b]. Local errors below a roundoff
/// floor relative to the whole integral are accepted as converged.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (whole, _) = gk15(&f, a, b);
    adapt(&f, a, b, tol, 1e-17 * whole.abs(), 40)
}

/// Like `integrate_pieces`, but each piece is mapped by `x = l + (r-l) v^3`,
/// which smooths `(x-l)^gamma` kinks sitting at the left end of a piece.
pub fn integrate_graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            integrate(|v: f64| f(w[0] + h * v * v * v) * 3.0 * h * v * v, 0.0, 1.0, tol)
        })
        .sum()
}

/// Integral over [a, b] split at the given breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Deg {
    P1,
    P2,
}

/// Element-local shape functions on s in [0, 1] and their s-derivatives.
fn shape(deg: Deg, local: usize, s: f64) -> (f64, f64) {
    match (deg, local) {
        (Deg::P1, 0) => (1.0 - s, -1.0),
        (Deg::P1, _) => (s, 1.0),
        (Deg::P2, 0) => (2.0 * (s - 0.5) * (s - 1.0), 4.0 * s - 3.0),
        (Deg::P2, 1) => (4.0 * s * (1.0 - s), 4.0 - 8.0 * s),
        (Deg::P2, _) => (2.0 * s * (s - 0.5), 4.0 * s - 1.0),
    }
}

/// Interior basis functions: P1 dof d sits at node d+1; P2 dof 2e is the
/// midpoint of element e and dof 2e+1 the vertex e+1.
#[derive(Clone, Debug)]
pub struct Basis {
    pub nodes: Vec<f64>,
    pub deg: Deg,
}

impl Basis {
    pub fn new(nodes: Vec<f64>, deg: Deg) -> Self {
        Self { nodes, deg }
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dofs(&self) -> usize {
        match self.deg {
            Deg::P1 => self.elements() - 1,
            Deg::P2 => 2 * self.elements() - 1,
        }
    }

    /// (element, local index) pairs carrying dof `d`.
    fn pieces(&self, d: usize) -> Vec<(usize, usize)> {
        match self.deg {
            Deg::P1 => vec![(d, 1), (d + 1, 0)],
            Deg::P2 if d % 2 == 0 => vec![(d / 2, 1)],
            Deg::P2 => vec![(d / 2, 2), (d / 2 + 1, 0)],
        }
    }

    fn eval_with(&self, d: usize, x: f64, deriv: bool) -> f64 {
        for (e, loc) in self.pieces(d) {
            let (l, r) = (self.nodes[e], self.nodes[e + 1]);
            if x >= l && x < r {
                let h = r - l;
                let (v, dv) = shape(self.deg, loc, (x - l) / h);
                return if deriv { dv / h } else { v };
            }
        }
        0.0
    }

    pub fn phi(&self, d: usize, x: f64) -> f64 {
        self.eval_with(d, x, false)
    }

    pub fn dphi(&self, d: usize, x: f64) -> f64 {
        self.eval_with(d, x, true)
    }

    pub fn support(&self, d: usize) -> (f64, f64) {
        let p = self.pieces(d);
        (self.nodes[p[0].0], self.nodes[p[p.len() - 1].0 + 1])
    }

    /// `(D^{2-alpha} phi_d)(x) = I^gamma phi_d'(x)` with `gamma = alpha - 1`,
    /// via `x - t = s^{1/gamma}`, which removes the kernel singularity. Each
    /// element piece uses its own local polynomial, so `t` rounding onto a
    /// node cannot drop a contribution.
    pub fn frac_deriv(&self, d: usize, gamma_: f64, x: f64) -> f64 {
        let mut total = 0.0;
        for (e, loc) in self.pieces(d) {
            let (l, r) = (self.nodes[e], self.nodes[e + 1]);
            if x <= l {
                continue;
            }
            let h = r - l;
            let lo = (x - r.min(x)).powf(gamma_);
            let hi = (x - l).powf(gamma_);
            let f = |s: f64| shape(self.deg, loc, (x - s.powf(1.0 / gamma_) - l) / h).1 / h;
            total += integrate(f, lo, hi, 1e-15);
        }
        total / gamma_fn(gamma_ + 1.0)
    }

    /// `int_0^1 f phi_d`, split at mesh nodes.
    pub fn moment<F: Fn(f64) -> f64>(&self, d: usize, f: F) -> f64 {
        let (l, r) = self.support(d);
        integrate_pieces(|x| f(x) * self.phi(d, x), l, r, &self.nodes, 1e-14)
    }

    /// `int phi_i' phi_j'`.
    pub fn stiffness(&self, i: usize, j: usize) -> f64 {
        let (li, ri) = self.support(i);
        let (lj, rj) = self.support(j);
        let (l, r) = (li.max(lj), ri.min(rj));
        if l >= r {
            return 0.0;
        }
        integrate_pieces(|x| self.dphi(i, x) * self.dphi(j, x), l, r, &self.nodes, 1e-14)
    }

    /// `int (D^{2-alpha} phi_i) q phi_j`.
    pub fn nonlocal<Q: Fn(f64) -> f64>(&self, i: usize, j: usize, gamma_: f64, q: Q) -> f64 {
        let (l, r) = self.support(j);
        let (li, _) = self.support(i);
        if r <= li {
            return 0.0;
        }
        integrate_graded(|x| self.frac_deriv(i, gamma_, x) * q(x) * self.phi(j, x), l.max(li), r, &self.nodes, 1e-12)
    }
}

/// `I^a x^b (x) = Gamma(b+1)/Gamma(b+a+1) x^{b+a}` computed by adaptive quadrature of the defining integral.
pub fn rl_integral_power_numeric(a: f64, b: f64, x: f64) -> f64 {
    // t = x u gives x^{a+b}/Gamma(a) int_0^1 u^b (1-u)^{a-1} du; split at 1/2 and
    // straighten each endpoint singularity with w = u^{b+1} and v = (1-u)^a.
    let left = integrate(|w: f64| (1.0 - w.powf(1.0 / (b + 1.0))).powf(a - 1.0), 0.0, 0.5f64.powf(b + 1.0), 1e-16) / (b + 1.0);
    let right = integrate(|v: f64| (1.0 - v.powf(1.0 / a)).powf(b), 0.0, 0.5f64.powf(a), 1e-16) / a;
    x.powf(a + b) * (left + right) / gamma_fn(a)
}
