//! Ground truth for convergence studies: closed-form solutions when `q = 0`,
//! fine-mesh reference solutions otherwise, L2 error norms and rates.

use crate::driver::{solve_source, SolutionField};
use crate::error::{invalid, Error, Result};
use crate::expr::{FunctionExpr, Term};
use crate::mesh::{Degree, FeSpace};
use crate::problem::ProblemSpec;
use crate::quad::{gauss_jacobi, gauss_legendre, QuadRule};
use crate::special::gamma;

/// Gauss points per error-integration panel.
pub const PANEL_POINTS: usize = 16;

/// `I^alpha` of one term of the source, evaluable pointwise.
#[derive(Debug, Clone)]
enum IntegralPart {
    /// `c x^p`.
    Power { c: f64, p: f64 },
    /// `c (x - s)_+^p`.
    Shifted { c: f64, s: f64, p: f64 },
    /// `c/Gamma(alpha) int_0^x t^{alpha-1} (x-t)^k (1-x+t)^sigma dt`.
    Numeric { c: f64, k: i32, sigma: f64 },
}

/// Closed-form (or quadrature-backed) solution of the `q = 0` problem,
/// `u = -I^alpha f + (I^alpha f)(1) x^{alpha-1}`.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    alpha: f64,
    parts: Vec<IntegralPart>,
    at_one: f64,
    near: QuadRule,
    far: QuadRule,
}

impl ExactSolution {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(I^alpha f)(x)`.
    pub fn integral(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| self.part_value(p, x)).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -self.integral(x) + self.at_one * x.powf(self.alpha - 1.0)
    }

    fn part_value(&self, part: &IntegralPart, x: f64) -> f64 {
        match *part {
            IntegralPart::Power { c, p } => {
                if x <= 0.0 {
                    0.0
                } else {
                    c * x.powf(p)
                }
            }
            IntegralPart::Shifted { c, s, p } => {
                if x <= s {
                    0.0
                } else {
                    c * (x - s).powf(p)
                }
            }
            IntegralPart::Numeric { c, k, sigma } => c * self.numeric(x, k, sigma) / gamma(self.alpha),
        }
    }

    /// `int_0^x t^{alpha-1} (x-t)^k (delta+t)^sigma dt` with `delta = 1-x`,
    /// on panels graded geometrically toward `t = 0`.
    fn numeric(&self, x: f64, k: i32, sigma: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let delta = 1.0 - x;
        let smooth = |t: f64| (x - t).powi(k) * (delta + t).powf(sigma);
        let mut acc = 0.0;
        let mut hi = x;
        let mut levels = 0;
        while hi > 0.5 * delta && levels < 60 {
            let lo = 0.5 * hi;
            acc += self.far.mapped(lo, hi).map(|(t, w)| w * t.powf(self.alpha - 1.0) * smooth(t)).sum::<f64>();
            hi = lo;
            levels += 1;
        }
        if delta == 0.0 {
            // t^{alpha-1+sigma} (x-t)^k on [0, hi]
            let rule = gauss_jacobi(PANEL_POINTS, 0.0, self.alpha - 1.0 + sigma).expect("valid exponent");
            acc + rule.mapped(0.0, hi).map(|(t, w)| w * (x - t).powi(k)).sum::<f64>()
        } else {
            acc + self.near.mapped(0.0, hi).map(|(t, w)| w * smooth(t)).sum::<f64>()
        }
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact solution for `q = 0`. Supports powers `x^b`, integer polynomials on
/// windows, and `x^k (1-x)^sigma`.
pub fn exact_solution_q0(f: &FunctionExpr, alpha: f64) -> Result<ExactSolution> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    f.check_integrable()?;
    let mut parts = Vec::new();
    for t in f.terms() {
        parts.extend(term_parts(t, alpha)?);
    }
    let mut sol = ExactSolution {
        alpha,
        parts,
        at_one: 0.0,
        near: gauss_jacobi(20, 0.0, alpha - 1.0)?,
        far: gauss_legendre(20)?,
    };
    sol.at_one = sol.integral(1.0);
    Ok(sol)
}

fn term_parts(t: &Term, alpha: f64) -> Result<Vec<IntegralPart>> {
    let unsupported = || Error::UnsupportedExpression(format!("no closed form for I^alpha of {}", FunctionExpr::from_terms(vec![*t])));
    let int_pow = t.x_pow >= 0.0 && t.x_pow.fract() == 0.0;
    match (t.window, t.omx_pow == 0.0) {
        (None, true) => {
            let b = t.x_pow;
            Ok(vec![IntegralPart::Power { c: t.coef * gamma(b + 1.0) / gamma(b + alpha + 1.0), p: b + alpha }])
        }
        (None, false) if int_pow => Ok(vec![IntegralPart::Numeric { c: t.coef, k: t.x_pow as i32, sigma: t.omx_pow }]),
        (Some((l, r)), true) if int_pow => {
            // x^k on [l, r] as shifted powers (x-l)^i, with the tail beyond r removed
            let k = t.x_pow as u32;
            let mut out = Vec::new();
            for i in 0..=k {
                let ci = t.coef * binom(k, i) * l.powi((k - i) as i32);
                if ci == 0.0 {
                    continue;
                }
                let gi = gamma(i as f64 + 1.0);
                out.push(IntegralPart::Shifted { c: ci * gi / gamma(i as f64 + alpha + 1.0), s: l, p: i as f64 + alpha });
                if r < 1.0 {
                    for m in 0..=i {
                        let cm = ci * binom(i, m) * (r - l).powi((i - m) as i32);
                        let gm = gamma(m as f64 + 1.0);
                        out.push(IntegralPart::Shifted { c: -cm * gm / gamma(m as f64 + alpha + 1.0), s: r, p: m as f64 + alpha });
                    }
                }
            }
            Ok(out)
        }
        _ => Err(unsupported()),
    }
}

/// Uniform panels on [0, 1] with `PANEL_POINTS` Gauss points each, the
/// substitution `x = x_e + h t^2` inside every panel (the fields carry a
/// `(x - x_e)^gamma` term at each left node) and geometric grading of the
/// first panel toward 0.
#[derive(Debug, Clone)]
pub struct ErrorGrid {
    n: usize,
    offsets: Vec<f64>,
    unit_weights: Vec<f64>,
    head_points: Vec<f64>,
    head_weights: Vec<f64>,
}

/// Values of a function on an [`ErrorGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    head: Vec<f64>,
    /// `body[e * P + k]` for panels `e >= 1`; entries of panel 0 are unused.
    body: Vec<f64>,
}

impl ErrorGrid {
    /// `n` panels; `alpha` sets the grading depth so the untreated tail near 0
    /// is below double precision for integrands like `x^{2(alpha-1)}`.
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("error grid needs at least one panel"));
        }
        let rule = gauss_legendre(PANEL_POINTS)?;
        let mut offsets = Vec::with_capacity(PANEL_POINTS);
        let mut unit_weights = Vec::with_capacity(PANEL_POINTS);
        for (t, w) in rule.mapped(0.0, 1.0) {
            offsets.push(t * t);
            unit_weights.push(2.0 * t * w);
        }
        let h = 1.0 / n as f64;
        let levels = ((53.0 / (2.0 * alpha - 1.0).max(0.5)).ceil() as usize).min(60);
        let mut head_points = Vec::new();
        let mut head_weights = Vec::new();
        let mut hi = h;
        for _ in 0..levels {
            let lo = 0.5 * hi;
            for (x, w) in rule.mapped(lo, hi) {
                head_points.push(x);
                head_weights.push(w);
            }
            hi = lo;
        }
        for (x, w) in rule.mapped(0.0, hi) {
            head_points.push(x);
            head_weights.push(w);
        }
        Ok(Self { n, offsets, unit_weights, head_points, head_weights })
    }

    pub fn panels(&self) -> usize {
        self.n
    }

    fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn sample_fn<F: Fn(f64) -> f64>(&self, f: F) -> GridSamples {
        let np = self.offsets.len();
        let h = self.h();
        let mut body = vec![0.0; self.n * np];
        for e in 1..self.n {
            for (k, s) in self.offsets.iter().enumerate() {
                body[e * np + k] = f(((e as f64) + s) * h);
            }
        }
        GridSamples { head: self.head_points.iter().map(|&x| f(x)).collect(), body }
    }

    /// Samples `u_h`; fast when the field lives on a uniform mesh whose
    /// element count divides the panel count.
    pub fn sample_field(&self, sol: &SolutionField) -> GridSamples {
        let mesh = sol.space().mesh();
        let nc = mesh.num_elements();
        if !mesh.is_uniform() || self.n % nc != 0 {
            return self.sample_fn(|x| sol.u(x));
        }
        let r = self.n / nc;
        let np = self.offsets.len();
        let coarse_offsets: Vec<f64> =
            (0..r).flat_map(|j| self.offsets.iter().map(move |s| (j as f64 + s) / r as f64)).collect();
        let vals = sol.sample_u(&coarse_offsets);
        let mut body = vec![0.0; self.n * np];
        for (big_e, chunk) in vals.chunks(r * np).enumerate() {
            for j in 0..r {
                let e = big_e * r + j;
                body[e * np..(e + 1) * np].copy_from_slice(&chunk[j * np..(j + 1) * np]);
            }
        }
        body[..np].iter_mut().for_each(|v| *v = 0.0);
        GridSamples { head: self.head_points.iter().map(|&x| sol.u(x)).collect(), body }
    }

    /// `int_0^1 a b dx`.
    pub fn inner(&self, a: &GridSamples, b: &GridSamples) -> f64 {
        let np = self.offsets.len();
        let h = self.h();
        let mut acc: f64 = self.head_weights.iter().zip(a.head.iter().zip(&b.head)).map(|(w, (x, y))| w * x * y).sum();
        for e in 1..self.n {
            let (ra, rb) = (&a.body[e * np..(e + 1) * np], &b.body[e * np..(e + 1) * np]);
            let s: f64 = self.unit_weights.iter().zip(ra.iter().zip(rb)).map(|(w, (x, y))| w * x * y).sum();
            acc += h * s;
        }
        acc
    }

    /// `||a - b||_{L2}`.
    pub fn distance(&self, a: &GridSamples, b: &GridSamples) -> f64 {
        let np = self.offsets.len();
        let h = self.h();
        let sq = |x: f64| x * x;
        let mut acc: f64 = self.head_weights.iter().zip(a.head.iter().zip(&b.head)).map(|(w, (x, y))| w * sq(x - y)).sum();
        for e in 1..self.n {
            let (ra, rb) = (&a.body[e * np..(e + 1) * np], &b.body[e * np..(e + 1) * np]);
            let s: f64 = self.unit_weights.iter().zip(ra.iter().zip(rb)).map(|(w, (x, y))| w * sq(x - y)).sum();
            acc += h * s;
        }
        acc.max(0.0).sqrt()
    }

    pub fn norm(&self, a: &GridSamples) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }
}

impl GridSamples {
    pub fn scale(&mut self, s: f64) {
        self.head.iter_mut().chain(self.body.iter_mut()).for_each(|v| *v *= s);
    }
}

/// `||u_h - u_ref||_{L2}` for pointwise evaluators, with panels between the
/// sorted `breaks` (kinks of either function) plus 0 and 1.
pub fn l2_error<F, G>(uh: F, uref: G, breaks: &[f64], alpha: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > 0.0 && *x < 1.0).collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rule = gauss_legendre(PANEL_POINTS)?;
    let sq = |x: f64| {
        let d = uh(x) - uref(x);
        d * d
    };
    let mut acc = 0.0;
    // graded first panel
    let levels = ((53.0 / (2.0 * alpha - 1.0).max(0.5)).ceil() as usize).min(60);
    let mut hi = pts[1];
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += rule.mapped(lo, hi).map(|(x, w)| w * sq(x)).sum::<f64>();
        hi = lo;
    }
    acc += rule.mapped(0.0, hi).map(|(x, w)| w * sq(x)).sum::<f64>();
    for win in pts.windows(2).skip(1) {
        let (l, h) = (win[0], win[1] - win[0]);
        acc += rule.mapped(0.0, 1.0).map(|(t, w)| 2.0 * t * w * h * sq(l + h * t * t)).sum::<f64>();
    }
    if !acc.is_finite() {
        return Err(Error::Numeric("L2 error integrand is not finite".into()));
    }
    Ok(acc.max(0.0).sqrt())
}

/// Rates `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`; `None` where an error is not positive.
pub fn empirical_rates(errors: &[f64], h: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != h.len() {
        return Err(invalid("errors and mesh sizes differ in length"));
    }
    if errors.len() < 2 {
        return Err(invalid("rates need at least two levels"));
    }
    Ok(errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, hh)| {
            if e[0] > 0.0 && e[1] > 0.0 && hh[0] > hh[1] {
                Some((e[0] / e[1]).ln() / (hh[0] / hh[1]).ln())
            } else {
                None
            }
        })
        .collect())
}

/// Rates for successive mesh halvings.
pub fn empirical_rate(errors: &[f64]) -> Result<Vec<Option<f64>>> {
    let h: Vec<f64> = (0..errors.len()).map(|i| 0.5f64.powi(i as i32)).collect();
    empirical_rates(errors, &h)
}

/// Predicted L2 rate for `u_h`, or `None` where no estimate applies
/// (`alpha < 3/2`, or P2 with `alpha - 1 != mu < alpha + 1/2`).
pub fn theoretical_rate(problem: &ProblemSpec, degree: Degree, source_in_l2_only: bool) -> Option<f64> {
    let alpha = problem.alpha();
    let k = degree.k();
    if alpha < 1.5 {
        return None;
    }
    if problem.q().is_zero() && problem.is_regular_corner() {
        return Some(alpha + k);
    }
    if degree == Degree::P2 && !problem.is_regular_corner() && problem.mu() < alpha + 0.5 {
        return None;
    }
    if source_in_l2_only {
        // f only in H^beta: one half order lost against smooth data
        return Some(alpha + k - 0.5 - if degree == Degree::P1 { 0.0 } else { 0.5 });
    }
    Some(alpha + k - 0.5)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub label: String,
    pub alpha: f64,
    pub mu: f64,
    pub degree: Degree,
    pub levels: Vec<u32>,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub rates: Vec<Option<f64>>,
    pub theoretical: Option<f64>,
    /// How ground truth was obtained.
    pub reference: String,
}

impl ConvergenceReport {
    pub fn final_rate(&self) -> Option<f64> {
        self.rates.last().copied().flatten()
    }
}

/// P2 solution on `n` uniform elements used as ground truth.
pub fn reference_on(problem: &ProblemSpec, n: usize) -> Result<SolutionField> {
    let space = FeSpace::uniform(n, Degree::P2)?;
    solve_source(problem, &space)
}

/// P2 reference on the uniform mesh with `h = 1/2^fine_m`.
pub fn reference_solution(problem: &ProblemSpec, fine_m: u32) -> Result<SolutionField> {
    if fine_m > 13 {
        return Err(Error::ResourceLimit(format!("reference level {fine_m} exceeds the dense limit of 13")));
    }
    reference_on(problem, 1usize << fine_m)
}
