//! Gauss-Legendre and Gauss-Jacobi rules, and composite integration helpers.
//!
//! Rules are generated by Newton iteration on the three-term recurrence of the
//! Jacobi polynomials P_n^{(a,b)}, with Chebyshev-angle starting guesses and
//! deflation against roots already found. No eigen-solver is involved, so the
//! rules are bit-reproducible.

use crate::error::{invalid, Error, Result};
use crate::special::{beta, gamma};

/// Largest rule size accepted by the generators.
pub const MAX_POINTS: usize = 64;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// A Gaussian rule on [-1, 1] for the weight (1-x)^a (1+x)^b.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a: f64,
    b: f64,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exponent of the (1-x) factor.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Exponent of the (1+x) factor.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [l, r] for the weight (x-l)^b (r-x)^a.
    ///
    /// The returned weights already contain the Jacobian and the scaling of the
    /// weight function, so that `sum w_k g(x_k)` approximates
    /// `int_l^r (x-l)^b (r-x)^a g(x) dx`.
    pub fn mapped(&self, l: f64, r: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (r - l);
        let scale = half.powf(1.0 + self.a + self.b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (l + half * (x + 1.0), w * scale))
    }

    /// Approximates `int_l^r (x-l)^b (r-x)^a f(x) dx`; `f` is the smooth remainder.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, l: f64, r: f64, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.mapped(l, r) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Numeric(format!("integrand is {v} at x = {x}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Gauss-Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Jacobi polynomial P_n and P_{n-1} at `x` via the three-term recurrence.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    if n == 0 {
        return (p_prev, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Derivative of P_n from P_n and P_{n-1}.
fn jacobi_deriv(n: usize, a: f64, b: f64, x: f64, p: f64, p_prev: f64) -> f64 {
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    (nf * ((a - b) - s * x) * p + 2.0 * (nf + a) * (nf + b) * p_prev) / (s * (1.0 - x * x))
}

/// Gauss-Jacobi rule with `n` points for the weight (1-x)^a (1+x)^b.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<QuadRule> {
    if n == 0 || n > MAX_POINTS {
        return Err(invalid(format!("rule size {n} outside 1..={MAX_POINTS}")));
    }
    if !(a > -1.0) || !(b > -1.0) {
        return Err(invalid(format!("Jacobi exponents must exceed -1, got a={a}, b={b}")));
    }
    if n == 1 {
        // single node at the weighted mean
        let x = (b - a) / (a + b + 2.0);
        let w = 2f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0);
        return Ok(QuadRule { nodes: vec![x], weights: vec![w], a, b });
    }

    let nf = n as f64;
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    for i in 1..=n {
        let theta = std::f64::consts::PI * (4.0 * i as f64 - 1.0 + 2.0 * a) / (4.0 * nf + 2.0 * a + 2.0 * b + 2.0);
        let mut x = theta.cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev) = jacobi_pair(n, a, b, x);
            let dp = jacobi_deriv(n, a, b, x, p, p_prev);
            let defl: f64 = roots.iter().map(|r| 1.0 / (x - r)).sum();
            let step = p / (dp - p * defl);
            let next = (x - step).clamp(-1.0 + 1e-300, 1.0 - 1e-300);
            let delta = (next - x).abs();
            x = next;
            if delta <= NEWTON_TOL * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            // the last step is within a few ulps of the root; accept only if the residual is tiny
            let (p, p_prev) = jacobi_pair(n, a, b, x);
            let dp = jacobi_deriv(n, a, b, x, p, p_prev);
            if (p / dp).abs() > 1e-13 {
                return Err(Error::ConvergenceFailure(format!(
                    "Gauss-Jacobi node {i} of {n} (a={a}, b={b}) did not converge"
                )));
            }
        }
        roots.push(x);
    }
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());

    // direct gamma ratios stay in range for n <= 64 and are exact at integers
    let c = (gamma(nf + a + 1.0) / gamma(nf + a + b + 1.0))
        * (gamma(nf + b + 1.0) / gamma(nf + 1.0))
        * 2f64.powf(a + b + 1.0);
    let weights = roots
        .iter()
        .map(|&x| {
            let (p, p_prev) = jacobi_pair(n, a, b, x);
            let dp = jacobi_deriv(n, a, b, x, p, p_prev);
            c / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(QuadRule { nodes: roots, weights, a, b })
}

/// Integrates `f` over [l, r] with optional power singularities at the endpoints.
///
/// With `left = Some(s)` the integrand is `(x-l)^s f(x)`; likewise `right` for
/// `(r-x)^s`. Only the smooth remainder `f` is passed in.
pub fn integrate_element<F: FnMut(f64) -> f64>(
    f: F,
    l: f64,
    r: f64,
    n: usize,
    left: Option<f64>,
    right: Option<f64>,
) -> Result<f64> {
    for s in [left, right].into_iter().flatten() {
        if !(s > -1.0) {
            return Err(Error::DivergentIntegral { exponent: s });
        }
    }
    let rule = gauss_jacobi(n, right.unwrap_or(0.0), left.unwrap_or(0.0))?;
    rule.integrate(l, r, f)
}

/// Geometrically graded composite Gauss-Legendre integration over [0, 1].
///
/// Panels are [2^-(k+1), 2^-k] for k < `levels`, plus the tail [0, 2^-levels].
/// Suited to integrands behaving like x^s * smooth near the origin.
pub fn integrate_graded<F: FnMut(f64) -> f64>(mut f: F, levels: usize, points: usize) -> Result<f64> {
    if levels > 60 {
        return Err(invalid(format!("grading levels {levels} exceed 60")));
    }
    let rule = gauss_legendre(points)?;
    let mut acc = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &mut f)?;
        hi = lo;
    }
    acc += rule.integrate(0.0, hi, &mut f)?;
    Ok(acc)
}

/// Small memo of Jacobi rules keyed by size and exponents.
#[derive(Debug, Default)]
pub struct RuleCache {
    rules: Vec<((usize, u64, u64), QuadRule)>,
}

impl RuleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, n: usize, a: f64, b: f64) -> Result<&QuadRule> {
        let key = (n, a.to_bits(), b.to_bits());
        if let Some(pos) = self.rules.iter().position(|(k, _)| *k == key) {
            return Ok(&self.rules[pos].1);
        }
        let rule = gauss_jacobi(n, a, b)?;
        self.rules.push((key, rule));
        Ok(&self.rules.last().unwrap().1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;
    use crate::testutil::adaptive_simpson;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Exact moment int (1-x)^a (1+x)^b x^k dx via the Beta function.
    fn jacobi_moment(a: f64, b: f64, k: u32) -> (f64, f64) {
        let mut sum = 0.0;
        let mut mag = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom *= (k - j + 1) as f64 / j as f64;
            }
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            let term = binom * 2f64.powf(a + b + j as f64 + 1.0) * beta(a + 1.0, b + j as f64 + 1.0);
            sum += sign * term;
            mag += term;
        }
        (sum, mag)
    }

    #[test]
    fn legendre_small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_abs_diff_eq!(r1.weights()[0], 2.0, epsilon = 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        let s = (1.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(r2.nodes()[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes()[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn odd_monomial_vanishes() {
        let r = gauss_legendre(5).unwrap();
        let v = r.integrate(-1.0, 1.0, |x| x.powi(9)).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_degenerates_to_legendre() {
        let j = gauss_jacobi(3, 0.0, 0.0).unwrap();
        let l = gauss_legendre(3).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(j.nodes()[k], l.nodes()[k], epsilon = 1e-13);
            assert_abs_diff_eq!(j.weights()[k], l.weights()[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobi_weight_sum_matches_beta_moment() {
        let r = gauss_jacobi(4, 0.75, 0.0).unwrap();
        let total: f64 = r.weights().iter().sum();
        assert_abs_diff_eq!(total, 2f64.powf(1.75) / 1.75, epsilon = 1e-13);
    }

    #[test]
    fn jacobi_cosine_against_substituted_simpson() {
        // int_{-1}^{1} (1-x)^{-1/4} cos x dx, with x = 1 - s^4 removing the singularity
        let r = gauss_jacobi(8, -0.25, 0.0).unwrap();
        let v = r.integrate(-1.0, 1.0, f64::cos).unwrap();
        let top = 2f64.powf(0.25);
        let oracle = adaptive_simpson(&|s: f64| 4.0 * s * s * (1.0 - s.powi(4)).cos(), 0.0, top, 1e-14);
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-11);
    }

    #[test]
    fn element_integration_examples() {
        let v = integrate_element(|_| 1.0, 0.0, 1.0, 12, None, None).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        let h = 0.125;
        let v = integrate_element(|_| 1.0, 0.0, h, 12, Some(-0.25), None).unwrap();
        assert_abs_diff_eq!(v, h.powf(0.75) / 0.75, epsilon = 1e-14);
        assert!(matches!(
            integrate_element(|_| 1.0, 0.0, 1.0, 4, Some(-1.0), None),
            Err(Error::DivergentIntegral { .. })
        ));
        assert!(matches!(
            integrate_element(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1, None, None),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn graded_integration_examples() {
        let v = integrate_graded(|x| x.powf(0.1), 40, 16).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 1.1, epsilon = 1e-12);
        let alpha = 1.55;
        let v = integrate_graded(|x| x.powf(2.0 * (alpha - 1.0)), 40, 16).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * alpha - 1.0), epsilon = 1e-12);
        assert!(integrate_graded(|x| x, 61, 4).is_err());
    }

    #[test]
    fn argument_validation() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(65).is_err());
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(4, 0.0, -1.5).is_err());
        assert!(gauss_legendre(64).is_ok());
    }

    #[test]
    fn nodes_interlace_between_consecutive_sizes() {
        for &(a, b) in &[(0.0, 0.0), (0.75, 0.0), (-0.45, 0.3), (0.0, 0.55)] {
            for n in 2..20 {
                let lo = gauss_jacobi(n, a, b).unwrap();
                let hi = gauss_jacobi(n + 1, a, b).unwrap();
                for k in 0..n {
                    assert!(hi.nodes()[k] < lo.nodes()[k] && lo.nodes()[k] < hi.nodes()[k + 1]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn exact_to_degree_2n_minus_1(n in 1usize..12, a in -0.9f64..1.5, b in -0.9f64..1.5,
                                      coefs in proptest::collection::vec(-1.0f64..1.0, 24)) {
            let rule = gauss_jacobi(n, a, b).unwrap();
            prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
            let deg = 2 * n - 1;
            let poly = |x: f64| coefs[..=deg].iter().rev().fold(0.0, |acc, c| acc * x + c);
            let got = rule.integrate(-1.0, 1.0, poly).unwrap();
            let mut want = 0.0;
            let mut scale = 0.0;
            for (k, c) in coefs[..=deg].iter().enumerate() {
                let (m, mag) = jacobi_moment(a, b, k as u32);
                want += c * m;
                scale += c.abs() * mag;
            }
            prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "got {got}, want {want}");
        }
    }
}
