//! Problem data: order, reconstruction exponent, potential and source, plus
//! the derived constant `c0` and coefficient function `p`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::expr::FunctionExpr;
use crate::fraccalc::FracOrder;
use crate::special::gamma;

/// Tolerance under which `mu` is snapped to `alpha - 1`.
const MU_SNAP: f64 = 1e-12;

/// One instance of `-D^alpha u + q u = f`, `u(0) = u(1) = 0`, in the
/// transformed form for `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    order: FracOrder,
    mu: f64,
    q: FunctionExpr,
    f: FunctionExpr,
    c0: f64,
}

impl ProblemSpec {
    /// Validates `mu >= alpha` or `mu == alpha - 1` and that `q` is a polynomial.
    pub fn new(alpha: f64, mu: f64, q: FunctionExpr, f: FunctionExpr) -> Result<Self> {
        let order = FracOrder::new(alpha)?;
        let corner = alpha - 1.0;
        let mu = if (mu - corner).abs() <= MU_SNAP { corner } else { mu };
        if !(mu.is_finite() && (mu == corner || mu >= alpha)) {
            return Err(invalid(format!("mu must satisfy mu >= alpha or mu = alpha - 1, got mu = {mu}, alpha = {alpha}")));
        }
        if q.as_polynomial().is_none() {
            return Err(Error::UnsupportedExpression(format!("potential must be a polynomial, got {q}")));
        }
        f.check_integrable()?;
        let c0 = if mu == corner { 0.0 } else { gamma(mu + 1.0) / gamma(1.0 + mu - alpha) };
        if !c0.is_finite() {
            return Err(Error::Numeric(format!("c0 is not finite for mu = {mu}, alpha = {alpha}")));
        }
        Ok(Self { order, mu, q, f, c0 })
    }

    /// Eigenproblem data: no source term.
    pub fn eigen(alpha: f64, mu: f64, q: FunctionExpr) -> Result<Self> {
        Self::new(alpha, mu, q, FunctionExpr::zero())
    }

    pub fn with_source(&self, f: FunctionExpr) -> Result<Self> {
        Self::new(self.alpha(), self.mu, self.q.clone(), f)
    }

    pub fn order(&self) -> &FracOrder {
        &self.order
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True when `mu = alpha - 1`, where the `c0` term vanishes.
    pub fn is_regular_corner(&self) -> bool {
        self.mu == self.order.gamma()
    }

    pub fn q(&self) -> &FunctionExpr {
        &self.q
    }

    pub fn f(&self) -> &FunctionExpr {
        &self.f
    }

    /// `Gamma(mu+1) / Gamma(1+mu-alpha)`, zero at the corner.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `p(x) = c0 x^{mu-alpha} - q(x) x^mu`.
    pub fn p(&self) -> FunctionExpr {
        let lead = FunctionExpr::monomial(self.c0, self.mu - self.alpha());
        let tail = &self.q * &FunctionExpr::monomial(1.0, self.mu);
        &lead - &tail
    }
}

/// The four source terms of the experiment suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    /// `f = x(1-x)`
    A,
    /// `f = 1`
    B1,
    /// `f = (1-x)^{3/5}`
    B2,
    /// `f` = indicator of [0, 1/2]
    C,
}

impl Example {
    pub const ALL: [Example; 4] = [Example::A, Example::B1, Example::B2, Example::C];

    pub fn source(self) -> FunctionExpr {
        match self {
            Example::A => FunctionExpr::polynomial(&[0.0, 1.0, -1.0]),
            Example::B1 => FunctionExpr::constant(1.0),
            Example::B2 => FunctionExpr::one_minus_x_pow(0.6),
            Example::C => FunctionExpr::step(0.0, 0.5),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Example::A => "a",
            Example::B1 => "b1",
            Example::B2 => "b2",
            Example::C => "c",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Example::A),
            "b1" => Ok(Example::B1),
            "b2" => Ok(Example::B2),
            "c" => Ok(Example::C),
            other => Err(invalid(format!("unknown example '{other}', expected a, b1, b2 or c"))),
        }
    }
}
