//! Closed-form functions on [0, 1]: finite sums of
//! `c * x^a * (1-x)^b * step(l, r)`.
//!
//! Keeping the endpoint exponents explicit lets quadrature absorb the
//! singular factors into Gauss-Jacobi weights.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quad::RuleCache;

/// `coef * x^x_pow * (1-x)^omx_pow`, restricted to `window` when present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub x_pow: f64,
    pub omx_pow: f64,
    pub window: Option<(f64, f64)>,
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        if let Some((l, r)) = self.window {
            if x < l || x > r {
                return 0.0;
            }
        }
        let mut v = self.coef;
        if self.x_pow != 0.0 {
            v *= x.powf(self.x_pow);
        }
        if self.omx_pow != 0.0 {
            v *= (1.0 - x).powf(self.omx_pow);
        }
        v
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        let win = |t: &Term| t.window.map(|(l, r)| (l, r));
        match (win(self), win(other)) {
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)),
            (None, None) => Ordering::Equal,
        }
        .then(self.omx_pow.total_cmp(&other.omx_pow))
        .then(self.x_pow.total_cmp(&other.x_pow))
    }

    fn same_key(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }

    fn times(&self, other: &Self) -> Option<Term> {
        let window = match (self.window, other.window) {
            (None, w) | (w, None) => w,
            (Some((a, b)), Some((c, d))) => {
                let (l, r) = (a.max(c), b.min(d));
                if l >= r {
                    return None;
                }
                Some((l, r))
            }
        };
        Some(Term {
            coef: self.coef * other.coef,
            x_pow: self.x_pow + other.x_pow,
            omx_pow: self.omx_pow + other.omx_pow,
            window,
        })
    }
}

fn is_nonneg_int(v: f64) -> bool {
    v >= 0.0 && v.fract() == 0.0
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sum of [`Term`]s in canonical form: like terms merged, integer powers of
/// `(1-x)` expanded, windows clipped to [0, 1], terms sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionExpr {
    terms: Vec<Term>,
}

impl FunctionExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term { coef: c, x_pow: 0.0, omx_pow: 0.0, window: None }])
    }

    /// `c x^a`.
    pub fn monomial(c: f64, a: f64) -> Self {
        Self::from_terms(vec![Term { coef: c, x_pow: a, omx_pow: 0.0, window: None }])
    }

    /// `(1-x)^b`.
    pub fn one_minus_x_pow(b: f64) -> Self {
        Self::from_terms(vec![Term { coef: 1.0, x_pow: 0.0, omx_pow: b, window: None }])
    }

    /// Indicator of [l, r].
    pub fn step(l: f64, r: f64) -> Self {
        Self::from_terms(vec![Term { coef: 1.0, x_pow: 0.0, omx_pow: 0.0, window: Some((l, r)) }])
    }

    /// `sum_k coeffs[k] x^k`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| Term { coef: c, x_pow: k as f64, omx_pow: 0.0, window: None })
                .collect(),
        )
    }

    pub fn from_terms(raw: Vec<Term>) -> Self {
        let mut expanded = Vec::with_capacity(raw.len());
        for mut t in raw {
            if t.coef == 0.0 {
                continue;
            }
            if let Some((l, r)) = t.window {
                let (l, r) = (l.max(0.0), r.min(1.0));
                if l >= r {
                    continue;
                }
                t.window = if l == 0.0 && r == 1.0 { None } else { Some((l, r)) };
            }
            if t.omx_pow != 0.0 && is_nonneg_int(t.omx_pow) {
                let k = t.omx_pow as u32;
                for m in 0..=k {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    expanded.push(Term {
                        coef: t.coef * sign * binomial(k, m),
                        x_pow: t.x_pow + m as f64,
                        omx_pow: 0.0,
                        window: t.window,
                    });
                }
            } else {
                expanded.push(t);
            }
        }
        expanded.sort_by(|a, b| a.key_cmp(b));
        let mut terms: Vec<Term> = Vec::with_capacity(expanded.len());
        for t in expanded {
            match terms.last_mut() {
                Some(last) if last.same_key(&t) => last.coef += t.coef,
                _ => terms.push(t),
            }
        }
        terms.retain(|t| t.coef != 0.0);
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Coefficients in ascending degree when this is a plain polynomial.
    pub fn as_polynomial(&self) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.window.is_some() || t.omx_pow != 0.0 || !is_nonneg_int(t.x_pow) {
                return None;
            }
            let k = t.x_pow as usize;
            if out.len() <= k {
                out.resize(k + 1, 0.0);
            }
            out[k] += t.coef;
        }
        Some(out)
    }

    /// Rejects exponents that make the function non-integrable on (0, 1).
    pub fn check_integrable(&self) -> Result<()> {
        for t in &self.terms {
            for p in [t.x_pow, t.omx_pow] {
                if p <= -1.0 {
                    return Err(Error::DivergentIntegral { exponent: p });
                }
            }
        }
        Ok(())
    }

    /// Raises to a real power. Non-integer powers need a single windowless
    /// term or a positive multiple of `1 - x`.
    pub fn pow(&self, s: f64) -> Result<Self> {
        if is_nonneg_int(s) && s <= 64.0 {
            let mut acc = Self::constant(1.0);
            for _ in 0..s as u32 {
                acc = &acc * self;
            }
            return Ok(acc);
        }
        if let [t] = self.terms.as_slice() {
            if t.window.is_none() && t.coef > 0.0 {
                return Ok(Self::from_terms(vec![Term {
                    coef: t.coef.powf(s),
                    x_pow: t.x_pow * s,
                    omx_pow: t.omx_pow * s,
                    window: None,
                }]));
            }
        }
        if let Some(p) = self.as_polynomial() {
            if p.len() == 2 && p[0] > 0.0 && p[1] == -p[0] {
                return Ok(Self::from_terms(vec![Term {
                    coef: p[0].powf(s),
                    x_pow: 0.0,
                    omx_pow: s,
                    window: None,
                }]));
            }
        }
        Err(Error::UnsupportedExpression(format!("cannot raise ({self}) to the power {s}")))
    }

    /// `int_l^r self(x) g(x) dx` for `g` smooth on [l, r].
    ///
    /// Window edges split the interval. Non-integer powers of `x` at 0 and of
    /// `1-x` at 1 go into Gauss-Jacobi weights when the interval touches them.
    pub fn integrate_against<G: Fn(f64) -> f64>(
        &self,
        l: f64,
        r: f64,
        g: G,
        n: usize,
        rules: &mut RuleCache,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let (lo, hi) = match t.window {
                Some((wl, wr)) => (l.max(wl), r.min(wr)),
                None => (l, r),
            };
            if lo >= hi {
                continue;
            }
            let absorb_left = lo == 0.0 && t.x_pow != 0.0 && !is_nonneg_int(t.x_pow);
            let absorb_right = hi == 1.0 && t.omx_pow != 0.0;
            let a = if absorb_right { t.omx_pow } else { 0.0 };
            let b = if absorb_left { t.x_pow } else { 0.0 };
            for p in [a, b] {
                if p <= -1.0 {
                    return Err(Error::DivergentIntegral { exponent: p });
                }
            }
            let rule = rules.get(n, a, b)?;
            let smooth = Term {
                coef: t.coef,
                x_pow: if absorb_left { 0.0 } else { t.x_pow },
                omx_pow: if absorb_right { 0.0 } else { t.omx_pow },
                window: None,
            };
            for (x, w) in rule.mapped(lo, hi) {
                let v = smooth.eval(x) * g(x);
                if !v.is_finite() {
                    return Err(Error::Numeric(format!("integrand of ({self}) is {v} at x = {x}")));
                }
                acc += w * v;
            }
        }
        Ok(acc)
    }

    /// Parses the mini-grammar: numbers, `x`, `(1-x)`, `step(a,b)`, `^`
    /// with decimal or `p/q` exponents, combined with `+ - *` and parentheses.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        e.check_integrable().map_err(|_| Error::Parse {
            position: 0,
            message: "exponents must exceed -1".into(),
        })?;
        Ok(e)
    }
}

pub fn parse_function_expr(text: &str) -> Result<FunctionExpr> {
    FunctionExpr::parse(text)
}

impl FromStr for FunctionExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Add for &FunctionExpr {
    type Output = FunctionExpr;
    fn add(self, rhs: &FunctionExpr) -> FunctionExpr {
        FunctionExpr::from_terms(self.terms.iter().chain(&rhs.terms).copied().collect())
    }
}

impl Neg for &FunctionExpr {
    type Output = FunctionExpr;
    fn neg(self) -> FunctionExpr {
        FunctionExpr::from_terms(self.terms.iter().map(|t| Term { coef: -t.coef, ..*t }).collect())
    }
}

impl Sub for &FunctionExpr {
    type Output = FunctionExpr;
    fn sub(self, rhs: &FunctionExpr) -> FunctionExpr {
        self + &(-rhs)
    }
}

impl Mul for &FunctionExpr {
    type Output = FunctionExpr;
    fn mul(self, rhs: &FunctionExpr) -> FunctionExpr {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                if let Some(t) = a.times(b) {
                    out.push(t);
                }
            }
        }
        FunctionExpr::from_terms(out)
    }
}

impl Mul<f64> for &FunctionExpr {
    type Output = FunctionExpr;
    fn mul(self, c: f64) -> FunctionExpr {
        FunctionExpr::from_terms(self.terms.iter().map(|t| Term { coef: c * t.coef, ..*t }).collect())
    }
}

fn fmt_power(out: &mut Vec<String>, base: &str, p: f64) {
    if p == 1.0 {
        out.push(base.to_string());
    } else if p != 0.0 {
        out.push(format!("{base}^{p}"));
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let neg = t.coef < 0.0;
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts = Vec::new();
            fmt_power(&mut parts, "x", t.x_pow);
            fmt_power(&mut parts, "(1-x)", t.omx_pow);
            if let Some((l, r)) = t.window {
                parts.push(format!("step({l},{r})"));
            }
            let mag = t.coef.abs();
            if mag != 1.0 || parts.is_empty() {
                parts.insert(0, format!("{mag}"));
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { position: self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<FunctionExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FunctionExpr> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<FunctionExpr> {
        if self.eat(b'-') {
            return Ok(-&self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<FunctionExpr> {
        let start = self.pos;
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let s = self.exponent()?;
            if s <= -1.0 {
                return Err(Error::Parse { position: at, message: format!("exponent {s} must exceed -1") });
            }
            return base.pow(s).map_err(|e| Error::Parse { position: start, message: e.to_string() });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FunctionExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(FunctionExpr::monomial(1.0, 1.0))
            }
            Some(b's') => {
                if !self.src[self.pos..].starts_with(b"step") {
                    return Err(self.error("unknown identifier"));
                }
                self.pos += 4;
                self.expect(b'(')?;
                let l = self.signed_number()?;
                self.expect(b',')?;
                let r = self.signed_number()?;
                self.expect(b')')?;
                if !(l < r) {
                    return Err(self.error("step(a,b) needs a < b"));
                }
                Ok(FunctionExpr::step(l, r))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(FunctionExpr::constant(self.number()?)),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn exponent(&mut self) -> Result<f64> {
        let paren = self.eat(b'(');
        let mut v = self.signed_number()?;
        if self.eat(b'/') {
            let d = self.number()?;
            if d == 0.0 {
                return Err(self.error("zero denominator in exponent"));
            }
            v /= d;
        }
        if paren {
            self.expect(b')')?;
        }
        Ok(v)
    }

    fn signed_number(&mut self) -> Result<f64> {
        if self.eat(b'-') {
            return Ok(-self.number()?);
        }
        self.eat(b'+');
        self.number()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap_or("");
        let v: f64 = text.parse().map_err(|_| self.error("malformed number"))?;
        self.pos = i;
        Ok(v)
    }
}
