//! Brute-force integration oracles used only by tests.
//!
//! These deliberately share no code with the quadrature module.

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // pre-split into panels so narrow features are not missed
    let panels = 16;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + (b - a) * k as f64 / panels as f64;
        let hi = a + (b - a) * (k + 1) as f64 / panels as f64;
        let m = 0.5 * (lo + hi);
        let (flo, fhi, fm) = (f(lo), f(hi), f(m));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        acc += simpson_step(f, lo, flo, hi, fhi, m, fm, whole, tol / panels as f64, 40);
    }
    acc
}

/// Integrates a function with integrable power singularities at either end of
/// [a, b] by the smooth end-clustering substitution x = a + (b-a) s^p/(s^p + (1-s)^p).
pub fn endpoint_singular<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let p = 6.0f64;
    let g = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let sp = s.powf(p);
        let tp = (1.0 - s).powf(p);
        let den = sp + tp;
        let tau = sp / den;
        let dtau = p * (s.powf(p - 1.0) * tp + sp * (1.0 - s).powf(p - 1.0)) / (den * den);
        let x = a + (b - a) * tau;
        if x <= a || x >= b {
            return 0.0;
        }
        f(x) * (b - a) * dtau
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

/// Splits [a, b] at the given breakpoints and integrates each piece with
/// [`endpoint_singular`].
pub fn piecewise_singular<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts.windows(2).map(|w| endpoint_singular(f, w[0], w[1], tol)).sum()
}
