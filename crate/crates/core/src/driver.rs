//! Problem-level orchestration: source solves with reconstruction of `u_h`,
//! the eigenproblem, and the preconditioning study.

use crate::assemble::{AssembledSystem, Assembler};
use crate::error::{invalid, Error, Result};
use crate::fraccalc::{FeDerivative, FracOrder};
use crate::mesh::FeSpace;
use crate::problem::ProblemSpec;

mod eigen;
mod precond;

pub use eigen::{solve_fslp, solve_fslp_with, EigenMethod, EigenOptions, EigenPair};
pub use precond::{condition_numbers, condition_study, ConditionRow};

/// `w_h` on a space together with what is needed to evaluate
/// `u_h = D^{2-alpha} w_h - (D^{2-alpha} w_h)(1) x^mu`.
#[derive(Debug, Clone)]
pub struct SolutionField {
    space: FeSpace,
    w: Vec<f64>,
    order: FracOrder,
    mu: f64,
    deriv: FeDerivative,
    boundary_value: f64,
}

impl SolutionField {
    pub fn new(space: FeSpace, w: Vec<f64>, order: FracOrder, mu: f64) -> Result<Self> {
        let deriv = FeDerivative::new(&space, &w, &order)?;
        let boundary_value = deriv.eval(1.0);
        Ok(Self { space, w, order, mu, deriv, boundary_value })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn w_coeffs(&self) -> &[f64] {
        &self.w
    }

    pub fn order(&self) -> &FracOrder {
        &self.order
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `(D^{2-alpha} w_h)(1)`.
    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    pub fn derivative(&self) -> &FeDerivative {
        &self.deriv
    }

    /// `w_h(x)`.
    pub fn w(&self, x: f64) -> f64 {
        self.space.expand(&self.w, x)
    }

    /// `u_h(x)`; zero at `x = 0`.
    pub fn u(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.deriv.eval(x) - self.boundary_value * x.powf(self.mu)
    }

    /// `u_h` at `x_e + h s` for every element and offset, as in [`FeDerivative::sample`].
    pub fn sample_u(&self, offsets: &[f64]) -> Vec<f64> {
        let mut out = self.deriv.sample(offsets);
        let mesh = self.space.mesh();
        let np = offsets.len();
        for e in 0..mesh.num_elements() {
            let (l, h) = (mesh.node(e), mesh.h(e));
            for (k, s) in offsets.iter().enumerate() {
                let x = (l + h * s).min(1.0);
                if x > 0.0 {
                    out[e * np + k] -= self.boundary_value * x.powf(self.mu);
                }
            }
        }
        out
    }

    /// Same field with coefficients multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.space.clone(), self.w.iter().map(|v| v * s).collect(), self.order, self.mu)
    }
}

/// `u_h(x)` for `x` in [0, 1].
pub fn reconstruct(sol: &SolutionField, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("point {x} outside [0, 1]")));
    }
    Ok(sol.u(x))
}

/// Outcome of a source solve.
#[derive(Debug, Clone)]
pub struct SourceSolution {
    pub field: SolutionField,
    /// `||A w - b||_inf / ||b||_inf` after refinement.
    pub residual: f64,
}

/// Solves `A w = b` with the structured factorization and iterative
/// refinement on residuals accumulated in doubled precision.
pub fn solve_system(system: &AssembledSystem) -> Result<(Vec<f64>, f64)> {
    let (w, rel) = system.solve_refined(4)?;
    if !rel.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("solution of the discrete system is not finite".into()));
    }
    Ok((w, rel))
}

/// Galerkin solve of the source problem on `space`.
pub fn solve_source(problem: &ProblemSpec, space: &FeSpace) -> Result<SolutionField> {
    Ok(solve_source_with(problem, space, &Assembler::default())?.field)
}

pub fn solve_source_with(problem: &ProblemSpec, space: &FeSpace, assembler: &Assembler) -> Result<SourceSolution> {
    let system = assembler.system(space, problem)?;
    let (w, residual) = solve_system(&system).map_err(|e| match e {
        Error::SingularMatrix { column, context } => Error::SingularMatrix {
            column,
            context: format!(
                "{context} (h = {:.3e}, alpha = {}; the mesh may be too coarse for unique solvability)",
                space.mesh().max_h(),
                problem.alpha()
            ),
        },
        other => other,
    })?;
    drop(system);
    let field = SolutionField::new(space.clone(), w, *problem.order(), problem.mu())?;
    Ok(SourceSolution { field, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::assemble_system;
    use crate::expr::FunctionExpr;
    use crate::fraccalc::frac_deriv_fefun;
    use crate::linalg::norm_inf;
    use crate::mesh::Degree;
    use crate::problem::Example;

    #[test]
    fn poisson_nodal_exactness() {
        let alpha = 1.7;
        let problem = ProblemSpec::new(alpha, alpha - 1.0, FunctionExpr::zero(), Example::B1.source()).unwrap();
        let space = FeSpace::uniform(8, Degree::P1).unwrap();
        let sol = solve_source(&problem, &space).unwrap();
        for (j, x) in space.dof_points().into_iter().enumerate() {
            assert!((sol.w_coeffs()[j] - x * (1.0 - x) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn p2_poisson_is_the_elementwise_ritz_projection() {
        // -w'' = x - x^2: vertices exact, bubble coefficient int f b / int b'^2
        let w = |x: f64| -x.powi(3) / 6.0 + x.powi(4) / 12.0 + x / 12.0;
        let f = |x: f64| x - x * x;
        let n = 6;
        let h = 1.0 / n as f64;
        let problem = ProblemSpec::new(1.6, 0.6, FunctionExpr::zero(), FunctionExpr::polynomial(&[0.0, 1.0, -1.0])).unwrap();
        let space = FeSpace::uniform(n, Degree::P2).unwrap();
        let sol = solve_source(&problem, &space).unwrap();
        let rule = crate::quad::gauss_legendre(10).unwrap();
        for e in 0..n {
            let a = e as f64 * h;
            let fb: f64 = rule.mapped(a, a + h).map(|(x, wq)| wq * f(x) * 4.0 * (x - a) / h * (1.0 - (x - a) / h)).sum();
            let c = fb / (16.0 / (3.0 * h));
            let mid = 0.5 * (w(a) + w(a + h)) + c;
            assert!((sol.w_coeffs()[2 * e] - mid).abs() < 1e-14);
            if e + 1 < n {
                assert!((sol.w_coeffs()[2 * e + 1] - w(a + h)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reconstruction_boundary_values() {
        for (degree, q) in [(Degree::P1, FunctionExpr::zero()), (Degree::P2, FunctionExpr::polynomial(&[0.0, 1.0]))] {
            let problem = ProblemSpec::new(1.55, 4.0, q, Example::C.source()).unwrap();
            let space = FeSpace::uniform(9, degree).unwrap();
            let sol = solve_source_with(&problem, &space, &Assembler::default()).unwrap();
            assert!(sol.residual < 1e-12);
            assert_eq!(sol.field.u(0.0), 0.0);
            assert!(sol.field.u(1.0).abs() < 1e-12);
            let fd = frac_deriv_fefun(&space, sol.field.w_coeffs(), problem.order(), 1.0).unwrap();
            assert!((fd - sol.field.boundary_value()).abs() < 1e-12);
            let sys = assemble_system(&space, &problem).unwrap();
            let gw: f64 = sys.g.iter().zip(sol.field.w_coeffs()).map(|(a, b)| a * b).sum();
            assert!((gw - sol.field.boundary_value()).abs() < 1e-12);
            let r: Vec<f64> = sys.apply(sol.field.w_coeffs()).iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
            assert!(norm_inf(&r) <= 1e-10 * norm_inf(&sys.rhs));
        }
    }

    #[test]
    fn zero_coefficients_reconstruct_zero() {
        let space = FeSpace::uniform(4, Degree::P2).unwrap();
        let order = FracOrder::new(1.5).unwrap();
        let sol = SolutionField::new(space.clone(), vec![0.0; space.dof_count()], order, 3.0).unwrap();
        for x in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(reconstruct(&sol, x).unwrap(), 0.0);
        }
        assert!(reconstruct(&sol, 1.5).is_err());
    }

    #[test]
    fn sampled_reconstruction_matches_pointwise() {
        let problem = ProblemSpec::new(1.8, 3.0, FunctionExpr::polynomial(&[0.0, 1.0]), Example::A.source()).unwrap();
        let space = FeSpace::uniform(6, Degree::P2).unwrap();
        let sol = solve_source(&problem, &space).unwrap();
        let offsets = [0.0, 0.25, 0.9, 1.0];
        let fast = sol.sample_u(&offsets);
        for e in 0..6 {
            for (k, s) in offsets.iter().enumerate() {
                let x = ((e as f64 + s) / 6.0).min(1.0);
                assert!((fast[e * 4 + k] - sol.u(x)).abs() < 1e-13);
            }
        }
    }
}
