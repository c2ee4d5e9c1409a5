//! Fixtures shared by the criterion benches in `benches/`.

use rlfem::{Example, FunctionExpr, ProblemSpec};

/// Example (b1) with `q = x`, `mu = 4`: the workhorse of the reference-mesh studies.
pub fn source_problem(alpha: f64) -> ProblemSpec {
    ProblemSpec::new(alpha, 4.0, FunctionExpr::polynomial(&[0.0, 1.0]), Example::B1.source()).expect("valid problem")
}

/// Eigenproblem with `q = x`, `mu = 3`.
pub fn eigen_problem(alpha: f64) -> ProblemSpec {
    ProblemSpec::eigen(alpha, 3.0, FunctionExpr::polynomial(&[0.0, 1.0])).expect("valid problem")
}
