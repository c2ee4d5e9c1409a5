//! Galerkin finite elements for two-point boundary value problems with a
//! Riemann-Liouville derivative of order alpha in (1, 2).
//!
//! The solver works with the transformed unknown `w`, a second-order
//! nonlocal problem, and recovers `u = D^{2-alpha} w - (D^{2-alpha} w)(1) x^mu`.

pub mod assemble;
pub mod driver;
pub mod error;
pub mod expr;
pub mod fraccalc;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod quad;
pub mod problem;
pub mod special;
pub mod study;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use expr::FunctionExpr;
pub use fraccalc::FracOrder;
pub use mesh::{Degree, FeSpace, Mesh};
pub use problem::{Example, ProblemSpec};
pub use quad::QuadRule;
pub use assemble::{AssembledSystem, Assembler};
pub use driver::{solve_fslp, solve_source, EigenPair, SolutionField};
pub use oracle::ConvergenceReport;
pub use study::{EigenReport, EigenStudy, MeshFamily, ReferenceKind, SourceStudy};
