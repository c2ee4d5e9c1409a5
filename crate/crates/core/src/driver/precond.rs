//! Condition numbers of the system matrix with and without the Laplacian
//! block as preconditioner.

use crate::assemble::Assembler;
use crate::error::{invalid, Result};
use crate::linalg::{cond2, DenseMatrix};
use crate::mesh::{Degree, FeSpace};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRow {
    pub m: u32,
    pub h: f64,
    /// `kappa_2(A)`.
    pub kappa_a: f64,
    /// `kappa_2(L^{-1} A)`.
    pub kappa_pre: f64,
}

/// `(kappa_2(A), kappa_2(L^{-1} A))` on one space.
pub fn condition_numbers(problem: &ProblemSpec, space: &FeSpace, assembler: &Assembler) -> Result<(f64, f64)> {
    let system = assembler.system(space, problem)?;
    let a = system.matrix();
    let n = a.rows();
    let lu = system.laplacian.factor()?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(lu.solve(&a.column(j))?);
    }
    let pre = DenseMatrix::from_fn(n, n, |i, j| cols[j][i]);
    Ok((cond2(&a)?, cond2(&pre)?))
}

/// P1 study on uniform meshes `h = 2^-m`.
pub fn condition_study(problem: &ProblemSpec, levels: &[u32]) -> Result<Vec<ConditionRow>> {
    if levels.is_empty() {
        return Err(invalid("condition study needs at least one level"));
    }
    let assembler = Assembler::default();
    levels
        .iter()
        .map(|&m| {
            if !(1..=13).contains(&m) {
                return Err(invalid(format!("level m = {m} outside 1..=13")));
            }
            let n = 1usize << m;
            let space = FeSpace::uniform(n, Degree::P1)?;
            let (kappa_a, kappa_pre) = condition_numbers(problem, &space, &assembler)?;
            Ok(ConditionRow { m, h: 1.0 / n as f64, kappa_a, kappa_pre })
        })
        .collect()
}
