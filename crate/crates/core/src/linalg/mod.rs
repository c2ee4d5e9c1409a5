//! Dense linear algebra used by the solvers: LU, a structured solver for
//! nearly lower-triangular systems, nonsymmetric eigenvalues, subspace
//! iteration and Jacobi SVD.

mod dense;
mod eig;
mod lu;
mod structured;
mod subspace;
mod svd;

pub use dense::{axpy, dot, dot_compensated, norm2, norm_inf, CompensatedSum, DenseMatrix};
pub use eig::{eig_dense, hessenberg_eigenvalues, sort_spectrum};
pub use lu::{lu_factor, lu_solve, LuFactors};
pub use structured::{BandedLu, RankOneSolver};
pub use subspace::{shift_invert_eigs, shift_invert_eigs_with, EigenSolution, ShiftInvertOptions};
pub use svd::{cond2, singular_values};

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field operations shared by the real and complex solvers.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Magnitude used for pivoting.
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}
