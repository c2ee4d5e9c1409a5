//! Meshes of the unit interval and continuous P1/P2 Lagrange spaces with
//! homogeneous Dirichlet conditions.
//!
//! Degrees of freedom are ordered left to right. For P2 the midpoint and
//! vertex dofs interleave: dof `2e` is the midpoint of element `e` and dof
//! `2e + 1` is the vertex `x_{e+1}`.

use crate::error::{invalid, Error, Result};

/// Strictly increasing partition 0 = x_0 < ... < x_n = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    uniform: bool,
}

impl Mesh {
    /// Builds a mesh from arbitrary increasing nodes.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("a mesh needs at least two nodes"));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(invalid("mesh nodes must start at 0 and end at 1"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("mesh nodes must be strictly increasing"));
        }
        Ok(Self { nodes, uniform: false })
    }

    /// `n` equal elements.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("uniform mesh needs n >= 2 elements, got {n}")));
        }
        let nodes = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self { nodes, uniform: true })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Width of element `e` = [x_e, x_{e+1}].
    pub fn h(&self, e: usize) -> f64 {
        if self.uniform {
            1.0 / self.num_elements() as f64
        } else {
            self.nodes[e + 1] - self.nodes[e]
        }
    }

    pub fn max_h(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.h(e)).fold(0.0, f64::max)
    }

    /// True when built by [`Mesh::uniform`]; enables translation-invariant shortcuts.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Element containing `x` with the left-limit convention: x_e < x <= x_{e+1},
    /// and `x = 0` maps to element 0.
    pub fn element_of(&self, x: f64) -> usize {
        let n = self.num_elements();
        let idx = self.nodes.partition_point(|&v| v < x);
        idx.saturating_sub(1).min(n - 1)
    }
}

/// `make_uniform_mesh` under its operational name.
pub fn make_uniform_mesh(n: usize) -> Result<Mesh> {
    Mesh::uniform(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn from_order(k: u32) -> Result<Self> {
        match k {
            1 => Ok(Degree::P1),
            2 => Ok(Degree::P2),
            _ => Err(invalid(format!("polynomial degree must be 1 or 2, got {k}"))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }

    /// The `k` of the convergence theory (degree k+1).
    pub fn k(self) -> f64 {
        (self.order() - 1) as f64
    }

    pub fn local_count(self) -> usize {
        self.order() as usize + 1
    }
}

impl std::fmt::Display for Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.order())
    }
}

/// One polynomial piece of a basis derivative: phi'(t) = d0 + d1 (t - x_elem)
/// on element `elem`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivPiece {
    pub elem: usize,
    pub d0: f64,
    pub d1: f64,
}

/// Continuous piecewise polynomials vanishing at 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FeSpace {
    mesh: Mesh,
    degree: Degree,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: Degree) -> Self {
        Self { mesh, degree }
    }

    pub fn uniform(n: usize, degree: Degree) -> Result<Self> {
        Ok(Self::new(Mesh::uniform(n)?, degree))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        let n = self.mesh.num_elements();
        match self.degree {
            Degree::P1 => n - 1,
            Degree::P2 => 2 * n - 1,
        }
    }

    /// Coordinate of the node carrying dof `j`.
    pub fn dof_point(&self, j: usize) -> f64 {
        match self.degree {
            Degree::P1 => self.mesh.node(j + 1),
            Degree::P2 => {
                let e = j / 2;
                if j % 2 == 0 {
                    0.5 * (self.mesh.node(e) + self.mesh.node(e + 1))
                } else {
                    self.mesh.node(e + 1)
                }
            }
        }
    }

    pub fn dof_points(&self) -> Vec<f64> {
        (0..self.dof_count()).map(|j| self.dof_point(j)).collect()
    }

    /// Elements (first, last) making up the support of dof `j`.
    pub fn support(&self, j: usize) -> (usize, usize) {
        match self.degree {
            Degree::P1 => (j, j + 1),
            Degree::P2 => {
                let e = j / 2;
                if j % 2 == 0 {
                    (e, e)
                } else {
                    (e, e + 1)
                }
            }
        }
    }

    /// (local index, dof) pairs active on element `e`. Local indices run
    /// left vertex, [midpoint,] right vertex.
    pub fn element_dofs(&self, e: usize) -> Vec<(usize, usize)> {
        let n = self.mesh.num_elements();
        let mut out = Vec::with_capacity(3);
        match self.degree {
            Degree::P1 => {
                if e >= 1 {
                    out.push((0, e - 1));
                }
                if e + 1 < n {
                    out.push((1, e));
                }
            }
            Degree::P2 => {
                if e >= 1 {
                    out.push((0, 2 * e - 1));
                }
                out.push((1, 2 * e));
                if e + 1 < n {
                    out.push((2, 2 * e + 1));
                }
            }
        }
        out
    }

    /// Local index of dof `j` on element `e` (must be in its support).
    fn local_index(&self, j: usize, e: usize) -> usize {
        let (first, _) = self.support(j);
        match self.degree {
            Degree::P1 => {
                if e == first {
                    1
                } else {
                    0
                }
            }
            Degree::P2 => {
                if j % 2 == 0 {
                    1
                } else if e == first {
                    2
                } else {
                    0
                }
            }
        }
    }

    /// Reference shape function `local` at s in [0, 1].
    pub fn shape(&self, local: usize, s: f64) -> f64 {
        match (self.degree, local) {
            (Degree::P1, 0) => 1.0 - s,
            (Degree::P1, _) => s,
            (Degree::P2, 0) => (1.0 - s) * (1.0 - 2.0 * s),
            (Degree::P2, 1) => 4.0 * s * (1.0 - s),
            (Degree::P2, _) => s * (2.0 * s - 1.0),
        }
    }

    /// Derivative coefficients (d0, d1) of shape `local` on an element of width h:
    /// N'(t) = d0 + d1 (t - left).
    pub fn shape_deriv_coeffs(&self, local: usize, h: f64) -> (f64, f64) {
        match (self.degree, local) {
            (Degree::P1, 0) => (-1.0 / h, 0.0),
            (Degree::P1, _) => (1.0 / h, 0.0),
            (Degree::P2, 0) => (-3.0 / h, 4.0 / (h * h)),
            (Degree::P2, 1) => (4.0 / h, -8.0 / (h * h)),
            (Degree::P2, _) => (-1.0 / h, 4.0 / (h * h)),
        }
    }

    /// Pieces of phi_j' element by element, left to right.
    pub fn deriv_pieces(&self, j: usize) -> Vec<DerivPiece> {
        let (first, last) = self.support(j);
        (first..=last)
            .map(|e| {
                let (d0, d1) = self.shape_deriv_coeffs(self.local_index(j, e), self.mesh.h(e));
                DerivPiece { elem: e, d0, d1 }
            })
            .collect()
    }

    fn check_dof(&self, j: usize) -> Result<()> {
        if j >= self.dof_count() {
            return Err(invalid(format!("dof {j} out of range 0..{}", self.dof_count())));
        }
        Ok(())
    }

    fn check_point(x: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid(format!("point {x} outside [0, 1]")));
        }
        Ok(())
    }

    /// Value of an FE function with coefficients `coeffs` at `x`.
    pub fn expand(&self, coeffs: &[f64], x: f64) -> f64 {
        let e = self.mesh.element_of(x);
        let s = (x - self.mesh.node(e)) / self.mesh.h(e);
        self.element_dofs(e)
            .into_iter()
            .map(|(loc, j)| coeffs[j] * self.shape(loc, s))
            .sum()
    }
}

/// Nodal basis function `j` at `x`.
pub fn basis_eval(space: &FeSpace, j: usize, x: f64) -> Result<f64> {
    space.check_dof(j)?;
    FeSpace::check_point(x)?;
    let (first, last) = space.support(j);
    let mesh = space.mesh();
    if x < mesh.node(first) || x > mesh.node(last + 1) {
        return Ok(0.0);
    }
    let e = mesh.element_of(x).clamp(first, last);
    let s = (x - mesh.node(e)) / mesh.h(e);
    Ok(space.shape(space.local_index(j, e), s))
}

/// Derivative of basis function `j` at `x`, taking the left limit at breakpoints.
pub fn basis_deriv(space: &FeSpace, j: usize, x: f64) -> Result<f64> {
    space.check_dof(j)?;
    FeSpace::check_point(x)?;
    let mesh = space.mesh();
    let e = mesh.element_of(x);
    let (first, last) = space.support(j);
    if e < first || e > last {
        return Ok(0.0);
    }
    let piece = space.deriv_pieces(j)[e - first];
    Ok(piece.d0 + piece.d1 * (x - mesh.node(e)))
}

/// Lagrange interpolant: coefficient j is `f` at dof point j.
pub fn interpolate<F: Fn(f64) -> f64>(space: &FeSpace, f: F) -> Result<Vec<f64>> {
    space
        .dof_points()
        .into_iter()
        .map(|x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric(format!("interpolated function is {v} at x = {x}")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_mesh_shapes() {
        let m = make_uniform_mesh(8).unwrap();
        assert_eq!(m.nodes().len(), 9);
        assert_eq!(m.node(0), 0.0);
        assert_eq!(m.node(8), 1.0);
        assert_abs_diff_eq!(m.h(3), 0.125, epsilon = 0.0);
        let m9 = make_uniform_mesh(9).unwrap();
        assert_abs_diff_eq!(m9.h(0), 1.0 / 9.0, epsilon = 1e-16);
        assert!(make_uniform_mesh(1).is_err());
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Mesh::new(vec![0.1, 0.5, 1.0]).is_err());
        assert!(Mesh::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Mesh::new(vec![0.0, 0.5, 0.9]).is_err());
    }

    #[test]
    fn element_lookup_uses_left_limit() {
        let m = make_uniform_mesh(4).unwrap();
        assert_eq!(m.element_of(0.0), 0);
        assert_eq!(m.element_of(0.25), 0);
        assert_eq!(m.element_of(0.26), 1);
        assert_eq!(m.element_of(1.0), 3);
    }

    #[test]
    fn p1_basis_examples() {
        let sp = FeSpace::uniform(4, Degree::P1).unwrap();
        assert_eq!(sp.dof_count(), 3);
        let j = 1; // node 1/2
        assert_eq!(sp.dof_point(j), 0.5);
        assert_abs_diff_eq!(basis_eval(&sp, j, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(basis_eval(&sp, j, 0.375).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(basis_deriv(&sp, j, 0.375).unwrap(), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(basis_deriv(&sp, j, 0.625).unwrap(), -4.0, epsilon = 1e-14);
        // left limit at the peak
        assert_abs_diff_eq!(basis_deriv(&sp, j, 0.5).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(basis_eval(&sp, j, 0.1).unwrap(), 0.0);
        assert!(basis_eval(&sp, 3, 0.5).is_err());
        assert!(basis_eval(&sp, 0, 1.5).is_err());
    }

    #[test]
    fn p2_basis_examples() {
        let sp = FeSpace::uniform(2, Degree::P2).unwrap();
        assert_eq!(sp.dof_count(), 3);
        // midpoint of [0, 1/2]
        assert_eq!(sp.dof_point(0), 0.25);
        assert_abs_diff_eq!(basis_eval(&sp, 0, 0.25).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(basis_deriv(&sp, 0, 0.25).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(sp.dof_point(1), 0.5);
        assert_abs_diff_eq!(basis_eval(&sp, 1, 0.5).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nodal_property_and_boundary_zeros() {
        for deg in [Degree::P1, Degree::P2] {
            let mesh = Mesh::new(vec![0.0, 0.1, 0.35, 0.4, 0.8, 1.0]).unwrap();
            let sp = FeSpace::new(mesh, deg);
            let pts = sp.dof_points();
            for j in 0..sp.dof_count() {
                assert_eq!(basis_eval(&sp, j, 0.0).unwrap(), 0.0);
                assert_abs_diff_eq!(basis_eval(&sp, j, 1.0).unwrap(), 0.0, epsilon = 1e-15);
                for (i, &x) in pts.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(basis_eval(&sp, j, x).unwrap(), want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn derivative_pieces_match_finite_differences() {
        let mesh = Mesh::new(vec![0.0, 0.2, 0.45, 0.7, 1.0]).unwrap();
        for deg in [Degree::P1, Degree::P2] {
            let sp = FeSpace::new(mesh.clone(), deg);
            for j in 0..sp.dof_count() {
                for &x in &[0.1, 0.3, 0.5, 0.6, 0.85] {
                    let eps = 1e-6;
                    let fd = (basis_eval(&sp, j, x + eps).unwrap() - basis_eval(&sp, j, x - eps).unwrap()) / (2.0 * eps);
                    assert_abs_diff_eq!(basis_deriv(&sp, j, x).unwrap(), fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn interpolation_examples() {
        let sp = FeSpace::uniform(4, Degree::P1).unwrap();
        assert_eq!(interpolate(&sp, |_| 0.0).unwrap(), vec![0.0; 3]);
        let c = interpolate(&sp, |x| x * (1.0 - x)).unwrap();
        assert_eq!(c, vec![3.0 / 16.0, 0.25, 3.0 / 16.0]);
        let sp2 = FeSpace::uniform(2, Degree::P1).unwrap();
        let c = interpolate(&sp2, |x| x.powf(0.5)).unwrap();
        assert_abs_diff_eq!(c[0], 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(interpolate(&sp, |x| 1.0 / (x - 0.5)).is_err());
    }

    #[test]
    fn constant_one_reproduced_at_interior_nodes() {
        let sp = FeSpace::uniform(6, Degree::P2).unwrap();
        let c = interpolate(&sp, |_| 1.0).unwrap();
        for &x in sp.dof_points().iter() {
            assert_abs_diff_eq!(sp.expand(&c, x), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn p2_reproduces_quadratics_elementwise() {
        let mesh = Mesh::new(vec![0.0, 0.13, 0.3, 0.55, 0.61, 1.0]).unwrap();
        let sp = FeSpace::new(mesh.clone(), Degree::P2);
        // x^2 - x vanishes at both ends, so it lies in the space
        let f = |x: f64| x * x - x;
        let c = interpolate(&sp, f).unwrap();
        let mut seed = 12345u64;
        for e in 0..mesh.num_elements() {
            for _ in 0..5 {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let s = (seed >> 11) as f64 / (1u64 << 53) as f64;
                let x = mesh.node(e) + s * mesh.h(e);
                assert_abs_diff_eq!(sp.expand(&c, x), f(x), epsilon = 1e-13);
            }
        }
    }
}
