mod common;

use proptest::prelude::*;
use rlfem::assemble::Assembler;
use rlfem::driver::solve_source;
use rlfem::fraccalc::{frac_deriv_basis, rl_integral_monomial};
use rlfem::oracle::exact_solution_q0;
use rlfem::{Degree, Example, FeSpace, FracOrder, FunctionExpr, Mesh, ProblemSpec};

use common::{Basis, Deg};

/// Strictly increasing nodes on [0, 1] with no element shorter than 1/(8n).
fn mesh_nodes(max_elems: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0f64..8.0, 2..=max_elems).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let mut nodes = vec![0.0];
        for x in &w[..w.len() - 1] {
            acc += x;
            nodes.push(acc / total);
        }
        nodes.push(1.0);
        nodes
    })
}

fn degree() -> impl Strategy<Value = (Degree, Deg)> {
    prop_oneof![Just((Degree::P1, Deg::P1)), Just((Degree::P2, Deg::P2))]
}

fn example() -> impl Strategy<Value = Example> {
    prop::sample::select(Example::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_derivative_matches_quadrature(
        nodes in mesh_nodes(7),
        (deg, odeg) in degree(),
        alpha in 1.05f64..1.95,
        pick in 0usize..1000,
        x in 0.0f64..=1.0,
    ) {
        let space = FeSpace::new(Mesh::new(nodes.clone()).unwrap(), deg);
        let j = pick % space.dof_count();
        let order = FracOrder::new(alpha).unwrap();
        let ours = frac_deriv_basis(&space, j, &order, x).unwrap();
        let oracle = Basis::new(nodes, odeg).frac_deriv(j, alpha - 1.0, x);
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }

    #[test]
    fn riemann_liouville_integral_of_power(a in 0.05f64..2.0, b in -0.9f64..3.0, x in 0.01f64..=1.0) {
        let ours = rl_integral_monomial(b, a, x).unwrap();
        let oracle = common::rl_integral_power_numeric(a, b, x);
        prop_assert!((ours - oracle).abs() <= 1e-10 * oracle.abs(), "{ours} vs {oracle}");
    }

    #[test]
    fn reconstruction_meets_dirichlet_data(
        alpha in 1.05f64..1.95,
        shift in prop::option::of(0.0f64..3.0),
        q in prop::sample::select(vec![vec![0.0], vec![0.0, 1.0], vec![2.0, -1.0, 0.5]]),
        ex in example(),
        (deg, _) in degree(),
        n in 2usize..48,
    ) {
        let mu = shift.map_or(alpha - 1.0, |s| alpha + s);
        let p = ProblemSpec::new(alpha, mu, FunctionExpr::polynomial(&q), ex.source()).unwrap();
        let sol = solve_source(&p, &FeSpace::uniform(n, deg).unwrap()).unwrap();
        prop_assert_eq!(sol.u(0.0), 0.0);
        prop_assert!(sol.u(1.0).abs() <= 1e-12);
    }

    #[test]
    fn load_vector_is_linear_in_the_source(
        nodes in mesh_nodes(6),
        (deg, _) in degree(),
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
    ) {
        let space = FeSpace::new(Mesh::new(nodes).unwrap(), deg);
        let asm = Assembler::default();
        let (f1, f2) = (Example::A.source(), Example::B1.source());
        let text = format!("({c1})*(x - x^2) + ({c2})");
        let combined = FunctionExpr::parse(&text).unwrap();
        let (l1, l2) = (asm.load(&space, &f1).unwrap(), asm.load(&space, &f2).unwrap());
        let l = asm.load(&space, &combined).unwrap();
        for k in 0..l.len() {
            let want = c1 * l1[k] + c2 * l2[k];
            prop_assert!((l[k] - want).abs() <= 1e-12 * (1.0 + want.abs()), "{} vs {want}", l[k]);
        }
    }

    #[test]
    fn poisson_corner_reduces_to_the_laplacian(alpha in 1.02f64..1.98, n in 2usize..40, (deg, _) in degree()) {
        let p = ProblemSpec::new(alpha, alpha - 1.0, FunctionExpr::zero(), Example::B2.source()).unwrap();
        let space = FeSpace::uniform(n, deg).unwrap();
        let sys = Assembler::default().system(&space, &p).unwrap();
        let a = sys.matrix();
        let l = sys.laplacian.to_dense();
        prop_assert!(a.max_abs_diff(&l) <= 1e-12 * l.norm_inf());
    }

    #[test]
    fn closed_form_solution_vanishes_at_both_ends(alpha in 1.05f64..1.95, ex in example()) {
        let exact = exact_solution_q0(&ex.source(), alpha).unwrap();
        prop_assert_eq!(exact.eval(0.0), 0.0);
        prop_assert!(exact.eval(1.0).abs() <= 1e-12);
    }
}

#[test]
fn fine_discretization_approaches_closed_form() {
    for alpha in [1.3, 1.7] {
        let p = ProblemSpec::new(alpha, 4.0, FunctionExpr::zero(), Example::A.source()).unwrap();
        let exact = exact_solution_q0(p.f(), alpha).unwrap();
        let sol = solve_source(&p, &FeSpace::uniform(128, Degree::P2).unwrap()).unwrap();
        for k in 1..20 {
            let x = k as f64 / 20.0;
            // pointwise error scales like h^(alpha+1) ~ 1e-6 here
            assert!((sol.u(x) - exact.eval(x)).abs() < 1e-5, "alpha={alpha} x={x}");
        }
    }
}
