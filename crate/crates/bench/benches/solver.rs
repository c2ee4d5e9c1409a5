use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rlfem::assemble::Assembler;
use rlfem::driver::{condition_numbers, solve_fslp, solve_source};
use rlfem::fraccalc::FeDerivative;
use rlfem::quad::gauss_jacobi;
use rlfem::{Degree, FeSpace};
use rlfem_bench::{eigen_problem, source_problem};

fn assembly(c: &mut Criterion) {
    let problem = source_problem(1.75);
    let assembler = Assembler::default();
    let mut g = c.benchmark_group("assemble");
    for (degree, n) in [(Degree::P1, 256), (Degree::P2, 128), (Degree::P2, 512)] {
        let space = FeSpace::uniform(n, degree).unwrap();
        g.bench_with_input(BenchmarkId::new(degree.to_string(), n), &space, |b, s| {
            b.iter(|| assembler.system(black_box(s), &problem).unwrap())
        });
    }
    g.finish();
}

fn source_solve(c: &mut Criterion) {
    let problem = source_problem(1.75);
    let mut g = c.benchmark_group("solve_source");
    g.sample_size(20);
    for (degree, n) in [(Degree::P1, 256), (Degree::P2, 256), (Degree::P2, 1024)] {
        let space = FeSpace::uniform(n, degree).unwrap();
        g.bench_with_input(BenchmarkId::new(degree.to_string(), n), &space, |b, s| b.iter(|| solve_source(&problem, s).unwrap()));
    }
    g.finish();
}

fn reconstruction(c: &mut Criterion) {
    let problem = source_problem(1.55);
    let space = FeSpace::uniform(256, Degree::P2).unwrap();
    let sol = solve_source(&problem, &space).unwrap();
    let offsets: Vec<f64> = (0..16).map(|k| (k as f64 + 0.5) / 16.0).collect();
    c.bench_function("reconstruct/P2/256", |b| {
        b.iter(|| {
            let d = FeDerivative::new(&space, sol.w_coeffs(), problem.order()).unwrap();
            black_box(d.sample(&offsets))
        })
    });
}

fn eigen(c: &mut Criterion) {
    let problem = eigen_problem(1.75);
    let mut g = c.benchmark_group("fslp");
    g.sample_size(10);
    for (degree, n) in [(Degree::P1, 80), (Degree::P2, 80)] {
        let space = FeSpace::uniform(n, degree).unwrap();
        g.bench_with_input(BenchmarkId::new(degree.to_string(), n), &space, |b, s| b.iter(|| solve_fslp(&problem, s, 8).unwrap()));
    }
    g.finish();
}

fn conditioning(c: &mut Criterion) {
    let problem = eigen_problem(1.75);
    let space = FeSpace::uniform(64, Degree::P1).unwrap();
    let assembler = Assembler::default();
    let mut g = c.benchmark_group("condition");
    g.sample_size(10);
    g.bench_function("P1/64", |b| b.iter(|| condition_numbers(&problem, &space, &assembler).unwrap()));
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    c.bench_function("gauss_jacobi/24", |b| b.iter(|| gauss_jacobi(24, black_box(0.0), black_box(-0.45)).unwrap()));
}

criterion_group!(benches, assembly, source_solve, reconstruction, eigen, conditioning, quadrature);
criterion_main!(benches);
