use std::fs;
use std::process::{Command, Output};

fn rlfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlfem")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn convergence_row_for_smooth_source() {
    let o = rlfem(&["converge", "--alpha", "1.55", "--mu", "4", "--degree", "1", "--example", "a", "--m", "3..8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "alpha,mu,degree,m=3,m=4,m=5,m=6,m=7,m=8,rate");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..6], &["1.55", "4", "P1", "2.62e-3", "9.28e-4", "3.20e-4"]);
    assert_eq!(row[9], "1.55 (1.05)");
    assert!(lines.next().is_none());
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["converge", "--alpha", "2.5", "--example", "a"],
        &["converge", "--alpha", "1.5", "--example", "a", "--bogus"],
        &["converge", "--alpha", "1.5", "--f", "x^("],
        &["converge", "--alpha", "1.5", "--f", "x^(-2)"],
        &["converge", "--alpha", "1.5"],
        &["converge", "--alpha", "1.5", "--example", "a", "--f", "x"],
        &["converge", "--alpha", "1.5", "--example", "a", "--m", "8..3"],
        &["converge", "--alpha", "1.75", "--mu", "1.2", "--example", "a"],
        &["converge", "--alpha", "1.75", "--q", "(1-x)^0.5", "--example", "a"],
        &["solve", "--alpha", "1.5,1.6", "--example", "a"],
        &["eigen", "--alpha", "1.75", "--count", "3", "--functions", "4"],
        &["cond", "--alpha", "1.75", "--m", "0..2"],
        &["--seed-tables", "--output", "-"],
        &[],
    ];
    for args in cases {
        let o = rlfem(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let o = rlfem(&[flag]);
        assert_eq!(code(&o), 0);
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn infeasible_reference_is_a_numeric_failure() {
    let o = rlfem(&["converge", "--alpha", "1.6", "--mu", "4", "--q", "x", "--example", "b1", "--degree", "1", "--m", "3", "--ref-level", "14"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numeric failure"));
}

#[test]
fn csv_file_has_full_precision_sibling_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let p = path.to_str().unwrap();
    let args = ["converge", "--alpha", "1.75", "--mu", "4", "--q", "x", "--example", "c", "--m", "2..4", "--ref-level", "7", "--output", p];
    assert_eq!(code(&rlfem(&args)), 0);
    let first = fs::read_to_string(&path).unwrap();
    let full = fs::read_to_string(dir.path().join("c.full.csv")).unwrap();
    assert_eq!(first.lines().count(), 3);
    assert_eq!(full.lines().count(), 3);
    let short_row: Vec<&str> = first.lines().nth(1).unwrap().split(',').collect();
    let full_row: Vec<&str> = full.lines().nth(1).unwrap().split(',').collect();
    for k in 3..6 {
        let a: f64 = short_row[k].parse().unwrap();
        let b: f64 = full_row[k].parse().unwrap();
        assert!((a - b).abs() <= 5e-3 * b, "{a} vs {b}");
        assert!(full_row[k].len() > short_row[k].len());
    }
    assert_eq!(code(&rlfem(&args)), 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn markdown_table_is_aligned() {
    let o = rlfem(&["cond", "--alpha", "1.75", "--mu", "alpha-1,3", "--q", "x", "--m", "3..5", "--format", "md"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with('|')).collect();
    assert_eq!(rows.len(), 6);
    let width = rows[0].chars().count();
    assert!(rows.iter().all(|r| r.chars().count() == width));
    let kinds: Vec<&str> = rows[2..].iter().map(|r| r.split('|').nth(3).unwrap().trim()).collect();
    assert_eq!(kinds, ["P", "W", "P", "W"]);
}

#[test]
fn preconditioning_is_exact_for_the_poisson_case() {
    let o = rlfem(&["cond", "--alpha", "1.6", "--mu", "alpha-1", "--m", "3..4"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let p_row = out.lines().find(|l| l.contains(",P,")).unwrap();
    assert!(p_row.ends_with("1.00e0,1.00e0"), "{p_row}");
}

#[test]
fn eigen_run_reports_real_spectrum() {
    let o = rlfem(&["eigen", "--alpha", "1.75", "--mu", "3", "--m", "2..3", "--count", "3", "--functions", "2", "--ref-level", "5", "--format", "md"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("all eigenvalues real: yes"));
    assert_eq!(out.lines().filter(|l| l.contains("| lambda_")).count(), 3);
    assert_eq!(out.lines().filter(|l| l.contains("| u_")).count(), 2);
}

#[test]
fn solve_respects_boundary_conditions() {
    let o = rlfem(&["solve", "--alpha", "1.75", "--mu", "4", "--example", "a", "--degree", "2", "--samples", "5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,w_h,u_h,u,|u - u_h|");
    assert_eq!(lines.len(), 6);
    for row in [lines[1], lines[5]] {
        let u_h: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(u_h.abs() <= 1e-12, "{row}");
    }
    for row in &lines[2..5] {
        let err: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(err < 1e-5, "{row}");
    }
}

#[test]
fn explicit_expression_matches_builtin_example() {
    let a = rlfem(&["converge", "--alpha", "1.7", "--mu", "3", "--q", "x", "--example", "b2", "--m", "2..3", "--ref-level", "6"]);
    let b = rlfem(&["converge", "--alpha", "1.7", "--mu", "3", "--q", "x", "--f", "(1-x)^3/5", "--m", "2..3", "--ref-level", "6"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
}
