//! The full experiment suite behind `--seed-tables`.

use std::path::Path;
use std::time::Instant;

use rlfem::{Assembler, Degree, Example, FunctionExpr, MeshFamily, ReferenceKind};

use crate::args::{Format, Mu};
use crate::commands::{condition_table, convergence_table, eigen_table, log, CliResult, ConvergeSpec, EigenSpec};
use crate::table::{emit_into, Table};

const ALPHAS: [f64; 3] = [1.55, 1.75, 1.95];

fn source(name: &str, example: Example, q: FunctionExpr, alphas: &[f64], mus: &[Mu], family: MeshFamily) -> (String, ConvergeSpec) {
    let spec = ConvergeSpec {
        alphas: alphas.to_vec(),
        mus: mus.to_vec(),
        q,
        f: example.source(),
        source_label: format!("example {example}"),
        degrees: vec![Degree::P1, Degree::P2],
        levels: (3..=8).collect(),
        family,
        reference: ReferenceKind::Auto,
        ref_level: None,
        assembler: Assembler::default(),
    };
    (name.to_string(), spec)
}

fn eigen(q: FunctionExpr) -> EigenSpec {
    EigenSpec {
        alpha: 1.75,
        mu: Mu::Value(3.0),
        q,
        runs: vec![(Degree::P1, (3..=6).collect()), (Degree::P2, (1..=4).collect())],
        family: MeshFamily::TenPow2,
        count: 8,
        functions: 5,
        ref_level: 7,
        assembler: Assembler::default(),
    }
}

/// Runs every study and writes one file per table into `dir`.
pub fn seed_tables(dir: &Path, format: Format) -> CliResult<()> {
    let zero = FunctionExpr::zero;
    let x = || FunctionExpr::polynomial(&[0.0, 1.0]);
    let four = [Mu::Value(4.0)];
    let sources = [
        source("source_a_q0", Example::A, zero(), &ALPHAS, &four, MeshFamily::Pow2),
        source("source_b1_qx", Example::B1, x(), &ALPHAS, &four, MeshFamily::Pow2),
        source("source_b1_qx_small_alpha", Example::B1, x(), &[1.05, 1.25, 1.45], &four, MeshFamily::Pow2),
        source("source_b1_qx_mu", Example::B1, x(), &[1.75], &[Mu::Value(3.0), Mu::AlphaMinusOne, Mu::Value(2.0)], MeshFamily::Pow2),
        source("source_b2_qx", Example::B2, x(), &ALPHAS, &[Mu::Value(3.0)], MeshFamily::Pow2),
        source("source_c_qx_pow2", Example::C, x(), &ALPHAS, &four, MeshFamily::Pow2),
        source("source_c_qx_pow2plus1", Example::C, x(), &ALPHAS, &four, MeshFamily::Pow2Plus1),
    ];
    let start = Instant::now();
    let write = |name: &str, table: &Table| -> CliResult<()> {
        let path = emit_into(table, format, dir, name)?;
        log(format!("wrote {} ({:.1?} elapsed)", path.display(), start.elapsed()));
        Ok(())
    };
    for (name, spec) in &sources {
        write(name, &convergence_table(spec)?)?;
    }
    write("eigen_q0", &eigen_table(&eigen(zero()))?)?;
    write("eigen_qx", &eigen_table(&eigen(x()))?)?;
    let mus = [Mu::AlphaMinusOne, Mu::Value(3.0), Mu::Value(4.0)];
    write("condition", &condition_table(&ALPHAS, &mus, &x(), &[3, 5, 7, 9])?)?;
    Ok(())
}
