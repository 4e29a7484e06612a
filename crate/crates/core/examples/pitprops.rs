//! Six sparse components of a 13x13 correlation matrix (the pitprops data),
//! fitted on a synthetic 180-row design that reproduces it exactly.
//!
//! The matrix is not shipped with the crate; pass a CSV path:
//! `cargo run --release --example pitprops -- pitprops.csv [l0|l1] [budgets]`

use redac::datagen::design_from_covariance;
use redac::metrics::evaluate;
use redac::{io, solver, NormKind, SolverConfig, SparsityBudget};

fn main() -> redac::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: pitprops <correlation.csv> [l0|l1] [b1,b2,...]");
        std::process::exit(1);
    };
    let norm: NormKind = args.next().map_or(Ok(NormKind::L0), |s| s.parse())?;
    let ts: Vec<f64> = args
        .next()
        .unwrap_or_else(|| "8,5,6,2,3,2".into())
        .split(',')
        .map(|s| s.trim().parse().expect("budget"))
        .collect();

    let sigma = io::read_matrix(&path)?.values;
    let x = design_from_covariance(&sigma, 180)?;
    let budgets: Vec<SparsityBudget> = ts.iter().map(|&t| SparsityBudget { norm, t, nonnegative: false }).collect();
    let cfg = SolverConfig {
        max_sweeps: 1000,
        ..SolverConfig::default()
    };
    let (f, report) = solver::fit(&x, &budgets, &cfg)?;
    let eval = evaluate(&x, &f.v)?;
    println!("cardinalities {:?}", eval.per_component_cardinality);
    println!("rre {:.4}  pev {:.2}%  ({} sweeps)", eval.rre, eval.pev, report.sweeps_run);
    for (i, s) in f.supports().iter().enumerate() {
        let one_based: Vec<usize> = s.iter().map(|j| j + 1).collect();
        println!("  pc{}: {:?}", i + 1, one_based);
    }
    Ok(())
}
