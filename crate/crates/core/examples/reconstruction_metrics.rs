//! Fit a CSV matrix (or generated Hastie data), report RRE and PEV for a
//! range of sparsity levels next to plain PCA, and round-trip the loadings
//! through CSV.
//!
//! `cargo run --release --example reconstruction_metrics -- [data.csv]`

use redac::datagen::gen_hastie;
use redac::metrics::evaluate;
use redac::{center_columns, io, solver, SolverConfig, SparsityBudget};

fn main() -> redac::Result<()> {
    let x = match std::env::args().nth(1) {
        Some(path) => center_columns(&io::read_matrix(path)?.values)?,
        None => gen_hastie(500, 2)?.x,
    };
    let d = x.d() as f64;
    let r = 2.min(x.d());
    println!("{} x {} data, {r} components", x.n(), x.d());

    let pca = solver::initialize(&x, r, &SolverConfig::default())?;
    let e = evaluate(&x, &pca.v)?;
    println!("pca          rre {:.4}  pev {:6.2}%", e.rre, e.pev);

    for t in [1.0, 2.0, 3.0, 4.0, d] {
        let budgets = vec![SparsityBudget::l0(t); r];
        let (f, _) = solver::fit(&x, &budgets, &SolverConfig::default())?;
        let e = evaluate(&x, &f.v)?;
        println!(
            "l0 t = {t:<4}  rre {:.4}  pev {:6.2}%  cardinalities {:?}",
            e.rre, e.pev, e.per_component_cardinality
        );
    }

    let (f, _) = solver::fit(&x, &vec![SparsityBudget::l1(1.5); r], &SolverConfig::default())?;
    let before = evaluate(&x, &f.v)?;
    let path = std::env::temp_dir().join("redac_example_loadings.csv");
    io::write_matrix(&path, &f.v, None)?;
    let after = evaluate(&x, &io::read_matrix(&path)?.values)?;
    println!(
        "l1 t = 1.5   rre {:.4}  re-read from {} gives identical metrics: {}",
        before.rre,
        path.display(),
        before == after
    );
    Ok(())
}
