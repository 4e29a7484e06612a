//! Success counts on the ten-dimensional Gaussian toy models, run through
//! the experiment driver so the CSV tables and manifest land on disk.
//!
//! `cargo run --release --example toy_success -- [toy|nonneg_toy] [replicates] [out_dir]`

use redac::experiment::{run_experiment, ExperimentKind, ExperimentSpec};
use redac::NormKind;

fn main() -> redac::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        None | Some("toy") => ExperimentKind::Toy,
        Some("nonneg_toy") => ExperimentKind::NonnegToy,
        Some(other) => panic!("unknown toy `{other}`"),
    };
    let replicates: usize = args.next().map_or(200, |s| s.parse().expect("replicates"));
    let out = args.next().unwrap_or_else(|| "toy_out".into());

    let budgets = match kind {
        ExperimentKind::Toy => vec![6.0, 6.0],
        _ => vec![5.0, 5.0],
    };
    let spec = ExperimentSpec::from_json(&format!(
        r#"{{"kind": {kind}, "replicates": {replicates}, "sample_sizes": [500, 1000, 2000, 5000],
            "budgets": {budgets:?}, "norm": "l0", "seed": 1, "output_path": {out:?}}}"#,
        kind = serde_json::to_string(&kind).unwrap(),
    ))?;
    assert_eq!(spec.norm, NormKind::L0);

    let outcome = run_experiment(&spec)?;
    for row in &outcome.summary {
        println!(
            "n = {:>5}: {} / {} successes",
            row.sample_size,
            row.successes.unwrap_or(0),
            row.replicates
        );
    }
    println!("tables in {}", outcome.summary_path.parent().unwrap().display());
    Ok(())
}
