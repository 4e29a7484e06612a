//! Seeded comparison of the closed-form solvers with the brute-force
//! oracles, as run by `redac verify`.
//!
//! `cargo run --release --example oracle_check -- [cases] [dim_max] [seed]`

use redac::verify::{run_all, VerifyConfig};

fn main() -> redac::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().expect("integer argument"));
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        cases: args.next().map_or(defaults.cases, |v| v as usize),
        dim_max: args.next().map_or(defaults.dim_max, |v| v as usize),
        seed: args.next().unwrap_or(defaults.seed),
    };
    for suite in run_all(&cfg)? {
        println!(
            "{:>6}: {} cases, {} failures, max objective gap {:.2e}",
            suite.name, suite.cases, suite.failures, suite.max_gap
        );
        if let Some(f) = suite.first_failure {
            println!("        {f}");
        }
    }
    Ok(())
}
