//! The per-column updates on a small vector: hard threshold, normalized soft
//! threshold, and the nonnegative variants.

use redac::subproblem::{h_norm, solve, solve_l0, solve_l1};
use redac::SparsityBudget;

fn main() -> redac::Result<()> {
    let w = [3.0, 1.0, 2.0];

    let l0 = solve_l0(&w, 2.0)?;
    println!("l0, t = 2:   v = {:.6?}, support {:?}", l0.v, l0.support);

    for t in [1.0, 1.2, 1.5, 3f64.sqrt()] {
        let s = solve_l1(&w, t)?;
        let l1: f64 = s.v.iter().map(|x| x.abs()).sum();
        println!(
            "l1, t = {t:.4}: v = {:.6?}, lambda = {:.10}, ||v||_1 = {l1:.10}, w.v = {:.6}",
            s.v,
            s.lambda,
            s.objective(&w)
        );
    }

    println!("h(lambda) on w, decreasing in lambda:");
    for lambda in [0.0, 0.5, 1.0, 1.5, 1.9] {
        println!("  h({lambda}) = {:.6}", h_norm(&w, lambda)?);
    }

    let mixed = [-1.0, 2.0, 0.5, -3.0];
    for b in [SparsityBudget::l0(1.0).nonnegative(), SparsityBudget::l1(1.2).nonnegative()] {
        let s = solve(&mixed, &b)?;
        println!("nonnegative {:?} t = {}: v = {:.6?}", b.norm, b.t, s.v);
    }
    match solve(&[-1.0, -2.0], &SparsityBudget::l0(1.0).nonnegative()) {
        Err(e) => println!("all-negative input: {e}"),
        Ok(s) => println!("unexpected solution {:?}", s.v),
    }
    Ok(())
}
