//! Slow reference solvers for checking the closed-form code paths.
//!
//! Nothing here calls into [`crate::subproblem`]; each oracle is written
//! from the problem definition alone (subset enumeration, bisection on the
//! l1/l2 ratio, naive loops).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{NormKind, SparsityBudget};

pub const L0_BRUTE_MAX_DIM: usize = 20;
pub const NONNEG_BRUTE_MAX_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Optimal `w^T v`.
    pub value: f64,
    /// Maximizer; `None` when `w = 0` and every unit vector is optimal.
    pub v: Option<Vec<f64>>,
}

fn best_subset(w: &[f64], k: usize, allowed: impl Fn(usize) -> bool) -> OracleResult {
    let d = w.len();
    let mut best_mask = 0u32;
    let mut best = 0.0f64;
    for mask in 1u32..(1u32 << d) {
        if mask.count_ones() as usize > k {
            continue;
        }
        if (0..d).any(|i| mask & (1 << i) != 0 && !allowed(i)) {
            continue;
        }
        let mut energy = 0.0;
        for (i, x) in w.iter().enumerate() {
            if mask & (1 << i) != 0 {
                energy += x * x;
            }
        }
        if energy > best {
            best = energy;
            best_mask = mask;
        }
    }
    if best == 0.0 {
        return OracleResult { value: 0.0, v: None };
    }
    let norm = best.sqrt();
    let v = (0..d)
        .map(|i| if best_mask & (1 << i) != 0 { w[i] / norm } else { 0.0 })
        .collect();
    OracleResult { value: norm, v: Some(v) }
}

/// Enumerate every support of size at most `t`; on a fixed support the best
/// unit vector is `w_S / ||w_S||` with value `||w_S||`.
pub fn l0_brute(w: &[f64], t: usize) -> Result<OracleResult> {
    if w.len() > L0_BRUTE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            d: w.len(),
            limit: L0_BRUTE_MAX_DIM,
        });
    }
    Ok(best_subset(w, t, |_| true))
}

fn ratio_after_shrink(w: &[f64], lambda: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for x in w {
        let m = x.abs() - lambda;
        if *x != 0.0 && m > 0.0 {
            sum += m;
            sq += m * m;
        }
    }
    (sq > 0.0).then(|| sum / sq.sqrt())
}

fn shrink_normalize(w: &[f64], lambda: f64) -> Vec<f64> {
    let s: Vec<f64> = w
        .iter()
        .map(|x| {
            let m = x.abs() - lambda;
            if *x != 0.0 && m > 0.0 {
                m.copysign(*x)
            } else {
                0.0
            }
        })
        .collect();
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    s.into_iter().map(|x| x / norm).collect()
}

/// Bisection for the l1-constrained problem: find `lambda` in
/// `[0, second-largest |w_i|]` where the normalized soft threshold has l1
/// norm `t`. When `w / ||w||` already satisfies the constraint it is
/// returned directly.
pub fn l1_bisect(w: &[f64], t: f64) -> Result<OracleResult> {
    if !(t >= 1.0) {
        return Err(Error::InfeasibleBudget(format!("t = {t} violates t >= 1")));
    }
    let Some(free_ratio) = ratio_after_shrink(w, 0.0) else {
        return Ok(OracleResult { value: 0.0, v: None });
    };
    let value_of = |v: &[f64]| w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    if t >= free_ratio {
        let v = shrink_normalize(w, 0.0);
        return Ok(OracleResult { value: value_of(&v), v: Some(v) });
    }

    let mut mags: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut lo = 0.0;
    let mut hi = mags[1];
    let ratio = |l| ratio_after_shrink(w, l).unwrap_or(1.0);
    if !(ratio(lo) > t && ratio(hi) <= t) {
        return Err(Error::BracketFailure(format!(
            "h({lo}) = {}, h({hi}) = {}, t = {t}",
            ratio(lo),
            ratio(hi)
        )));
    }
    for _ in 0..500 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = shrink_normalize(w, 0.5 * (lo + hi));
    Ok(OracleResult { value: value_of(&v), v: Some(v) })
}

/// Nonnegative variant: subsets of the positive positions for l0,
/// bisection on the positive part for l1.
pub fn nonneg_brute(w: &[f64], budget: &SparsityBudget) -> Result<OracleResult> {
    if w.len() > NONNEG_BRUTE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            d: w.len(),
            limit: NONNEG_BRUTE_MAX_DIM,
        });
    }
    if !w.iter().any(|x| *x > 0.0) {
        return Err(Error::NoPositiveEntry);
    }
    match budget.norm {
        NormKind::L0 => {
            let k = budget.t.floor().max(0.0) as usize;
            Ok(best_subset(w, k, |i| w[i] > 0.0))
        }
        NormKind::L1 => {
            let pos: Vec<f64> = w.iter().map(|x| if *x > 0.0 { *x } else { 0.0 }).collect();
            let r = l1_bisect(&pos, budget.t)?;
            let value = r
                .v
                .as_ref()
                .map(|v| w.iter().zip(v).map(|(a, b)| a * b).sum())
                .unwrap_or(0.0);
            Ok(OracleResult { value, v: r.v })
        }
    }
}

/// `||X - U V^T||_F^2` by explicit loops.
pub fn objective_direct(x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let (n, d) = x.shape();
    let r = u.ncols();
    if u.nrows() != n || v.nrows() != d || v.ncols() != r {
        return Err(Error::DimensionMismatch(format!(
            "X {:?}, U {:?}, V {:?}",
            x.shape(),
            u.shape(),
            v.shape()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..d {
            let mut fitted = 0.0;
            for k in 0..r {
                fitted += u[(i, k)] * v[(j, k)];
            }
            let e = x[(i, j)] - fitted;
            total += e * e;
        }
    }
    Ok(total)
}
