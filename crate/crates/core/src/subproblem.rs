//! Closed-form solvers for the rank-one subproblems.
//!
//! With all other components fixed, the score update is a least-squares
//! projection and the loading update is a linear maximization over the unit
//! sphere intersected with an l0 or l1 ball (optionally restricted to the
//! nonnegative orthant). Each has an exact solution by thresholding.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::types::{NormKind, SparsityBudget};

/// Tie-breaking perturbation applied to magnitudes before the l1 bracket
/// search.
pub const TIE_EPSILON: f64 = 1e-12;

/// Result of one loading update.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSolution {
    /// Unit l2-norm loading vector.
    pub v: Vec<f64>,
    /// Soft threshold applied (l1) or the k-th largest magnitude (l0).
    pub lambda: f64,
    /// Indices of the nonzero entries of `v`, ascending.
    pub support: Vec<usize>,
}

impl ThresholdSolution {
    fn from_unnormalized(mut v: Vec<f64>, lambda: f64) -> Result<Self> {
        let norm = l2(&v);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let support = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { v, lambda, support })
    }

    /// `w^T v`.
    pub fn objective(&self, w: &[f64]) -> f64 {
        dot(w, &self.v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_w(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("w[{i}] is not finite")));
    }
    if w.iter().all(|x| *x == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::InfeasibleBudget(format!("t = {t} violates t >= 1")));
    }
    Ok(())
}

/// Optimal scores for fixed loadings: `u = E v`.
pub fn update_score(e: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if e.ncols() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "E is {}x{}, v has length {}",
            e.nrows(),
            e.ncols(),
            v.len()
        )));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("v must be unit norm, got {norm}")));
    }
    Ok(e * v)
}

/// `sign(w) * max(|w| - lambda, 0)`, entrywise.
pub fn soft_threshold(w: &[f64], lambda: f64) -> Vec<f64> {
    w.iter()
        .map(|x| {
            if *x == 0.0 {
                0.0
            } else {
                x.signum() * (x.abs() - lambda).max(0.0)
            }
        })
        .collect()
}

/// Keep entries with `|w_i| >= lambda`, zero the rest.
pub fn hard_threshold(w: &[f64], lambda: f64) -> Vec<f64> {
    w.iter()
        .map(|x| if x.abs() >= lambda { *x } else { 0.0 })
        .collect()
}

/// `||soft_lambda(w)||_1 / ||soft_lambda(w)||_2`, the l1 norm of the
/// normalized soft-thresholded vector. Non-increasing in `lambda`.
pub fn h_norm(w: &[f64], lambda: f64) -> Result<f64> {
    let s = soft_threshold(w, lambda);
    let l2 = l2(&s);
    if l2 == 0.0 {
        let max_abs = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        return Err(Error::VanishedThreshold { lambda, max_abs });
    }
    Ok(s.iter().map(|x| x.abs()).sum::<f64>() / l2)
}

/// Maximize `w^T v` subject to `||v||_2 = 1`, `||v||_0 <= t`.
///
/// Keeps the `floor(t)` largest magnitudes. When the cutoff magnitude is
/// tied, lower indices win, so exactly `floor(t)` entries are retained.
pub fn solve_l0(w: &[f64], t: f64) -> Result<ThresholdSolution> {
    check_t(t)?;
    check_w(w)?;
    let d = w.len();
    let k = (t.floor() as usize).min(d);
    if k == d {
        return ThresholdSolution::from_unnormalized(w.to_vec(), 0.0);
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| w[j].abs().total_cmp(&w[i].abs()).then(i.cmp(&j)));
    let mut v = vec![0.0; d];
    for &i in &order[..k] {
        v[i] = w[i];
    }
    ThresholdSolution::from_unnormalized(v, w[order[k - 1]].abs())
}

/// Maximize `w^T v` subject to `||v||_2 = 1`, `||v||_1 <= t`.
///
/// The optimum is a normalized soft threshold of `w`. The threshold is
/// located on the breakpoint interval where the l1 constraint binds and then
/// computed as the smaller root of a quadratic on that interval.
pub fn solve_l1(w: &[f64], t: f64) -> Result<ThresholdSolution> {
    check_t(t)?;
    check_w(w)?;
    let d = w.len();

    // Free case: ||w||_1 / ||w||_2 <= t, so w/||w|| is feasible.
    let h0 = w.iter().map(|x| x.abs()).sum::<f64>() / l2(w);
    if t >= (d as f64).sqrt() || t >= h0 {
        return ThresholdSolution::from_unnormalized(w.to_vec(), 0.0);
    }

    let mags: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, x)| x.abs() * (1.0 + i as f64 * TIE_EPSILON))
        .collect();
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);

    // h evaluated with lambda set to a breakpoint, using only the entries
    // strictly above it.
    let h_at = |lambda: f64| -> f64 {
        let (mut s1, mut s2) = (0.0, 0.0);
        for &a in sorted.iter().rev() {
            if a <= lambda {
                break;
            }
            s1 += a - lambda;
            s2 += (a - lambda) * (a - lambda);
        }
        if s2 == 0.0 {
            1.0
        } else {
            s1 / s2.sqrt()
        }
    };

    // Smallest breakpoint index j in [0, d-2] with h(sorted[j]) <= t. The
    // second-largest breakpoint always qualifies (h = 1 there).
    let (mut lo, mut hi) = (0usize, d - 2);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if h_at(sorted[mid]) <= t {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let j = lo;
    let upper = sorted[j];
    let lower = if j == 0 { 0.0 } else { sorted[j - 1] };

    // Work in coordinates shifted by the bracket's upper breakpoint:
    // a_i - lambda = c_i + mu with c_i = a_i - upper and mu = upper - lambda.
    // Near-tied magnitudes then keep full relative precision.
    let shifted: Vec<f64> = sorted[j..].iter().map(|a| a - upper).collect();
    let m = shifted.len() as f64;
    let s1: f64 = shifted.iter().sum();
    let s2: f64 = shifted.iter().map(|c| c * c).sum();
    let width = upper - lower;
    let h_mu = |mu: f64| -> f64 {
        let (mut l1, mut sq) = (0.0, 0.0);
        for c in &shifted {
            l1 += c + mu;
            sq += (c + mu) * (c + mu);
        }
        if sq == 0.0 {
            1.0
        } else {
            l1 / sq.sqrt()
        }
    };
    let bisect = || {
        let (mut lo, mut hi) = (0.0, width);
        while hi - lo > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if h_mu(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    // (s1 + m mu)^2 = t^2 (s2 + 2 mu s1 + m mu^2), i.e. the quadratic in
    // lambda' = -mu with the shifted magnitudes. The smaller lambda' root
    // is the admissible one.
    let t2 = t * t;
    let q = m - t2;
    let mu = if q.abs() < 1e-12 * m {
        bisect()
    } else {
        let spread = m * s2 - s1 * s1;
        let mut disc = t2 * q * spread;
        let scale = t2 * q.abs() * m * s2;
        if disc < 0.0 && disc > -1e-12 * scale.max(f64::MIN_POSITIVE) {
            disc = 0.0;
        }
        if disc < 0.0 {
            bisect()
        } else {
            let root = ((disc.sqrt() - q * s1) / (m * q)).clamp(0.0, width);
            if (h_mu(root) - t).abs() <= 1e-12 * t {
                root
            } else {
                bisect()
            }
        }
    };

    let v = w
        .iter()
        .zip(&mags)
        .map(|(x, a)| {
            let excess = (a - upper) + mu;
            if excess > 0.0 {
                x.signum() * excess
            } else {
                0.0
            }
        })
        .collect();
    ThresholdSolution::from_unnormalized(v, upper - mu)
}

/// Nonnegative loading update: solve the unrestricted problem on the
/// positive part of `w`.
pub fn solve_nonneg(w: &[f64], b: &SparsityBudget) -> Result<ThresholdSolution> {
    check_t(b.t)?;
    if w.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    let pos: Vec<f64> = w.iter().map(|x| x.max(0.0)).collect();
    if pos.iter().all(|x| *x == 0.0) {
        return Err(Error::NoPositiveEntry);
    }
    match b.norm {
        NormKind::L0 => solve_l0(&pos, b.t),
        NormKind::L1 => solve_l1(&pos, b.t),
    }
}

/// Dispatch on the budget's norm and nonnegativity flag.
pub fn solve(w: &[f64], b: &SparsityBudget) -> Result<ThresholdSolution> {
    if b.nonnegative {
        return solve_nonneg(w, b);
    }
    match b.norm {
        NormKind::L0 => solve_l0(w, b.t),
        NormKind::L1 => solve_l1(w, b.t),
    }
}
