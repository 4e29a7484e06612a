//! Seeded equivalence checks between the closed-form subproblem solvers and
//! the brute-force oracles.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::datagen::stream_rng;
use crate::error::{Error, Result};
use crate::oracle::{self, L0_BRUTE_MAX_DIM, NONNEG_BRUTE_MAX_DIM};
use crate::subproblem;
use crate::types::SparsityBudget;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub cases: usize,
    pub dim_max: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            cases: 1000,
            dim_max: 10,
            seed: 7,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cases == 0 {
            return Err(Error::InvalidConfig("cases must be at least 1".into()));
        }
        if self.dim_max < 2 || self.dim_max > L0_BRUTE_MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "dim-max must lie in [2, {L0_BRUTE_MAX_DIM}], got {}",
                self.dim_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest objective gap against the oracle.
    pub max_gap: f64,
    /// Cases where the l1 budget was active.
    pub binding: usize,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            max_gap: 0.0,
            binding: 0,
            first_failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, gap: f64, problems: Vec<String>, w: &[f64], t: f64) {
        self.cases += 1;
        self.max_gap = self.max_gap.max(gap);
        if !problems.is_empty() {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("w = {w:?}, t = {t}: {}", problems.join("; ")));
            }
        }
    }
}

fn normals(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

fn has_distinct_magnitudes(w: &[f64]) -> bool {
    let mut a: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    a.windows(2).all(|p| p[1] - p[0] > 1e-9) && a[0] > 0.0
}

fn unit_norm_problem(v: &[f64], tol: f64) -> Option<String> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    ((n - 1.0).abs() > tol).then(|| format!("||v||_2 = {n}"))
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Hard-threshold solver against subset enumeration: objective within 1e-10.
pub fn verify_l0(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, 0);
    let mut out = SuiteOutcome::new("l0");
    for _ in 0..cfg.cases {
        let d = rng.random_range(2..=cfg.dim_max);
        let w = normals(&mut rng, d);
        let t = rng.random_range(1.0..=d as f64);
        let sol = subproblem::solve_l0(&w, t)?;
        let reference = oracle::l0_brute(&w, t.floor() as usize)?;
        let gap = (sol.objective(&w) - reference.value).abs();
        let mut problems = Vec::new();
        if gap > 1e-10 {
            problems.push(format!("objective gap {gap:e}"));
        }
        problems.extend(unit_norm_problem(&sol.v, 1e-10));
        let nnz = sol.v.iter().filter(|x| **x != 0.0).count();
        if nnz as f64 > t.floor() {
            problems.push(format!("{nnz} nonzeros with t = {t}"));
        }
        out.record(gap, problems, &w, t);
    }
    Ok(out)
}

/// Soft-threshold solver against bisection: objective within 1e-6, unit l2
/// norm within 1e-10, and `||v||_1 = t` within 1e-8 whenever the budget
/// binds. When `t >= ||w||_1 / ||w||_2` the unconstrained direction is
/// feasible and optimal, so only `||v||_1 <= t` is required there.
pub fn verify_l1(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, 1);
    let mut out = SuiteOutcome::new("l1");
    for _ in 0..cfg.cases {
        let d = rng.random_range(2..=cfg.dim_max);
        let w = loop {
            let w = normals(&mut rng, d);
            if has_distinct_magnitudes(&w) {
                break w;
            }
        };
        let t = loop {
            let t: f64 = rng.random_range(1.0..(d as f64).sqrt());
            if t > 1.0 {
                break t;
            }
        };
        let sol = subproblem::solve_l1(&w, t)?;
        let reference = oracle::l1_bisect(&w, t)?;
        let gap = (sol.objective(&w) - reference.value).abs();
        let mut problems = Vec::new();
        if gap > 1e-6 {
            problems.push(format!("objective gap {gap:e}"));
        }
        problems.extend(unit_norm_problem(&sol.v, 1e-10));
        let free_ratio = l1(&w) / w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n1 = l1(&sol.v);
        if t < free_ratio {
            out.binding += 1;
            if (n1 - t).abs() > 1e-8 {
                problems.push(format!("||v||_1 = {n1}, expected {t}"));
            }
        } else if n1 > t + 1e-8 {
            problems.push(format!("||v||_1 = {n1} exceeds {t}"));
        }
        if w.iter().zip(&sol.v).any(|(a, b)| *b != 0.0 && a.signum() != b.signum()) {
            problems.push("sign mismatch".into());
        }
        out.record(gap, problems, &w, t);
    }
    Ok(out)
}

/// Nonnegative solver against enumeration on the positive orthant, both
/// norms; every output entry must be nonnegative.
pub fn verify_nonneg(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let dim_max = cfg.dim_max.min(NONNEG_BRUTE_MAX_DIM);
    let mut rng = stream_rng(cfg.seed, 2);
    let mut out = SuiteOutcome::new("nonneg");
    for case in 0..cfg.cases {
        let d = rng.random_range(2..=dim_max);
        let w = loop {
            let w = normals(&mut rng, d);
            if w.iter().any(|x| *x > 0.0) {
                break w;
            }
        };
        let budget = if case % 2 == 0 {
            SparsityBudget::l0(rng.random_range(1.0..=d as f64))
        } else {
            SparsityBudget::l1(rng.random_range(1.0..=(d as f64).sqrt()))
        }
        .nonnegative();
        let sol = subproblem::solve_nonneg(&w, &budget)?;
        let reference = oracle::nonneg_brute(&w, &budget)?;
        let gap = (sol.objective(&w) - reference.value).abs();
        let mut problems = Vec::new();
        if gap > 1e-6 {
            problems.push(format!("objective gap {gap:e}"));
        }
        if let Some(x) = sol.v.iter().find(|x| **x < 0.0) {
            problems.push(format!("negative entry {x}"));
        }
        problems.extend(unit_norm_problem(&sol.v, 1e-10));
        out.record(gap, problems, &w, budget.t);
    }
    Ok(out)
}

pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![verify_l0(cfg)?, verify_l1(cfg)?, verify_nonneg(cfg)?])
}
