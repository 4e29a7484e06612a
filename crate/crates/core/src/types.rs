//! Shared data model: data matrices, sparsity budgets, solver state,
//! configuration, and run reports.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `n x d` matrix of observations, rows are samples.
///
/// Construction only checks shape and finiteness. Centering is a separate,
/// explicit step ([`center_columns`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    /// True when every column mean is within `1e-9 * (column std + 1)` of zero.
    pub fn is_centered(&self) -> bool {
        let n = self.n() as f64;
        self.values.column_iter().all(|c| {
            let mean = c.sum() / n;
            let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            mean.abs() <= 1e-9 * (var.sqrt() + 1.0)
        })
    }

    /// Divide every column by its population standard deviation. Constant
    /// columns are left untouched.
    pub fn standardized(&self) -> DataMatrix {
        let n = self.n() as f64;
        let mut values = self.values.clone();
        for mut c in values.column_iter_mut() {
            let mean = c.sum() / n;
            let sd = (c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                c /= sd;
            }
        }
        DataMatrix { values }
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for col in 0..values.ncols() {
        for row in 0..values.nrows() {
            let value = values[(row, col)];
            if !value.is_finite() {
                return Err(Error::NonFinite { row, col, value });
            }
        }
    }
    Ok(())
}

/// Subtract each column's mean. Row order is preserved.
pub fn center_columns(raw: &DMatrix<f64>) -> Result<DataMatrix> {
    if raw.nrows() == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    check_finite(raw)?;
    let n = raw.nrows() as f64;
    let mut values = raw.clone();
    for mut c in values.column_iter_mut() {
        let mean = c.sum() / n;
        c.add_scalar_mut(-mean);
    }
    DataMatrix::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L0,
    L1,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(NormKind::L0),
            "l1" => Ok(NormKind::L1),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::L0 => "l0",
            NormKind::L1 => "l1",
        })
    }
}

/// Per-component constraint on a loading vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityBudget {
    pub norm: NormKind,
    pub t: f64,
    #[serde(default)]
    pub nonnegative: bool,
}

impl SparsityBudget {
    pub fn l0(t: f64) -> Self {
        Self {
            norm: NormKind::L0,
            t,
            nonnegative: false,
        }
    }

    pub fn l1(t: f64) -> Self {
        Self {
            norm: NormKind::L1,
            t,
            nonnegative: false,
        }
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonnegative = true;
        self
    }

    /// Effective cardinality of an l0 budget in dimension `d`.
    pub fn cardinality(&self, d: usize) -> usize {
        (self.t.floor() as usize).min(d)
    }
}

/// Outcome of a successful budget validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetCheck {
    /// The constraint can bind.
    Constrained,
    /// The budget is at least `d` (l0) or `sqrt(d)` (l1); the subproblem
    /// reduces to the unconstrained unit-sphere case.
    UnconstrainedEquivalent,
}

pub fn validate_budget(b: &SparsityBudget, d: usize) -> Result<BudgetCheck> {
    if !b.t.is_finite() {
        return Err(Error::InfeasibleBudget(format!("t = {} is not finite", b.t)));
    }
    if b.t < 1.0 {
        return Err(Error::InfeasibleBudget(format!(
            "{} budget t = {} violates t >= 1",
            b.norm, b.t
        )));
    }
    let free = match b.norm {
        NormKind::L0 => b.t >= d as f64,
        NormKind::L1 => b.t >= (d as f64).sqrt(),
    };
    Ok(if free {
        BudgetCheck::UnconstrainedEquivalent
    } else {
        BudgetCheck::Constrained
    })
}

/// Scores `u` (n x r) and loadings `v` (d x r).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl FactorPair {
    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "U has {} columns, V has {}",
                u.ncols(),
                v.ncols()
            )));
        }
        Ok(Self { u, v })
    }

    pub fn r(&self) -> usize {
        self.v.ncols()
    }

    /// Number of nonzero entries in each loading vector.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.v
            .column_iter()
            .map(|c| c.iter().filter(|x| **x != 0.0).count())
            .collect()
    }

    /// 0-based indices of the nonzero entries of each loading vector.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.v
            .column_iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    /// Flip each `(u_i, v_i)` pair so the largest-magnitude entry of `v_i`
    /// is positive. The product `U V^T` is unchanged.
    pub fn canonicalize_signs(&mut self) {
        for i in 0..self.r() {
            let col = self.v.column(i);
            let mut best = 0.0f64;
            for x in col.iter() {
                if x.abs() > best.abs() {
                    best = *x;
                }
            }
            if best < 0.0 {
                self.v.column_mut(i).neg_mut();
                self.u.column_mut(i).neg_mut();
            }
        }
    }

    /// Check every loading against the unit-norm and budget invariants.
    /// Returns one message per violation.
    pub fn audit(&self, budgets: &[SparsityBudget]) -> Vec<String> {
        let mut problems = Vec::new();
        if budgets.len() != self.r() {
            problems.push(format!(
                "{} budgets for {} components",
                budgets.len(),
                self.r()
            ));
            return problems;
        }
        for (i, (col, b)) in self.v.column_iter().zip(budgets).enumerate() {
            let l2 = col.norm();
            if (l2 - 1.0).abs() > 1e-10 {
                problems.push(format!("v_{i}: l2 norm {l2}"));
            }
            match b.norm {
                NormKind::L0 => {
                    let nnz = col.iter().filter(|x| **x != 0.0).count();
                    if nnz > b.cardinality(col.len()) {
                        problems.push(format!("v_{i}: {nnz} nonzeros exceeds t = {}", b.t));
                    }
                }
                NormKind::L1 => {
                    let l1 = col.lp_norm(1);
                    if l1 > b.t + 1e-8 {
                        problems.push(format!("v_{i}: l1 norm {l1} exceeds t = {}", b.t));
                    }
                }
            }
            if b.nonnegative && col.iter().any(|x| *x < 0.0) {
                problems.push(format!("v_{i}: negative entry under nonnegativity"));
            }
        }
        problems
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Leading singular pairs of the data.
    Svd,
    /// Caller-supplied starting factors.
    ProvidedFactors(FactorPair),
}

/// Which factor the stopping rule watches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StopOn {
    /// `max_i ||v_i_new - v_i_old||_2 < tol`.
    #[default]
    Loadings,
    /// `max_i ||u_i_new - u_i_old||_2 / ||u_i_old||_2 < tol`.
    Scores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub init: InitMode,
    pub tol: f64,
    pub max_sweeps: usize,
    pub refresh_period: usize,
    pub seed: u64,
    pub stop_on: StopOn,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            init: InitMode::Svd,
            tol: 1e-6,
            max_sweeps: 200,
            refresh_period: 50,
            seed: 0,
            stop_on: StopOn::Loadings,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be >= 1".into()));
        }
        if self.refresh_period == 0 {
            return Err(Error::InvalidConfig("refresh_period must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxSweeps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// `||X - U V^T||_F^2` at the starting point (may be infeasible).
    pub initial_objective: f64,
    /// `||X - U V^T||_F^2` after each sweep.
    pub objectives: Vec<f64>,
    pub sweeps_run: usize,
    pub termination: Termination,
    /// Wall time in seconds.
    pub elapsed: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn centering_examples() {
        let x = center_columns(&dmatrix![1.0, 2.0; 3.0, 4.0]).unwrap();
        assert_eq!(x.values(), &dmatrix![-1.0, -1.0; 1.0, 1.0]);
        assert!(x.is_centered());

        let again = center_columns(x.values()).unwrap();
        assert_eq!(again, x);

        let single = center_columns(&dmatrix![5.0, 7.0]).unwrap();
        assert_eq!(single.values(), &dmatrix![0.0, 0.0]);
    }

    #[test]
    fn centering_rejects_non_finite_with_location() {
        let err = center_columns(&dmatrix![1.0, 2.0; f64::NAN, 4.0]).unwrap_err();
        match err {
            Error::NonFinite { row, col, .. } => assert_eq!((row, col), (1, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn budget_examples() {
        assert_eq!(
            validate_budget(&SparsityBudget::l0(4.0), 10).unwrap(),
            BudgetCheck::Constrained
        );
        assert!(matches!(
            validate_budget(&SparsityBudget::l1(0.5), 10),
            Err(Error::InfeasibleBudget(_))
        ));
        assert_eq!(
            validate_budget(&SparsityBudget::l1(5.0), 10).unwrap(),
            BudgetCheck::UnconstrainedEquivalent
        );
        assert_eq!(
            validate_budget(&SparsityBudget::l0(10.0), 10).unwrap(),
            BudgetCheck::UnconstrainedEquivalent
        );
        assert!(validate_budget(&SparsityBudget::l0(0.9), 10).is_err());
        assert!(validate_budget(&SparsityBudget::l0(f64::NAN), 10).is_err());
    }

    #[test]
    fn fractional_l0_budget_floors() {
        assert_eq!(SparsityBudget::l0(3.7).cardinality(10), 3);
        assert_eq!(SparsityBudget::l0(30.0).cardinality(10), 10);
    }

    #[test]
    fn sign_canonicalization_keeps_product() {
        let mut f = FactorPair::new(dmatrix![1.0; 2.0], dmatrix![0.6; -0.8]).unwrap();
        let before = &f.u * f.v.transpose();
        f.canonicalize_signs();
        assert_eq!(f.v, dmatrix![-0.6; 0.8]);
        assert_eq!(&f.u * f.v.transpose(), before);
    }

    #[test]
    fn audit_flags_violations() {
        let f = FactorPair::new(
            DMatrix::zeros(2, 2),
            dmatrix![1.0, 0.6; 0.0, -0.8],
        )
        .unwrap();
        let ok = [SparsityBudget::l0(1.0), SparsityBudget::l1(1.4)];
        assert!(f.audit(&ok).is_empty());
        let bad = [SparsityBudget::l0(1.0), SparsityBudget::l1(1.2).nonnegative()];
        assert_eq!(f.audit(&bad).len(), 2);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let mut c = SolverConfig::default();
        c.tol = 0.0;
        assert!(c.validate().is_err());
        c = SolverConfig::default();
        c.refresh_period = 0;
        assert!(c.validate().is_err());
    }
}
