//! Block-coordinate solver for sparse PCA.
//!
//! Each sweep visits components in order. For component `i` the residual
//! with that component added back, `E_i = X - sum_{j != i} u_j v_j^T`, is
//! used to update `v_i` by a closed-form threshold and then `u_i = E_i v_i`.
//! `E_i` is never materialized: the solver keeps `R = X - U V^T` and applies
//! rank-one corrections, with a periodic full recompute.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::subproblem;
use crate::types::{
    validate_budget, DataMatrix, FactorPair, InitMode, SolverConfig, SolverReport, SparsityBudget,
    StopOn, Termination,
};

/// Cached `X - U V^T`.
#[derive(Debug, Clone)]
pub struct Residual {
    r: DMatrix<f64>,
    sweeps_since_refresh: usize,
}

impl Residual {
    pub fn new(x: &DataMatrix, f: &FactorPair) -> Self {
        Self {
            r: x.values() - &f.u * f.v.transpose(),
            sweeps_since_refresh: 0,
        }
    }

    pub fn refresh(&mut self, x: &DataMatrix, f: &FactorPair) {
        self.r.copy_from(x.values());
        self.r.gemm(-1.0, &f.u, &f.v.transpose(), 1.0);
        self.sweeps_since_refresh = 0;
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn sweeps_since_refresh(&self) -> usize {
        self.sweeps_since_refresh
    }

    /// `||X - U V^T||_F^2` from the cache.
    pub fn objective(&self) -> f64 {
        self.r.norm_squared()
    }
}

/// Per-sweep bookkeeping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepStats {
    /// `max_i ||v_i_new - v_i_old||_2`.
    pub max_loading_change: f64,
    /// `max_i ||u_i_new - u_i_old||_2 / ||u_i_old||_2`.
    pub max_score_change: f64,
    /// Components whose loading update was skipped because the threshold
    /// input vanished.
    pub skipped: Vec<usize>,
}

/// Leading `r` singular pairs: `v_i` the right singular vector, `u_i` the
/// left singular vector scaled by its singular value.
pub fn initialize(x: &DataMatrix, r: usize, cfg: &SolverConfig) -> Result<FactorPair> {
    let (n, d) = (x.n(), x.d());
    if r == 0 || r > n.min(d) {
        return Err(Error::InvalidInput(format!(
            "component count {r} outside [1, {}]",
            n.min(d)
        )));
    }
    if let InitMode::ProvidedFactors(f) = &cfg.init {
        if f.u.shape() != (n, r) || f.v.shape() != (d, r) {
            return Err(Error::DimensionMismatch(format!(
                "provided factors U {:?} V {:?}, expected ({n}, {r}) and ({d}, {r})",
                f.u.shape(),
                f.v.shape()
            )));
        }
        return Ok(f.clone());
    }

    if x.values().iter().all(|v| *v == 0.0) {
        return FactorPair::new(DMatrix::zeros(n, r), DMatrix::identity(d, r));
    }

    let svd = x.values().clone().svd(true, true);
    let left = svd.u.as_ref().expect("left vectors requested");
    let right_t = svd.v_t.as_ref().expect("right vectors requested");
    let mut u = DMatrix::zeros(n, r);
    let mut v = DMatrix::zeros(d, r);
    for i in 0..r {
        let sigma = svd.singular_values[i];
        u.set_column(i, &(left.column(i) * sigma));
        v.set_column(i, &right_t.row(i).transpose());
    }
    let mut f = FactorPair::new(u, v)?;
    f.canonicalize_signs();
    Ok(f)
}

/// One pass over all components, in index order.
pub fn sweep(
    state: &mut FactorPair,
    residual: &mut Residual,
    budgets: &[SparsityBudget],
) -> Result<SweepStats> {
    let r = state.r();
    if budgets.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "{} budgets for {r} components",
            budgets.len()
        )));
    }
    let (n, d) = residual.r.shape();
    let mut stats = SweepStats::default();
    let mut w = vec![0.0; d];
    let mut u_new = DVector::zeros(n);

    for (i, budget) in budgets.iter().enumerate() {
        let u_old = state.u.column(i).clone_owned();
        let v_old = state.v.column(i).clone_owned();
        let uu = u_old.norm_squared();

        // w = E_i^T u_i with E_i = R + u_i v_i^T.
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = residual.r.column(j).dot(&u_old) + v_old[j] * uu;
        }

        let v_new: DVector<f64> = match subproblem::solve(&w, budget) {
            Ok(sol) => DVector::from_vec(sol.v),
            Err(Error::ZeroVector | Error::NoPositiveEntry) => {
                stats.skipped.push(i);
                v_old.clone()
            }
            Err(e) => return Err(e),
        };

        // u_i = E_i v_i.
        u_new.copy_from(&u_old);
        u_new *= v_old.dot(&v_new);
        for (j, &vj) in v_new.iter().enumerate() {
            if vj != 0.0 {
                u_new.axpy(vj, &residual.r.column(j), 1.0);
            }
        }

        // R = E_i - u_i v_i^T.
        for j in 0..d {
            let mut col = residual.r.column_mut(j);
            if v_old[j] != 0.0 {
                col.axpy(v_old[j], &u_old, 1.0);
            }
            if v_new[j] != 0.0 {
                col.axpy(-v_new[j], &u_new, 1.0);
            }
        }

        let dv = (&v_new - &v_old).norm();
        let u_norm = u_old.norm();
        let du = (&u_new - &u_old).norm() / if u_norm > 0.0 { u_norm } else { 1.0 };
        stats.max_loading_change = stats.max_loading_change.max(dv);
        stats.max_score_change = stats.max_score_change.max(du);

        state.v.set_column(i, &v_new);
        state.u.set_column(i, &u_new);
    }
    residual.sweeps_since_refresh += 1;
    Ok(stats)
}

/// Run sweeps from the configured starting point until the watched factor
/// stops moving or `max_sweeps` is reached.
pub fn fit(
    x: &DataMatrix,
    budgets: &[SparsityBudget],
    cfg: &SolverConfig,
) -> Result<(FactorPair, SolverReport)> {
    let started = Instant::now();
    cfg.validate()?;
    for b in budgets {
        validate_budget(b, x.d())?;
    }
    let mut state = initialize(x, budgets.len(), cfg)?;
    let mut residual = Residual::new(x, &state);
    let initial_objective = residual.objective();

    let mut objectives = Vec::new();
    let mut termination = Termination::MaxSweeps;
    for _ in 0..cfg.max_sweeps {
        let stats = sweep(&mut state, &mut residual, budgets)?;
        if residual.sweeps_since_refresh >= cfg.refresh_period {
            residual.refresh(x, &state);
        }
        objectives.push(residual.objective());
        let change = match cfg.stop_on {
            StopOn::Loadings => stats.max_loading_change,
            StopOn::Scores => stats.max_score_change,
        };
        if change < cfg.tol {
            termination = Termination::Converged;
            break;
        }
    }

    state.canonicalize_signs();
    let report = SolverReport {
        initial_objective,
        sweeps_run: objectives.len(),
        objectives,
        termination,
        elapsed: started.elapsed().as_secs_f64(),
    };
    Ok((state, report))
}
