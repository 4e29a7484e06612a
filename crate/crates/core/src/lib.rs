//! Sparse principal component analysis by recursive divide-and-conquer.
//!
//! The sparse PCA problem
//!
//! ```text
//! min_{U,V} ||X - U V^T||_F^2   s.t.  ||v_i||_2 = 1,  ||v_i||_p <= t_i   (p = 0 or 1)
//! ```
//!
//! is split into rank-one subproblems, one per column of `U` and `V`, each
//! solved in closed form. Sweeping over them is a block coordinate descent
//! that never increases the objective once all loadings are feasible. A
//! nonnegativity constraint on the loadings is handled by thresholding the
//! positive part.
//!
//! ```no_run
//! use redac::{datagen, solver, SolverConfig, SparsityBudget};
//!
//! let data = datagen::gen_hastie(1000, 7).unwrap();
//! let budgets = [SparsityBudget::l0(4.0), SparsityBudget::l0(4.0)];
//! let (factors, report) = solver::fit(&data.x, &budgets, &SolverConfig::default()).unwrap();
//! println!("{:?} after {} sweeps", factors.supports(), report.sweeps_run);
//! ```

pub mod cli;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod solver;
pub mod subproblem;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use types::{
    center_columns, validate_budget, BudgetCheck, DataMatrix, FactorPair, InitMode, NormKind,
    SolverConfig, SolverReport, SparsityBudget, StopOn, Termination,
};
