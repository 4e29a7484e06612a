//! Evaluation of fitted loadings: reconstruction error, explained variance,
//! and recovery of known components.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::DataMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub rre: f64,
    pub pev: f64,
    pub per_component_cardinality: Vec<usize>,
}

/// Least-squares reconstruction `X V (V^T V)^{-1} V^T`.
pub fn project(x: &DataMatrix, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if v.nrows() != x.d() {
        return Err(Error::DimensionMismatch(format!(
            "loadings have {} rows, data has {} columns",
            v.nrows(),
            x.d()
        )));
    }
    if v.ncols() == 0 {
        return Ok(DMatrix::zeros(x.n(), x.d()));
    }
    let gram = v.transpose() * v;
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::SingularProjection);
    }
    let chol = gram.cholesky().ok_or(Error::SingularProjection)?;
    let xv = x.values() * v;
    // U_hat^T = (V^T V)^{-1} V^T X^T
    let scores_t = chol.solve(&xv.transpose());
    Ok(scores_t.transpose() * v.transpose())
}

fn energies(x: &DataMatrix, v: &DMatrix<f64>) -> Result<(f64, f64, f64)> {
    let total = x.values().norm_squared();
    if total == 0.0 {
        return Err(Error::InvalidInput("data matrix is identically zero".into()));
    }
    let xhat = project(x, v)?;
    let resid = (x.values() - &xhat).norm_squared();
    Ok((total, resid, xhat.norm_squared()))
}

/// Relative reconstruction error `||X - X_hat||_F / ||X||_F`.
pub fn rre(x: &DataMatrix, v: &DMatrix<f64>) -> Result<f64> {
    let (total, resid, _) = energies(x, v)?;
    Ok((resid / total).sqrt())
}

/// Percentage of explained variance `tr(X_hat^T X_hat) / tr(X^T X) * 100`.
pub fn pev(x: &DataMatrix, v: &DMatrix<f64>) -> Result<f64> {
    let (total, _, explained) = energies(x, v)?;
    Ok(explained / total * 100.0)
}

pub fn evaluate(x: &DataMatrix, v: &DMatrix<f64>) -> Result<EvalResult> {
    let (total, resid, explained) = energies(x, v)?;
    Ok(EvalResult {
        rre: (resid / total).sqrt(),
        pev: explained / total * 100.0,
        per_component_cardinality: v
            .column_iter()
            .map(|c| c.iter().filter(|x| **x != 0.0).count())
            .collect(),
    })
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; r], &mut out);
    out
}

/// True when every estimated component has `|v_hat_i^T v_i| >= threshold`
/// for some assignment of estimated columns to true columns.
pub fn success_recovery(v_hat: &DMatrix<f64>, v_true: &DMatrix<f64>, threshold: f64) -> bool {
    if v_hat.shape() != v_true.shape() {
        return false;
    }
    let r = v_true.ncols();
    permutations(r).iter().any(|perm| {
        perm.iter()
            .enumerate()
            .all(|(i, &j)| v_hat.column(j).dot(&v_true.column(i)).abs() >= threshold)
    })
}

/// True when the nonzero patterns of the estimated loadings equal the given
/// supports under some column assignment.
pub fn support_recovery(v_hat: &DMatrix<f64>, truth: &[Vec<usize>]) -> bool {
    if v_hat.ncols() != truth.len() {
        return false;
    }
    let found: Vec<Vec<usize>> = v_hat
        .column_iter()
        .map(|c| (0..c.len()).filter(|&i| c[i] != 0.0).collect())
        .collect();
    permutations(truth.len())
        .iter()
        .any(|perm| perm.iter().enumerate().all(|(i, &j)| found[j] == truth[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, DVector};

    fn axis_data() -> DataMatrix {
        // Samples on the axes of diag(3, 4).
        DataMatrix::new(dmatrix![3.0, 0.0; -3.0, 0.0; 0.0, 4.0; 0.0, -4.0]).unwrap()
    }

    #[test]
    fn exact_span_has_zero_error() {
        let x = DataMatrix::new(dmatrix![1.0, 2.0, 0.0; 2.0, 4.0, 0.0; -3.0, -6.0, 0.0]).unwrap();
        let v = dmatrix![1.0; 2.0; 0.0] / 5f64.sqrt();
        assert!(rre(&x, &v).unwrap() < 1e-15);
        assert_relative_eq!(pev(&x, &v).unwrap(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn axis_projection_by_hand() {
        // ||X||^2 = 18 + 32 = 50; keeping e1 retains 18.
        let x = axis_data();
        let v = dmatrix![1.0; 0.0];
        assert_relative_eq!(rre(&x, &v).unwrap(), (32.0f64 / 50.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(pev(&x, &v).unwrap(), 36.0, epsilon = 1e-12);
    }

    #[test]
    fn full_basis_explains_everything() {
        let x = axis_data();
        let q = dmatrix![0.6, -0.8; 0.8, 0.6];
        assert_relative_eq!(pev(&x, &q).unwrap(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_loadings_error() {
        let x = axis_data();
        let v = dmatrix![1.0, 2.0; 0.0, 0.0];
        assert!(matches!(rre(&x, &v), Err(Error::SingularProjection)));
    }

    #[test]
    fn success_examples() {
        let v = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        assert!(success_recovery(&v, &v, 0.99));
        let swapped = dmatrix![0.0, 1.0; 1.0, 0.0; 0.0, 0.0];
        assert!(success_recovery(&swapped, &v, 0.99));
        let a = 10f64.to_radians();
        let rotated = DMatrix::from_columns(&[
            DVector::from_vec(vec![a.cos(), 0.0, a.sin()]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ]);
        assert!(!success_recovery(&rotated, &v, 0.99));
        assert!(success_recovery(&(-v.clone()), &v, 0.99));
    }

    #[test]
    fn support_examples() {
        let v = dmatrix![0.0, 0.5; 1.0, 0.5; 0.0, 0.0];
        assert!(support_recovery(&v, &[vec![1], vec![0, 1]]));
        assert!(support_recovery(&v, &[vec![0, 1], vec![1]]));
        assert!(!support_recovery(&v, &[vec![1], vec![0]]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn span_invariance_and_pythagoras(
                data in proptest::collection::vec(-5.0f64..5.0, 8 * 4),
                basis in proptest::collection::vec(-1.0f64..1.0, 4 * 2),
                mix in proptest::collection::vec(-2.0f64..2.0, 4),
            ) {
                let x = DataMatrix::new(DMatrix::from_vec(8, 4, data)).unwrap();
                let v = DMatrix::from_vec(4, 2, basis);
                let m = DMatrix::from_vec(2, 2, mix);
                prop_assume!(x.values().norm() > 1e-3);
                prop_assume!(m.determinant().abs() > 1e-2);
                let Ok(e) = evaluate(&x, &v) else { return Ok(()); };
                prop_assert!(e.rre >= 0.0 && e.rre <= 1.0 + 1e-12);
                prop_assert!(e.pev >= -1e-9 && e.pev <= 100.0 + 1e-9);
                prop_assert!((e.rre * e.rre + e.pev / 100.0 - 1.0).abs() < 1e-9);
                if let Ok(r2) = rre(&x, &(&v * &m)) {
                    prop_assert!((r2 - e.rre).abs() < 1e-7);
                }
            }
        }
    }
}
