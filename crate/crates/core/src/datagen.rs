//! Seeded synthetic data.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; each
//! independent quantity draws from its own stream (`set_stream`), so a
//! column's values do not depend on how many values other columns consumed.
//! Stream assignments:
//!
//! | generator              | stream                         |
//! |------------------------|--------------------------------|
//! | hastie factor `V1`     | 0                              |
//! | hastie factor `V2`     | 1                              |
//! | hastie `V3` noise      | 2                              |
//! | hastie column `j` noise| `16 + j`                       |
//! | gaussian column `j`    | `j`                            |
//! | basis completion       | `1024 + attempt`               |

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{center_columns, DataMatrix};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()
}

/// Hastie factor data together with the supports of its two sparse
/// components (0-based column indices).
#[derive(Debug, Clone)]
pub struct HastieData {
    pub x: DataMatrix,
    pub supports: [Vec<usize>; 2],
}

/// Ten observed variables driven by three latent factors:
/// `V1 ~ N(0, 290)`, `V2 ~ N(0, 300)`, `V3 = 0.3 V1 + 0.925 V2 + e`.
/// Columns 0..4 observe `V1`, 4..8 observe `V2`, 8..10 observe `V3`, each
/// with independent unit-variance noise.
pub fn gen_hastie(n: usize, seed: u64) -> Result<HastieData> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("hastie needs n >= 2, got {n}")));
    }
    let v1: Vec<f64> = normals(seed, 0, n).into_iter().map(|z| z * 290f64.sqrt()).collect();
    let v2: Vec<f64> = normals(seed, 1, n).into_iter().map(|z| z * 300f64.sqrt()).collect();
    let eps = normals(seed, 2, n);
    let v3: Vec<f64> = (0..n).map(|i| 0.3 * v1[i] + 0.925 * v2[i] + eps[i]).collect();

    let mut raw = DMatrix::zeros(n, 10);
    for j in 0..10 {
        let factor = match j {
            0..=3 => &v1,
            4..=7 => &v2,
            _ => &v3,
        };
        let noise = normals(seed, 16 + j as u64, n);
        for i in 0..n {
            raw[(i, j)] = factor[i] + noise[i];
        }
    }
    Ok(HastieData {
        x: center_columns(&raw)?,
        supports: [vec![4, 5, 6, 7], vec![0, 1, 2, 3]],
    })
}

fn check_orthonormal(vectors: &[DVector<f64>]) -> Result<()> {
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let expect = if i == j { 1.0 } else { 0.0 };
            let got = a.dot(b);
            if (got - expect).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "fixed vectors not orthonormal: <v{i}, v{j}> = {got}"
                )));
            }
        }
    }
    Ok(())
}

/// Extend orthonormal `fixed` vectors to an orthonormal basis of R^d by
/// Gram-Schmidt on seeded Gaussian vectors. Returned columns start with
/// `fixed` in order.
pub fn complete_basis(fixed: &[DVector<f64>], d: usize, seed: u64) -> Result<DMatrix<f64>> {
    if fixed.len() > d || fixed.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "{} fixed vectors for dimension {d}",
            fixed.len()
        )));
    }
    check_orthonormal(fixed)?;
    let mut basis: Vec<DVector<f64>> = fixed.to_vec();
    let mut attempt = 0u64;
    while basis.len() < d {
        let mut rng = stream_rng(seed, 1024 + attempt);
        attempt += 1;
        let mut c = DVector::from_fn(d, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
        // Two passes of classical Gram-Schmidt keep orthogonality near
        // machine precision.
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&c);
                c.axpy(-p, q, 1.0);
            }
        }
        let norm = c.norm();
        if norm < 1e-8 {
            continue;
        }
        basis.push(c / norm);
    }
    Ok(DMatrix::from_columns(&basis))
}

/// Gaussian model with prescribed eigenpairs. Eigenvectors at the indices in
/// `fixed_vectors` are given; the rest complete an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub eigenvalues: Vec<f64>,
    pub fixed_vectors: Vec<(usize, Vec<f64>)>,
    pub seed: u64,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

impl ToySpec {
    /// Ten-dimensional model with two sparse leading eigenvectors of mixed
    /// sign. The printed three-digit loadings are rescaled to unit norm.
    pub fn signed(seed: u64) -> Self {
        Self {
            eigenvalues: vec![250.0, 240.0, 50.0, 50.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
            fixed_vectors: vec![
                (0, unit(&[0.422, 0.422, 0.422, 0.422, 0.0, 0.0, 0.0, 0.0, 0.380, 0.380])),
                (1, unit(&[0.0, 0.0, 0.0, 0.0, 0.489, 0.489, 0.489, 0.489, -0.147, 0.147])),
            ],
            seed,
        }
    }

    /// Ten-dimensional model with two sparse nonnegative leading
    /// eigenvectors.
    pub fn nonnegative(seed: u64) -> Self {
        Self {
            eigenvalues: vec![210.0, 190.0, 50.0, 50.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
            fixed_vectors: vec![
                (0, unit(&[0.474, 0.0, 0.158, 0.0, 0.316, 0.0, 0.791, 0.0, 0.158, 0.0])),
                (1, unit(&[0.0, 0.140, 0.0, 0.840, 0.0, 0.280, 0.0, 0.140, 0.0, 0.420])),
            ],
            seed,
        }
    }

    pub fn d(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d == 0 {
            return Err(Error::InvalidInput("no eigenvalues".into()));
        }
        if self.eigenvalues.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::InvalidInput("eigenvalues must be positive".into()));
        }
        let mut seen = vec![false; d];
        for (idx, v) in &self.fixed_vectors {
            if *idx >= d || v.len() != d || seen[*idx] {
                return Err(Error::InvalidInput(format!("bad fixed vector at index {idx}")));
            }
            seen[*idx] = true;
        }
        let fixed: Vec<DVector<f64>> = self
            .fixed_vectors
            .iter()
            .map(|(_, v)| DVector::from_column_slice(v))
            .collect();
        check_orthonormal(&fixed)
    }

    /// Orthonormal eigenvector matrix, column `j` pairs with eigenvalue `j`.
    pub fn basis(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let d = self.d();
        let fixed: Vec<DVector<f64>> = self
            .fixed_vectors
            .iter()
            .map(|(_, v)| DVector::from_column_slice(v))
            .collect();
        let completed = complete_basis(&fixed, d, self.seed)?;
        let mut out = DMatrix::zeros(d, d);
        let mut next_free = fixed.len();
        let mut slot: Vec<Option<usize>> = vec![None; d];
        for (k, (idx, _)) in self.fixed_vectors.iter().enumerate() {
            slot[*idx] = Some(k);
        }
        for j in 0..d {
            let src = match slot[j] {
                Some(k) => k,
                None => {
                    next_free += 1;
                    next_free - 1
                }
            };
            out.set_column(j, &completed.column(src));
        }
        Ok(out)
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let q = self.basis()?;
        let c = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        Ok(&q * c * q.transpose())
    }

    /// The given eigenvectors at `indices`, as columns.
    pub fn truth(&self, indices: &[usize]) -> Result<DMatrix<f64>> {
        let q = self.basis()?;
        let cols: Vec<DVector<f64>> = indices.iter().map(|&j| q.column(j).into_owned()).collect();
        Ok(DMatrix::from_columns(&cols))
    }
}

/// Symmetric square root of a PSD matrix via eigendecomposition. Eigenvalues
/// below `-1e-10 * max(1, ||sigma||)` are rejected; smaller negatives clamp
/// to zero.
pub fn sqrt_psd(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::DimensionMismatch(format!("{:?} is not square", sigma.shape())));
    }
    let scale = sigma.norm().max(1.0);
    if (sigma - sigma.transpose()).norm() > 1e-10 * scale {
        return Err(Error::InvalidInput("covariance is not symmetric".into()));
    }
    let eig = sigma.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -1e-10 * scale {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// `n` draws from `N(0, Sigma)` as rows, then centered.
pub fn sample_gaussian(spec: &ToySpec, n: usize, seed: u64) -> Result<DataMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let root = sqrt_psd(&spec.covariance()?)?;
    let d = spec.d();
    let mut z = DMatrix::zeros(n, d);
    for j in 0..d {
        z.set_column(j, &DVector::from_vec(normals(seed, j as u64, n)));
    }
    center_columns(&(z * root))
}

/// Deterministic `n x d` matrix with `(1/n) X^T X = Sigma`.
///
/// `X = sqrt(n) Q Sigma^{1/2}` where `Q` has orthonormal columns. For
/// `n > d`, `Q` is taken from the Helmert basis, whose columns are
/// orthogonal to the all-ones vector, so `X` is also column-centered. For
/// `n = d`, `Q = I`.
pub fn design_from_covariance(sigma: &DMatrix<f64>, n: usize) -> Result<DataMatrix> {
    let d = sigma.nrows();
    if n < d {
        return Err(Error::InvalidInput(format!("need n >= d, got n = {n}, d = {d}")));
    }
    let root = sqrt_psd(sigma)?;
    let q = if n == d {
        DMatrix::identity(n, d)
    } else {
        DMatrix::from_fn(n, d, |i, j| {
            let k = (j + 1) as f64;
            let s = (k * (k + 1.0)).sqrt();
            if i <= j {
                1.0 / s
            } else if i == j + 1 {
                -k / s
            } else {
                0.0
            }
        })
    };
    DataMatrix::new(q * root * (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn cov(x: &DataMatrix) -> DMatrix<f64> {
        x.values().transpose() * x.values() / x.n() as f64
    }

    #[test]
    fn hastie_moments() {
        let h = gen_hastie(100_000, 42).unwrap();
        let c = cov(&h.x);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((c[(i, j)] / 290.0 - 1.0).abs() < 0.03, "cov({i},{j}) = {}", c[(i, j)]);
            }
        }
        let corr = c[(8, 9)] / (c[(8, 8)] * c[(9, 9)]).sqrt();
        assert!(corr > 0.99, "corr = {corr}");
        assert!(h.x.is_centered());
    }

    #[test]
    fn hastie_is_deterministic() {
        let a = gen_hastie(50, 3).unwrap();
        let b = gen_hastie(50, 3).unwrap();
        assert_eq!(a.x, b.x);
        assert_ne!(a.x, gen_hastie(50, 4).unwrap().x);
    }

    #[test]
    fn basis_completion_from_e1() {
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let q = complete_basis(&[e1.clone()], 3, 7).unwrap();
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).norm() < 1e-10);
        assert_eq!(q.column(0), e1.column(0));
    }

    #[test]
    fn basis_completion_keeps_toy_vectors() {
        let spec = ToySpec::signed(1);
        let fixed: Vec<DVector<f64>> = spec
            .fixed_vectors
            .iter()
            .map(|(_, v)| DVector::from_column_slice(v))
            .collect();
        let q = complete_basis(&fixed, 10, 1).unwrap();
        assert!((q.transpose() * &q - DMatrix::identity(10, 10)).norm() < 1e-10);
        assert_eq!(q.column(0), fixed[0].column(0));
        assert_eq!(q.column(1), fixed[1].column(0));
    }

    #[test]
    fn basis_completion_from_nothing() {
        let q = complete_basis(&[], 4, 9).unwrap();
        assert!((&q * q.transpose() - DMatrix::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn basis_completion_rejects_non_orthonormal() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]).normalize();
        assert!(complete_basis(&[a, b], 2, 0).is_err());
    }

    #[test]
    fn white_gaussian_has_identity_covariance() {
        let spec = ToySpec {
            eigenvalues: vec![1.0; 4],
            fixed_vectors: vec![],
            seed: 0,
        };
        let x = sample_gaussian(&spec, 50_000, 5).unwrap();
        assert!((cov(&x) - DMatrix::identity(4, 4)).amax() < 0.03);
    }

    fn leading_eigvecs(c: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
        let eig = c.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..c.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        (
            eig.eigenvectors.column(order[0]).into_owned(),
            eig.eigenvectors.column(order[1]).into_owned(),
        )
    }

    #[test]
    fn toy_samples_span_the_planted_eigenvectors() {
        // The two leading eigenvalues are close (250 vs 240 for the signed
        // model), so individual sample eigenvectors can rotate within the
        // planted plane; the plane itself is stable.
        for spec in [ToySpec::signed(11), ToySpec::nonnegative(11)] {
            let x = sample_gaussian(&spec, 5000, 3).unwrap();
            let (e1, e2) = leading_eigvecs(&cov(&x));
            let plane = DMatrix::from_columns(&[e1, e2]);
            let truth = spec.truth(&[0, 1]).unwrap();
            for k in 0..2 {
                let inside = (plane.transpose() * truth.column(k)).norm();
                assert!(inside > 0.99, "{inside}");
            }
        }
        let spec = ToySpec::nonnegative(11);
        let x = sample_gaussian(&spec, 5000, 3).unwrap();
        let (e1, e2) = leading_eigvecs(&cov(&x));
        let truth = spec.truth(&[0, 1]).unwrap();
        assert!(e1.dot(&truth.column(0)).abs() > 0.95);
        assert!(e2.dot(&truth.column(1)).abs() > 0.95);
    }

    #[test]
    fn toy_covariance_is_exact() {
        let spec = ToySpec::signed(2);
        let c = spec.covariance().unwrap();
        let v1 = DVector::from_column_slice(&spec.fixed_vectors[0].1);
        assert!((&c * &v1 - &v1 * 250.0).norm() < 1e-10);
    }

    #[test]
    fn design_identity() {
        let x = design_from_covariance(&DMatrix::identity(3, 3), 3).unwrap();
        assert!((cov(&x) - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn design_diag_column_norms() {
        let x = design_from_covariance(&dmatrix![4.0, 0.0; 0.0, 1.0], 4).unwrap();
        assert_relative_eq!(x.values().column(0).norm_squared(), 16.0, epsilon = 1e-12);
        assert_relative_eq!(x.values().column(1).norm_squared(), 4.0, epsilon = 1e-12);
        assert!(x.is_centered());
    }

    #[test]
    fn design_rejects_indefinite() {
        assert!(matches!(
            design_from_covariance(&dmatrix![1.0, 2.0; 2.0, 1.0], 5),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn design_round_trip_on_random_psd() {
        for k in 0..100u64 {
            let d = 1 + (k as usize % 20);
            let mut rng = stream_rng(k, 0);
            let a = DMatrix::from_fn(d, d + 2, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
            let sigma = &a * a.transpose();
            let x = design_from_covariance(&sigma, d + 5 + k as usize).unwrap();
            let err = (cov(&x) - &sigma).norm();
            assert!(err <= 1e-10 * sigma.norm(), "d = {d}: {err}");
        }
    }
}
