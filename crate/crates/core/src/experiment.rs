//! Replicated fits on generated or user-supplied data, written out as CSV
//! tables plus a JSON manifest.
//!
//! Replicate seeds are `mix(mix(mix(seed) ^ n) ^ index)` where `mix` is the
//! splitmix64 finalizer, so any single replicate can be re-run on its own.
//! Replicates run on the rayon pool; results are collected in job order, so
//! the tables do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{design_from_covariance, gen_hastie, sample_gaussian, ToySpec};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, success_recovery, support_recovery};
use crate::types::{
    center_columns, validate_budget, DataMatrix, NormKind, SolverConfig, SparsityBudget, Termination,
};
use crate::{io, solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Hastie,
    Toy,
    NonnegToy,
    /// `input_path` holds a covariance or correlation matrix.
    CovarianceDataset,
    /// `input_path` holds raw samples, one per row.
    UserMatrix,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_max_sweeps() -> usize {
    200
}
fn default_refresh() -> usize {
    50
}
fn default_threshold() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub replicates: usize,
    /// Ignored for `user_matrix`; defaults to `[180]` for
    /// `covariance_dataset`.
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    pub budgets: Vec<f64>,
    pub norm: NormKind,
    pub seed: u64,
    pub output_path: PathBuf,
    #[serde(default)]
    pub input_path: Option<PathBuf>,
    #[serde(default)]
    pub standardize: bool,
    /// Forced on for `nonneg_toy`.
    #[serde(default)]
    pub nonnegative: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_refresh")]
    pub refresh_period: usize,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn budget_list(&self) -> Vec<SparsityBudget> {
        let nonneg = self.nonnegative || self.kind == ExperimentKind::NonnegToy;
        self.budgets
            .iter()
            .map(|&t| {
                let b = SparsityBudget { norm: self.norm, t, nonnegative: false };
                if nonneg {
                    b.nonnegative()
                } else {
                    b
                }
            })
            .collect()
    }

    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            refresh_period: self.refresh_period,
            seed,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.budgets.is_empty() {
            return Err(Error::InvalidConfig("budgets must list one value per component".into()));
        }
        let needs_input = matches!(
            self.kind,
            ExperimentKind::CovarianceDataset | ExperimentKind::UserMatrix
        );
        if needs_input && self.input_path.is_none() {
            return Err(Error::InvalidConfig(format!("{:?} needs input_path", self.kind)));
        }
        let generated = matches!(
            self.kind,
            ExperimentKind::Hastie | ExperimentKind::Toy | ExperimentKind::NonnegToy
        );
        let mut sizes = self.sample_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.len() != self.sample_sizes.len() {
            return Err(Error::InvalidConfig("sample_sizes must be distinct".into()));
        }
        if generated {
            if self.sample_sizes.is_empty() {
                return Err(Error::InvalidConfig("sample_sizes must not be empty".into()));
            }
            if self.budgets.len() < 2 {
                return Err(Error::InvalidConfig(
                    "recovery experiments need at least two components".into(),
                ));
            }
            for b in self.budget_list() {
                validate_budget(&b, 10)?;
            }
        }
        self.solver_config(0).validate()
    }
}

/// splitmix64 finalizer.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replicate_seed(seed: u64, sample_size: usize, index: usize) -> u64 {
    mix64(mix64(mix64(seed) ^ sample_size as u64) ^ index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub sample_size: usize,
    pub replicate: usize,
    pub seed: u64,
    /// Empty when the dataset has no ground truth.
    pub success: Option<bool>,
    pub rre: f64,
    pub pev: f64,
    /// Per-component nonzero counts joined by `;`.
    pub cardinalities: String,
    pub sweeps: usize,
    pub converged: bool,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sample_size: usize,
    pub replicates: usize,
    /// Empty when the dataset has no ground truth.
    pub successes: Option<usize>,
    pub success_rate: Option<f64>,
    pub rre_mean: f64,
    pub rre_min: f64,
    pub rre_max: f64,
    pub pev_mean: f64,
    pub pev_min: f64,
    pub pev_max: f64,
    pub sweeps_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ManifestEntry {
    sample_size: usize,
    replicate: usize,
    seed: u64,
    elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    library_version: &'static str,
    seed_mixing: &'static str,
    spec: &'a ExperimentSpec,
    replicates: Vec<ManifestEntry>,
    total_elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Vec<SummaryRow>,
    pub records: Vec<ReplicateRecord>,
    pub summary_path: PathBuf,
    pub replicates_path: PathBuf,
    pub manifest_path: PathBuf,
}

enum Truth {
    None,
    Vectors(DMatrix<f64>),
    Supports(Vec<Vec<usize>>),
}

enum Source {
    Generated,
    Covariance(DMatrix<f64>),
    Fixed(DataMatrix),
}

fn load_source(spec: &ExperimentSpec) -> Result<(Source, Vec<usize>)> {
    match spec.kind {
        ExperimentKind::Hastie | ExperimentKind::Toy | ExperimentKind::NonnegToy => {
            Ok((Source::Generated, spec.sample_sizes.clone()))
        }
        ExperimentKind::CovarianceDataset => {
            let path = spec.input_path.as_ref().expect("validated");
            let sigma = io::read_matrix(path)?.values;
            if sigma.nrows() != sigma.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "covariance matrix is {}x{}",
                    sigma.nrows(),
                    sigma.ncols()
                )));
            }
            let sizes = if spec.sample_sizes.is_empty() {
                vec![180]
            } else {
                spec.sample_sizes.clone()
            };
            Ok((Source::Covariance(sigma), sizes))
        }
        ExperimentKind::UserMatrix => {
            let path = spec.input_path.as_ref().expect("validated");
            let raw = io::read_matrix(path)?.values;
            let x = center_columns(&raw)?;
            let n = x.n();
            Ok((Source::Fixed(prepare(x, spec.standardize)), vec![n]))
        }
    }
}

fn prepare(x: DataMatrix, standardize: bool) -> DataMatrix {
    if standardize {
        x.standardized()
    } else {
        x
    }
}

fn replicate_data(spec: &ExperimentSpec, source: &Source, n: usize, seed: u64) -> Result<(DataMatrix, Truth)> {
    match spec.kind {
        ExperimentKind::Hastie => {
            let h = gen_hastie(n, seed)?;
            Ok((prepare(h.x, spec.standardize), Truth::Supports(h.supports.to_vec())))
        }
        ExperimentKind::Toy | ExperimentKind::NonnegToy => {
            let toy = if spec.kind == ExperimentKind::Toy {
                ToySpec::signed(spec.seed)
            } else {
                ToySpec::nonnegative(spec.seed)
            };
            let x = sample_gaussian(&toy, n, seed)?;
            Ok((prepare(x, spec.standardize), Truth::Vectors(toy.truth(&[0, 1])?)))
        }
        ExperimentKind::CovarianceDataset | ExperimentKind::UserMatrix => match source {
            Source::Covariance(sigma) => Ok((
                prepare(design_from_covariance(sigma, n)?, spec.standardize),
                Truth::None,
            )),
            Source::Fixed(x) => Ok((x.clone(), Truth::None)),
            Source::Generated => unreachable!("file-backed kinds are loaded up front"),
        },
    }
}

fn run_one(
    spec: &ExperimentSpec,
    source: &Source,
    budgets: &[SparsityBudget],
    n: usize,
    index: usize,
) -> Result<(ReplicateRecord, f64)> {
    let started = Instant::now();
    let seed = replicate_seed(spec.seed, n, index);
    let (x, truth) = replicate_data(spec, source, n, seed)?;
    let (factors, report) = solver::fit(&x, budgets, &spec.solver_config(seed))?;
    let eval = evaluate(&x, &factors.v)?;
    let leading = factors.v.columns(0, factors.r().min(2)).into_owned();
    let success = match &truth {
        Truth::None => None,
        Truth::Vectors(v) => Some(success_recovery(&leading, v, spec.success_threshold)),
        Truth::Supports(s) => Some(support_recovery(&leading, s)),
    };
    let record = ReplicateRecord {
        sample_size: n,
        replicate: index,
        seed,
        success,
        rre: eval.rre,
        pev: eval.pev,
        cardinalities: eval
            .per_component_cardinality
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";"),
        sweeps: report.sweeps_run,
        converged: report.termination == Termination::Converged,
        objective: report.objectives.last().copied().unwrap_or(report.initial_objective),
    };
    Ok((record, started.elapsed().as_secs_f64()))
}

pub fn summarize(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    let mut sizes: Vec<usize> = records.iter().map(|r| r.sample_size).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let group: Vec<&ReplicateRecord> = records.iter().filter(|r| r.sample_size == n).collect();
            let k = group.len() as f64;
            let stat = |f: fn(&ReplicateRecord) -> f64| {
                let vals: Vec<f64> = group.iter().map(|r| f(r)).collect();
                (
                    vals.iter().sum::<f64>() / k,
                    vals.iter().copied().fold(f64::INFINITY, f64::min),
                    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let (rre_mean, rre_min, rre_max) = stat(|r| r.rre);
            let (pev_mean, pev_min, pev_max) = stat(|r| r.pev);
            let successes = group
                .iter()
                .map(|r| r.success.map(usize::from))
                .sum::<Option<usize>>();
            SummaryRow {
                sample_size: n,
                replicates: group.len(),
                successes,
                success_rate: successes.map(|s| s as f64 / k),
                rre_mean,
                rre_min,
                rre_max,
                pev_mean,
                pev_min,
                pev_max,
                sweeps_mean: group.iter().map(|r| r.sweeps as f64).sum::<f64>() / k,
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Run every (sample size, replicate) pair and write `summary.csv`,
/// `replicates.csv` and `manifest.json` under `spec.output_path`. The CSV
/// files hold no timings, so identical specs give identical bytes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    spec.validate()?;
    let budgets = spec.budget_list();
    let (source, sizes) = load_source(spec)?;
    let d = match &source {
        Source::Generated => 10,
        Source::Covariance(sigma) => sigma.nrows(),
        Source::Fixed(x) => x.d(),
    };
    for b in &budgets {
        validate_budget(b, d)?;
    }

    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..spec.replicates).map(move |i| (n, i)))
        .collect();
    let results: Vec<(ReplicateRecord, f64)> = jobs
        .par_iter()
        .map(|&(n, i)| run_one(spec, &source, &budgets, n, i))
        .collect::<Result<_>>()?;

    let records: Vec<ReplicateRecord> = results.iter().map(|(r, _)| r.clone()).collect();
    let summary = summarize(&records);

    let dir = &spec.output_path;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary_path = dir.join("summary.csv");
    let replicates_path = dir.join("replicates.csv");
    let manifest_path = dir.join("manifest.json");
    write_csv(&summary_path, &summary)?;
    write_csv(&replicates_path, &records)?;

    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        seed_mixing: "splitmix64: mix(mix(mix(seed) ^ sample_size) ^ replicate)",
        spec,
        replicates: results
            .iter()
            .map(|(r, t)| ManifestEntry {
                sample_size: r.sample_size,
                replicate: r.replicate,
                seed: r.seed,
                elapsed_seconds: *t,
            })
            .collect(),
        total_elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;

    Ok(ExperimentOutcome {
        summary,
        records,
        summary_path,
        replicates_path,
        manifest_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ExperimentKind, dir: &Path) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            replicates: 3,
            sample_sizes: vec![1000],
            budgets: vec![4.0, 4.0],
            norm: NormKind::L0,
            seed: 5,
            output_path: dir.to_path_buf(),
            input_path: None,
            standardize: false,
            nonnegative: false,
            tol: 1e-6,
            max_sweeps: 200,
            refresh_period: 50,
            success_threshold: 0.99,
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = replicate_seed(1, 500, 0);
        assert_eq!(a, replicate_seed(1, 500, 0));
        assert_ne!(a, replicate_seed(1, 500, 1));
        assert_ne!(a, replicate_seed(1, 5000, 0));
        assert_ne!(a, replicate_seed(2, 500, 0));
    }

    #[test]
    fn hastie_run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&spec(ExperimentKind::Hastie, dir.path())).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.summary.len(), 1);
        assert_eq!(out.summary[0].successes, Some(3));
        let text = fs::read_to_string(&out.summary_path).unwrap();
        assert!(text.starts_with("sample_size,replicates,successes"));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out.manifest_path).unwrap()).unwrap();
        assert_eq!(manifest["replicates"].as_array().unwrap().len(), 3);
        let rerun: ExperimentSpec = serde_json::from_value(manifest["spec"].clone()).unwrap();
        assert_eq!(rerun, spec(ExperimentKind::Hastie, dir.path()));
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"kind":"nonneg_toy","replicates":2,"sample_sizes":[500],
            "budgets":[5,5],"norm":"l0","seed":1,"output_path":"out"}"#;
        let s = ExperimentSpec::from_json(text).unwrap();
        assert_eq!(s.kind, ExperimentKind::NonnegToy);
        assert!(s.budget_list().iter().all(|b| b.nonnegative));
        assert_eq!(s.tol, 1e-6);
        assert!(ExperimentSpec::from_json(r#"{"kind":"toy","bogus":1}"#).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(ExperimentKind::Toy, dir.path());
        s.replicates = 0;
        assert!(run_experiment(&s).is_err());
        let mut s = spec(ExperimentKind::Toy, dir.path());
        s.budgets = vec![0.5, 4.0];
        assert!(matches!(run_experiment(&s), Err(Error::InfeasibleBudget(_))));
        let s = spec(ExperimentKind::UserMatrix, dir.path());
        assert!(matches!(run_experiment(&s), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn user_matrix_has_no_success_column() {
        let dir = tempfile::tempdir().unwrap();
        let data = gen_hastie(50, 1).unwrap();
        let input = dir.path().join("x.csv");
        io::write_matrix(&input, data.x.values(), None).unwrap();
        let mut s = spec(ExperimentKind::UserMatrix, &dir.path().join("out"));
        s.input_path = Some(input);
        s.replicates = 1;
        let out = run_experiment(&s).unwrap();
        assert_eq!(out.summary[0].sample_size, 50);
        assert_eq!(out.summary[0].successes, None);
    }
}
