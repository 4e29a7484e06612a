//! Command-line front end. `dispatch` returns the process exit code:
//! 0 success, 1 usage error, 2 runtime or data error, 3 verification
//! failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::datagen::{gen_hastie, sample_gaussian, ToySpec};
use crate::error::Error;
use crate::experiment::{run_experiment, ExperimentSpec};
use crate::metrics::evaluate;
use crate::types::{center_columns, NormKind, SolverConfig, SolverReport, SparsityBudget};
use crate::verify::{run_all, VerifyConfig};
use crate::{io, solver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "redac", version, about = "Sparse PCA by recursive rank-one updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit sparse loadings to a CSV matrix.
    Fit(FitArgs),
    /// Run a replicated experiment described by a JSON spec.
    Experiment { spec: PathBuf },
    /// Check the closed-form subproblem solvers against brute force.
    Verify(VerifyArgs),
    /// Write a generated data set to CSV.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    matrix: PathBuf,
    /// Number of components.
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "l0")]
    norm: NormKind,
    /// Comma-separated budgets, one per component, or a single shared value.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for V.csv, U.csv and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scale each column to unit variance after centering.
    #[arg(long)]
    standardize: bool,
    /// Constrain loadings to be entrywise nonnegative.
    #[arg(long)]
    nonneg: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = 10)]
    dim_max: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dataset {
    Hastie,
    Toy,
    Nntoy,
}

#[derive(Debug, Args)]
struct GenArgs {
    dataset: Dataset,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct FitReport<'a> {
    norm: NormKind,
    budgets: &'a [f64],
    nonnegative: bool,
    standardized: bool,
    rre: f64,
    pev: f64,
    cardinalities: Vec<usize>,
    /// 1-based column indices.
    supports: Vec<Vec<usize>>,
    solver: &'a SolverReport,
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

enum Failure {
    Usage(String),
    Runtime(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => fit(&a),
        Command::Experiment { spec } => experiment(&spec),
        Command::Verify(a) => verify(&a),
        Command::Gen(a) => gen(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
        Err(Failure::Verify) => EXIT_VERIFY,
    }
}

fn fit_budgets(a: &FitArgs) -> Outcome<Vec<SparsityBudget>> {
    if a.r == 0 {
        return Err(Failure::Usage("--r must be at least 1".into()));
    }
    let ts = match a.budgets.len() {
        1 => vec![a.budgets[0]; a.r],
        k if k == a.r => a.budgets.clone(),
        k => {
            return Err(Failure::Usage(format!("--budgets has {k} values for --r {}", a.r)));
        }
    };
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Failure::Usage(format!("infeasible budget {t}: every budget must be >= 1")));
        }
        let b = SparsityBudget { norm: a.norm, t, nonnegative: false };
        out.push(if a.nonneg { b.nonnegative() } else { b });
    }
    Ok(out)
}

fn fit(a: &FitArgs) -> Outcome {
    let budgets = fit_budgets(a)?;
    let cfg = SolverConfig {
        tol: a.tol,
        max_sweeps: a.max_sweeps,
        seed: a.seed,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let raw = io::read_matrix(&a.matrix)?;
    let mut x = center_columns(&raw.values)?;
    if a.standardize {
        x = x.standardized();
    }
    if a.r > x.n().min(x.d()) {
        return Err(Failure::Usage(format!(
            "--r {} exceeds min(n, d) = {}",
            a.r,
            x.n().min(x.d())
        )));
    }
    let (factors, report) = solver::fit(&x, &budgets, &cfg)?;
    let eval = evaluate(&x, &factors.v)?;
    let supports: Vec<Vec<usize>> = factors
        .supports()
        .into_iter()
        .map(|s| s.into_iter().map(|i| i + 1).collect())
        .collect();

    println!("rre {:.6}", eval.rre);
    println!("pev {:.4}", eval.pev);
    for (i, (card, s)) in eval.per_component_cardinality.iter().zip(&supports).enumerate() {
        let list: Vec<String> = s.iter().map(|j| j.to_string()).collect();
        println!("component {}: cardinality {card}, support {{{}}}", i + 1, list.join(","));
    }
    println!("sweeps {} ({:?})", report.sweeps_run, report.termination);

    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let names = |prefix: &str| (1..=a.r).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        io::write_matrix(dir.join("V.csv"), &factors.v, Some(&names("v")))?;
        io::write_matrix(dir.join("U.csv"), &factors.u, Some(&names("u")))?;
        let rep = FitReport {
            norm: a.norm,
            budgets: &a.budgets,
            nonnegative: a.nonneg,
            standardized: a.standardize,
            rre: eval.rre,
            pev: eval.pev,
            cardinalities: eval.per_component_cardinality.clone(),
            supports,
            solver: &report,
        };
        let path = dir.join("report.json");
        let json = serde_json::to_string_pretty(&rep).map_err(Error::from)?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn experiment(path: &Path) -> Outcome {
    let spec = ExperimentSpec::read(path)?;
    spec.validate().map_err(|e| match e {
        Error::InvalidConfig(_) | Error::InfeasibleBudget(_) => Failure::Usage(e.to_string()),
        other => Failure::Runtime(other),
    })?;
    let out = run_experiment(&spec)?;
    println!("sample_size,replicates,successes,rre_mean,pev_mean");
    for row in &out.summary {
        let successes = row.successes.map(|s| s.to_string()).unwrap_or_default();
        println!(
            "{},{},{},{:.6},{:.4}",
            row.sample_size, row.replicates, successes, row.rre_mean, row.pev_mean
        );
    }
    println!("wrote {}", out.summary_path.display());
    Ok(())
}

fn verify(a: &VerifyArgs) -> Outcome {
    let cfg = VerifyConfig {
        cases: a.cases,
        dim_max: a.dim_max,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let suites = run_all(&cfg)?;
    let mut ok = true;
    for s in &suites {
        let status = if s.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {}: {} cases, {} failures, max gap {:e}",
            s.name, s.cases, s.failures, s.max_gap
        );
        if let Some(f) = &s.first_failure {
            println!("  first failure: {f}");
        }
        ok &= s.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn gen(a: &GenArgs) -> Outcome {
    let x = match a.dataset {
        Dataset::Hastie => gen_hastie(a.n, a.seed)?.x,
        Dataset::Toy => sample_gaussian(&ToySpec::signed(a.seed), a.n, a.seed)?,
        Dataset::Nntoy => sample_gaussian(&ToySpec::nonnegative(a.seed), a.n, a.seed)?,
    };
    let header: Vec<String> = (1..=x.d()).map(|j| format!("x{j}")).collect();
    io::write_matrix(&a.out, x.values(), Some(&header))?;
    Ok(())
}
