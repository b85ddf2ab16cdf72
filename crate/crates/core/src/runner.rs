//! Executes a [`RunConfig`] and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentId, RunConfig};
use crate::experiments::{
    biased_census_report, biased_ratio, birkhoff_experiment, nonminimal_experiment, thm1_experiment,
    thm3_experiment, BirkhoffParams, ExperimentError, ExperimentReport, NonminimalParams, Thm1Params,
    Thm3Params,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Experiment(e) if e.is_budget() => EXIT_BUDGET,
            RunError::Experiment(ExperimentError::InvalidParameter(_)) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_CONFIG => "config",
            EXIT_BUDGET => "budget-exceeded",
            _ => match self {
                RunError::Io { .. } => "io",
                _ => "experiment",
            },
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        json!({"error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string()}).to_string()
    }
}

/// The report of a run and the files written.
#[derive(Debug)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub files: Vec<PathBuf>,
}

/// Runs the configured experiment on a pool capped at `config.threads`.
pub fn run(config: &RunConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    with_threads(config.threads, || run_validated(config))
}

/// Runs `f` on a dedicated pool when a thread cap is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn run_validated(config: &RunConfig) -> Result<RunOutput, RunError> {
    let mut census_csv = None;
    let report = match config.experiment {
        ExperimentId::Thm1 => thm1_experiment(&Thm1Params {
            d: config.d,
            num_points: config.n,
            t: config.t,
            a: config.direction_set()?,
            norm: config.norm,
            c: config.c,
            seed: config.seed,
        })?,
        ExperimentId::Birkhoff => birkhoff_experiment(&BirkhoffParams {
            d: config.d,
            num_lattices: config.num_lattices,
            n_max: config.shells(),
            c: config.c,
            a: config.a.as_ref().map(|_| config.direction_set()).transpose()?,
            norm: config.norm,
            seed: config.seed,
        })?,
        ExperimentId::Thm3 => thm3_experiment(&Thm3Params {
            d: config.d,
            c: config.c,
            eps: config.eps,
            t_grid: config.t_grid.clone(),
            m: config.m,
            a: config.direction_set()?,
            norm: config.norm,
            seed: config.seed,
            budget: config.budget,
        })?,
        ExperimentId::BiasedCensus => {
            let (report, census) = biased_census_report(config.census_depth(), config.census_mode)?;
            let mut buf = Vec::new();
            census
                .write_csv(&mut buf)
                .map_err(|e| ExperimentError::InvalidParameter(e.to_string()))?;
            census_csv = Some(buf);
            report
        }
        ExperimentId::BiasedRatio => biased_ratio(&config.thresholds, &config.direction_set()?, config.eps)?,
        ExperimentId::Nonminimal => nonminimal_experiment(&NonminimalParams {
            d: config.d,
            x_base: config.x_base.clone(),
            t: config.t,
            q_min: config.q_min,
            c: config.c,
            norm: config.norm,
        })?,
    };
    let mut files = Vec::new();
    if let Some(dir) = &config.out {
        let name = config.experiment.name();
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let json_path = dir.join(format!("{name}.json"));
        write(&json_path, report.to_json().as_bytes())?;
        files.push(json_path);
        let csv = match census_csv {
            Some(buf) => buf,
            None => records_csv(&report.records).map_err(|e| io_err(dir, e))?,
        };
        let csv_path = dir.join(format!("{name}.csv"));
        write(&csv_path, &csv)?;
        files.push(csv_path);
    }
    Ok(RunOutput { report, files })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Flattens the scalar fields of JSON records into CSV; arrays are joined
/// with `;`, nested objects skipped.
pub fn records_csv(records: &[Value]) -> Result<Vec<u8>, csv::Error> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let Some(first) = records.first().and_then(Value::as_object) else {
        return Ok(out.into_inner().map_err(|e| e.into_error())?);
    };
    let keys: Vec<&String> = first.iter().filter(|(_, v)| !v.is_object()).map(|(k, _)| k).collect();
    out.write_record(keys.iter().map(|k| k.as_str()))?;
    for rec in records {
        let row = keys.iter().map(|k| cell(rec.get(k.as_str()).unwrap_or(&Value::Null)));
        out.write_record(row)?;
    }
    Ok(out.into_inner().map_err(|e| e.into_error())?)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeError;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::from(ConfigError::UnknownExperiment("x".into())).exit_code(), EXIT_CONFIG);
        let budget = ExperimentError::Lattice(LatticeError::CandidateBudgetExceeded { budget: 1 });
        assert_eq!(RunError::from(budget).exit_code(), EXIT_BUDGET);
        let other = ExperimentError::EmptyDenominator;
        let e = RunError::from(other);
        assert_eq!(e.exit_code(), EXIT_FAILURE);
        let v: Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "experiment");
    }

    #[test]
    fn census_run_writes_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            experiment: ExperimentId::BiasedCensus,
            nmax: Some(3),
            out: Some(dir.path().to_path_buf()),
            threads: Some(1),
            ..RunConfig::default()
        };
        let out = run(&config).unwrap();
        assert_eq!(out.files.len(), 2);
        let csv = fs::read_to_string(dir.path().join("biased-census.csv")).unwrap();
        assert!(csv.starts_with("n,r,m,q,p,in_R,sign"));
        let json = fs::read_to_string(dir.path().join("biased-census.json")).unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.canonical_json(), out.report.canonical_json());
    }

    #[test]
    fn budget_exhaustion_maps_to_exit_3() {
        let config = RunConfig {
            experiment: ExperimentId::Thm3,
            d: 2,
            t_grid: vec![6.0],
            m: 4,
            budget: 10,
            ..RunConfig::default()
        };
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_BUDGET, "{err}");
    }

    #[test]
    fn records_flatten() {
        let recs = vec![json!({"a": 1, "b": [1, 2], "c": {"x": 1}, "d": "s"})];
        let s = String::from_utf8(records_csv(&recs).unwrap()).unwrap();
        assert_eq!(s, "a,b,d\n1,1;2,s\n");
    }
}
