//! Run driver: configuration, snapshot and manifest output, golden-file comparison.

mod config;
mod snapshot;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{
    format_state, parse_state, CustomRiemann, OutputFormat, ProblemSource, RunConfig, CONFIG_KEYS,
};
pub use snapshot::{
    compare_golden, compare_snapshots, CompareReport, FieldDiff, Snapshot, SnapshotHeader,
    Tolerances,
};

use crate::cases::{
    entropy_errors, exact_cell_averages, simulate, CaseId, ConvergenceRow, EntropyErrors,
    ProblemSpec, RunSummary,
};
use crate::eos::PrimitiveState;
use crate::error::SolverError;
use crate::scheme::{FieldState, Grid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Failure of [`run`]. A solver failure carries the path of the dumped state, if it could
/// be written.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Setup(IoError),

    #[error("solver failed at t = {time:e}: {error}")]
    Solver {
        error: SolverError,
        time: f64,
        dump: Option<PathBuf>,
    },
}

/// Metrics recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Relative drift of the totals of `zeta1 rho, rho, rho u, rho v, rho E`.
    pub conservation_drift: [f64; 5],
    pub min_alpha: f64,
    pub max_alpha: f64,
    pub max_cn_residual: f64,
    /// L1 errors of `p, u, rho, alpha1` against exact cell averages.
    pub riemann_l1: Option<[f64; 4]>,
    pub entropy: Option<EntropyErrors>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub case: String,
    pub config: RunConfig,
    pub grid: Grid,
    pub eos: crate::eos::TwoPhaseEos,
    pub end_time: f64,
    pub cfl: f64,
    pub kappa: f64,
    pub c_im: f64,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<PathBuf>,
    pub status: String,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
    pub metrics: Option<RunMetrics>,
}

impl Manifest {
    fn new(config: &RunConfig, spec: &ProblemSpec) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            case: spec.name.clone(),
            config: config.clone(),
            grid: spec.grid,
            eos: spec.eos,
            end_time: spec.end_time,
            cfl: spec.cfl,
            kappa: spec.kappa,
            c_im: spec.c_im,
            snapshot_times: spec.snapshot_times.clone(),
            snapshots: Vec::new(),
            status: "running".into(),
            error: None,
            summary: None,
            metrics: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| IoError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub spec: ProblemSpec,
    pub state: FieldState,
    pub summary: RunSummary,
    pub metrics: RunMetrics,
    pub snapshots: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Runs `f` on a pool of `workers` threads, or on the global pool when `None`.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, IoError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| IoError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// Simulates the configured problem, writing a snapshot at every requested time (the
/// step is clipped to land on each exactly) and a `manifest.json`. On solver failure the
/// last accepted state is written to `failure.<ext>` and the manifest records the error.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let spec = config.build_spec().map_err(RunError::Setup)?;
    let dir = &config.output_dir;
    create_dir(dir).map_err(RunError::Setup)?;
    let ext = config.format.extension();
    let delim = config.format.delimiter();
    let manifest_path = dir.join("manifest.json");
    let mut manifest = Manifest::new(config, &spec);

    let mut state = spec
        .initial_state()
        .map_err(|e| RunError::Setup(e.into()))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut write_error: Option<IoError> = None;
    let result = with_workers(config.workers, || {
        simulate(
            &spec,
            &mut state,
            &spec.snapshot_times,
            |s| {
                let path = dir.join(format!("snapshot_{:03}.{ext}", written.len()));
                match Snapshot::from_state(&spec, s).write(&path, delim) {
                    Ok(()) => written.push(path),
                    Err(e) => write_error = Some(e),
                }
                Ok(())
            },
            |_, _| {},
        )
    })
    .map_err(RunError::Setup)?;
    if let Some(e) = write_error {
        return Err(RunError::Setup(e));
    }
    manifest.snapshots = written.clone();

    let summary = match result {
        Ok(s) => s,
        Err(error) => {
            let path = dir.join(format!("failure.{ext}"));
            let dump = Snapshot::from_state(&spec, &state)
                .write(&path, delim)
                .ok()
                .map(|_| path);
            manifest.status = "failed".into();
            manifest.error = Some(error.to_string());
            // The solver error is what gets reported; a manifest write failure is secondary.
            let _ = manifest.write(&manifest_path);
            return Err(RunError::Solver {
                error,
                time: state.t,
                dump,
            });
        }
    };

    let metrics = run_metrics(&spec, &state, &summary).map_err(|error| RunError::Solver {
        error,
        time: state.t,
        dump: None,
    })?;
    manifest.status = "ok".into();
    manifest.summary = Some(summary);
    manifest.metrics = Some(metrics.clone());
    manifest.write(&manifest_path).map_err(RunError::Setup)?;
    Ok(RunOutcome {
        spec,
        state,
        summary,
        metrics,
        snapshots: written,
        manifest: manifest_path,
    })
}

/// Conservation, bounds and, where a reference exists, error norms of a finished run.
pub fn run_metrics(
    spec: &ProblemSpec,
    state: &FieldState,
    summary: &RunSummary,
) -> Result<RunMetrics, SolverError> {
    let riemann_l1 = match spec.riemann {
        Some(_) => {
            let exact = exact_cell_averages(spec, state.t)?;
            let numerical = state.primitives(&spec.eos)?;
            Some(crate::cases::riemann_l1_errors(
                &numerical,
                &exact,
                spec.grid.dx,
            ))
        }
        None => None,
    };
    let entropy = match (spec.entropy, spec.id) {
        (Some(r), Some(CaseId::Accuracy)) => {
            Some(entropy_errors(state, &spec.grid, &r, &spec.eos)?)
        }
        _ => None,
    };
    Ok(RunMetrics {
        conservation_drift: summary.conservation_drift(),
        min_alpha: summary.min_alpha,
        max_alpha: summary.max_alpha,
        max_cn_residual: summary.max_cn_residual,
        riemann_l1,
        entropy,
    })
}

/// Exact solution of the Riemann problem of `spec`, sampled at the cell centres.
pub fn exact_profile(spec: &ProblemSpec, t: f64) -> Result<Snapshot, SolverError> {
    let g = &spec.grid;
    let prims: Vec<PrimitiveState> = (0..g.nx)
        .map(|i| crate::cases::exact_reference(spec, g.x_center(i), t))
        .collect::<Result<_, _>>()?;
    Ok(Snapshot::from_primitives(
        SnapshotHeader::new(spec, t),
        g,
        &prims,
        &spec.eos,
    ))
}

/// Convergence table as delimited text: `N` then each norm followed by its order.
pub fn convergence_table(rows: &[ConvergenceRow], delimiter: char) -> String {
    const NAMES: [&str; 6] = ["E1_L1", "E1_Linf", "E2_L1", "E2_Linf", "E_L1", "E_Linf"];
    let d = delimiter.to_string();
    let mut cols = vec!["N".to_string()];
    for n in NAMES {
        cols.push(n.to_string());
        cols.push(format!("{n}_order"));
    }
    let mut out = cols.join(&d) + "\n";
    for r in rows {
        let mut fields = vec![r.cells.to_string()];
        for (k, e) in r.errors.as_array().iter().enumerate() {
            fields.push(format!("{e:e}"));
            fields.push(r.orders.map_or(String::new(), |o| format!("{:.4}", o[k])));
        }
        out += &(fields.join(&d) + "\n");
    }
    out
}
