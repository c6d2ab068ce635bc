use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kapila_core::cases::{convergence_study, CaseId};
use kapila_core::io::{
    compare_golden, convergence_table, exact_profile, run, with_workers, IoError, ProblemSource,
    RunConfig, RunError, Tolerances,
};
use kapila_core::SolverError;

/// Two-phase compressible flow solver (five-equation model, acoustic GRP fluxes).
#[derive(Parser)]
#[command(name = "kapila", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark case or a configuration file and write snapshots plus a manifest.
    Run(RunArgs),
    /// Sample the exact Riemann solution on a grid and write it as a snapshot.
    Riemann(RiemannArgs),
    /// Entropy-error convergence table of the smooth accuracy case.
    Convergence(ConvergenceArgs),
    /// Compare a snapshot with a golden file field by field.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Case: 1, 2, 2a, 3, 4, 5, 6, a case name, or `custom`.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    cells_y: Option<usize>,
    /// Two-dimensional cases: solve on the whole domain instead of the upper half.
    #[arg(long)]
    full_domain: bool,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    c_im: Option<f64>,
    #[arg(long)]
    end_time: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    snapshots: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// csv or tsv.
    #[arg(long)]
    format: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run a convergence study over these comma-separated resolutions instead.
    #[arg(long, value_name = "N,N,...")]
    convergence: Option<String>,
    /// Write the exact Riemann solution instead of simulating (see `riemann`).
    #[arg(long)]
    riemann: bool,
    #[arg(long, requires = "riemann")]
    left: Option<String>,
    #[arg(long, requires = "riemann")]
    right: Option<String>,
    #[arg(long, requires = "riemann")]
    time: Option<f64>,
}

#[derive(Args)]
struct RiemannArgs {
    /// Take the left/right data and materials of a benchmark case.
    #[arg(long, conflicts_with_all = ["left", "right"])]
    case: Option<String>,
    /// Left state: alpha1, rho1, rho2, u, p.
    #[arg(long, allow_hyphen_values = true)]
    left: Option<String>,
    /// Right state: alpha1, rho1, rho2, u, p.
    #[arg(long, allow_hyphen_values = true)]
    right: Option<String>,
    /// Stiffened gas of phase 1: gamma, pi.
    #[arg(long, default_value = "4.4, 6e8")]
    phase1: String,
    /// Stiffened gas of phase 2: gamma, pi.
    #[arg(long, default_value = "1.4, 0")]
    phase2: String,
    #[arg(long)]
    x0: Option<f64>,
    /// x_min, x_max.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    time: f64,
    #[arg(long)]
    cells: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Comma-separated resolutions.
    #[arg(long, default_value = "20,40,80,160,320,640")]
    cells: String,
    #[arg(long, default_value_t = 0.5)]
    c_im: f64,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    snapshot: PathBuf,
    golden: PathBuf,
    /// Tolerance relative to the largest golden magnitude of each field.
    #[arg(long, default_value_t = 1e-6)]
    rel: f64,
    /// Absolute tolerance added to the relative one.
    #[arg(long, default_value_t = 0.0)]
    abs: f64,
}

/// Exit status: 0 success, 1 solver failure or failed comparison, 2 usage or input error.
enum Failure {
    Solver(String),
    Usage(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Solver(
                s @ (SolverError::Config(_)
                | SolverError::UnknownCase(_)
                | SolverError::InvalidEos { .. }),
            ) => Failure::Usage(s.to_string()),
            IoError::Solver(s) => Failure::Solver(s.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Riemann(a) => cmd_riemann(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run_config(a: &RunArgs) -> Result<RunConfig, IoError> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(k, &v));
    set("case", a.case.clone())?;
    set("cells", a.cells.map(|v| v.to_string()))?;
    set("cells_y", a.cells_y.map(|v| v.to_string()))?;
    set("full_domain", a.full_domain.then(|| "true".into()))?;
    set("cfl", a.cfl.map(|v| v.to_string()))?;
    set("kappa", a.kappa.map(|v| v.to_string()))?;
    set("c_im", a.c_im.map(|v| v.to_string()))?;
    set("end_time", a.end_time.map(|v| v.to_string()))?;
    set("snapshots", a.snapshots.clone())?;
    set("output", a.output.as_ref().map(|p| p.display().to_string()))?;
    set("workers", a.workers.map(|v| v.to_string()))?;
    set("format", a.format.clone())?;
    for item in &a.overrides {
        cfg.apply_override(item)?;
    }
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    if let Some(list) = a.convergence {
        let case = a.case.as_deref().unwrap_or("1");
        if case.parse::<CaseId>().ok() != Some(CaseId::Accuracy) {
            return Err(Failure::Usage(
                "--convergence applies to case 1 only".into(),
            ));
        }
        return cmd_convergence(ConvergenceArgs {
            cells: list,
            c_im: a.c_im.unwrap_or(0.5),
            workers: a.workers,
            output: a.output,
        });
    }
    if a.riemann {
        let time = a
            .time
            .ok_or_else(|| Failure::Usage("--riemann needs --time".into()))?;
        return cmd_riemann(RiemannArgs {
            case: if a.left.is_none() { a.case } else { None },
            left: a.left,
            right: a.right,
            phase1: "4.4, 6e8".into(),
            phase2: "1.4, 0".into(),
            x0: None,
            domain: None,
            time,
            cells: a.cells,
            output: a.output,
        });
    }
    let cfg = run_config(&a)?;
    match run(&cfg) {
        Ok(out) => {
            let s = &out.summary;
            println!(
                "case {}: t = {:e} after {} steps ({} retries)",
                out.spec.name, s.time, s.steps, s.retries
            );
            println!(
                "alpha1 range [{:e}, {:e}], max CN residual {:e}",
                s.min_alpha, s.max_alpha, s.max_cn_residual
            );
            let d = out.metrics.conservation_drift;
            println!(
                "conservation drift (zeta1 rho, rho, rho E): {:e} {:e} {:e}",
                d[0], d[1], d[4]
            );
            if let Some(e) = out.metrics.riemann_l1 {
                println!(
                    "L1 error vs exact: p {:e}, u {:e}, rho {:e}, alpha1 {:e}",
                    e[0], e[1], e[2], e[3]
                );
            }
            if let Some(e) = out.metrics.entropy {
                println!(
                    "entropy L1 errors: water {:e}, air {:e}, mixture {:e}",
                    e.e1_l1, e.e2_l1, e.e_l1
                );
            }
            for p in &out.snapshots {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.manifest.display());
            Ok(())
        }
        // Anything that fails before the first step is a problem with the input.
        Err(RunError::Setup(e)) => Err(Failure::Usage(e.to_string())),
        Err(RunError::Solver { error, time, dump }) => {
            let dumped = dump.map_or(String::new(), |p| {
                format!("; last state written to {}", p.display())
            });
            Err(Failure::Solver(format!(
                "solver failed at t = {time:e}: {error}{dumped}"
            )))
        }
    }
}

fn cmd_riemann(a: RiemannArgs) -> Result<(), Failure> {
    let mut cfg = match &a.case {
        Some(case) => {
            let mut c = RunConfig::default();
            c.set("case", case)?;
            c
        }
        None => {
            let mut c = RunConfig {
                source: ProblemSource::Custom,
                ..RunConfig::default()
            };
            let left = a
                .left
                .as_deref()
                .ok_or_else(|| Failure::Usage("--left is required".into()))?;
            let right = a
                .right
                .as_deref()
                .ok_or_else(|| Failure::Usage("--right is required".into()))?;
            c.set("left", left)?;
            c.set("right", right)?;
            c.set("phase1", &a.phase1)?;
            c.set("phase2", &a.phase2)?;
            if let Some(x0) = a.x0 {
                c.set("x0", &x0.to_string())?;
            }
            if let Some(d) = &a.domain {
                c.set("domain", d)?;
            }
            c
        }
    };
    if a.time.is_nan() || a.time < 0.0 {
        return Err(Failure::Usage(format!(
            "time {} must be non-negative",
            a.time
        )));
    }
    cfg.end_time = Some(a.time.max(f64::MIN_POSITIVE));
    cfg.cells = a.cells.or(cfg.cells);
    let spec = cfg.build_spec()?;
    let snap = exact_profile(&spec, a.time).map_err(|e| Failure::Solver(e.to_string()))?;
    let text = snap.to_text(',');
    match a.output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(())
}

fn cmd_convergence(a: ConvergenceArgs) -> Result<(), Failure> {
    let cells: Vec<usize> = a
        .cells
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid resolution '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if cells.is_empty() {
        return Err(Failure::Usage("no resolutions given".into()));
    }
    let rows =
        with_workers(a.workers, || convergence_study(&cells, a.c_im))?.map_err(IoError::from)?;
    let text = convergence_table(&rows, ',');
    match a.output {
        Some(path) => std::fs::write(&path, &text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(())
}

/// Writes data to stdout. A reader that stops early (`| head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::{ErrorKind, Write};
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Failure::Usage(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let report = compare_golden(
        &a.snapshot,
        &a.golden,
        Tolerances {
            absolute: a.abs,
            relative: a.rel,
        },
    )?;
    println!("time difference {:e}", report.time_difference);
    for f in &report.fields {
        let mark = if f.pass { "ok" } else { "FAIL" };
        println!(
            "{:<8} L1 {:.3e}  Linf {:.3e}  limit {:.3e}  {mark}",
            f.name, f.l1, f.linf, f.limit
        );
    }
    if report.pass {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Solver(
            "snapshot differs from golden beyond tolerance".into(),
        ))
    }
}
