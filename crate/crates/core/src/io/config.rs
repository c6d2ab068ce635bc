//! Run configuration: a flat `key = value` text format whose entries can be overridden
//! one by one from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::cases::{
    build_example, riemann_problem, CaseId, CaseOptions, ProblemSpec, RiemannSetup,
};
use crate::eos::{PrimitiveState, StiffenedGas, TwoPhaseEos};

/// Column delimiter of snapshot files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Tsv,
}

impl OutputFormat {
    pub fn delimiter(self) -> char {
        match self {
            OutputFormat::Csv => ',',
            OutputFormat::Tsv => '\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Tsv => "tsv",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = IoError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "tsv" => Ok(OutputFormat::Tsv),
            other => Err(IoError::Config(format!(
                "unknown output format '{other}' (csv, tsv)"
            ))),
        }
    }
}

/// Which problem to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProblemSource {
    Example(CaseId),
    /// A user-defined one-dimensional Riemann problem.
    Custom,
}

/// Data of a user-defined Riemann problem. Every field must be set when the source is
/// [`ProblemSource::Custom`] except `x0` (domain midpoint) and `domain` (`[0, 1]`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CustomRiemann {
    pub phase1: Option<StiffenedGas>,
    pub phase2: Option<StiffenedGas>,
    pub left: Option<PrimitiveState>,
    pub right: Option<PrimitiveState>,
    pub x0: Option<f64>,
    pub domain: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub custom: CustomRiemann,
    pub cells: Option<usize>,
    pub cells_y: Option<usize>,
    pub full_domain: bool,
    pub cfl: Option<f64>,
    pub kappa: Option<f64>,
    pub c_im: Option<f64>,
    pub end_time: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    /// Size of the worker pool; `None` uses the global pool.
    pub workers: Option<usize>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: ProblemSource::Example(CaseId::TwoPhaseTube),
            custom: CustomRiemann::default(),
            cells: None,
            cells_y: None,
            full_domain: false,
            cfl: None,
            kappa: None,
            c_im: None,
            end_time: None,
            snapshot_times: None,
            output_dir: PathBuf::from("out"),
            workers: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Keys understood by [`RunConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "case",
    "cells",
    "cells_y",
    "full_domain",
    "cfl",
    "kappa",
    "c_im",
    "end_time",
    "snapshots",
    "output",
    "workers",
    "format",
    "phase1",
    "phase2",
    "left",
    "right",
    "x0",
    "domain",
];

impl RunConfig {
    pub fn for_case(id: CaseId) -> Self {
        Self {
            source: ProblemSource::Example(id),
            ..Self::default()
        }
    }

    /// Parses configuration text. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| IoError::Parse {
                line: n + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| IoError::Parse {
                    line: n + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Applies an override written as `key=value`.
    pub fn apply_override(&mut self, item: &str) -> Result<(), IoError> {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            IoError::Config(format!("override '{item}' is not of the form key=value"))
        })?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), IoError> {
        match key {
            "case" => {
                self.source = if value.eq_ignore_ascii_case("custom") {
                    ProblemSource::Custom
                } else {
                    ProblemSource::Example(
                        value
                            .parse()
                            .map_err(|e: crate::SolverError| IoError::Config(e.to_string()))?,
                    )
                }
            }
            "cells" => self.cells = Some(parse_num(key, value)?),
            "cells_y" => self.cells_y = Some(parse_num(key, value)?),
            "full_domain" => self.full_domain = parse_num(key, value)?,
            "cfl" => self.cfl = Some(parse_num(key, value)?),
            "kappa" => self.kappa = Some(parse_num(key, value)?),
            "c_im" => self.c_im = Some(parse_num(key, value)?),
            "end_time" => self.end_time = Some(parse_num(key, value)?),
            "snapshots" => self.snapshot_times = Some(parse_list(key, value)?),
            "output" => self.output_dir = PathBuf::from(value),
            "workers" => {
                let n: usize = parse_num(key, value)?;
                if n == 0 {
                    return Err(IoError::Config("workers must be at least 1".into()));
                }
                self.workers = Some(n);
            }
            "format" => self.format = value.parse()?,
            "phase1" => self.custom.phase1 = Some(parse_gas(key, value)?),
            "phase2" => self.custom.phase2 = Some(parse_gas(key, value)?),
            "left" => self.custom.left = Some(parse_state(key, value)?),
            "right" => self.custom.right = Some(parse_state(key, value)?),
            "x0" => self.custom.x0 = Some(parse_num(key, value)?),
            "domain" => match parse_list(key, value)?.as_slice() {
                &[a, b] => self.custom.domain = Some((a, b)),
                _ => {
                    return Err(IoError::Config(
                        "domain expects two numbers: x_min, x_max".into(),
                    ))
                }
            },
            other => {
                return Err(IoError::Config(format!(
                    "unknown key '{other}'; known keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Builds the problem with all overrides applied and validated.
    pub fn build_spec(&self) -> Result<ProblemSpec, IoError> {
        let mut spec = match self.source {
            ProblemSource::Example(id) => {
                let opts = CaseOptions {
                    cells: self.cells,
                    cells_y: self.cells_y,
                    full_domain: self.full_domain,
                };
                build_example(id, &opts)?
            }
            ProblemSource::Custom => self.custom_spec()?,
        };
        if let Some(cfl) = self.cfl {
            spec.cfl = cfl;
        }
        if let Some(kappa) = self.kappa {
            spec.kappa = kappa;
        }
        if let Some(c_im) = self.c_im {
            spec.c_im = c_im;
        }
        if let Some(t) = self.end_time {
            spec.end_time = t;
            spec.snapshot_times.retain(|&s| s <= t);
            if spec.snapshot_times.last() != Some(&t) {
                spec.snapshot_times.push(t);
            }
        }
        if let Some(times) = &self.snapshot_times {
            spec.snapshot_times = times.clone();
        }
        spec.validate()?;
        Ok(spec)
    }

    fn custom_spec(&self) -> Result<ProblemSpec, IoError> {
        let c = &self.custom;
        let missing = |what: &str| IoError::Config(format!("custom problem needs '{what}'"));
        let eos = TwoPhaseEos::new(
            c.phase1.ok_or_else(|| missing("phase1"))?,
            c.phase2.ok_or_else(|| missing("phase2"))?,
        );
        let domain = c.domain.unwrap_or((0.0, 1.0));
        let setup = RiemannSetup {
            left: c.left.ok_or_else(|| missing("left"))?,
            right: c.right.ok_or_else(|| missing("right"))?,
            x0: c.x0.unwrap_or(0.5 * (domain.0 + domain.1)),
        };
        let end = self.end_time.ok_or_else(|| missing("end_time"))?;
        Ok(riemann_problem(
            "custom",
            eos,
            setup,
            self.cells.unwrap_or(200),
            domain,
            end,
        )?)
    }
}

impl fmt::Display for RunConfig {
    /// Writes the configuration back in the text format accepted by [`RunConfig::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.source {
            ProblemSource::Example(id) => writeln!(f, "case = {id}")?,
            ProblemSource::Custom => writeln!(f, "case = custom")?,
        }
        let c = &self.custom;
        for (k, g) in [("phase1", c.phase1), ("phase2", c.phase2)] {
            if let Some(g) = g {
                writeln!(f, "{k} = {:e}, {:e}", g.gamma, g.pi)?;
            }
        }
        for (k, w) in [("left", c.left), ("right", c.right)] {
            if let Some(w) = w {
                writeln!(f, "{k} = {}", format_state(&w))?;
            }
        }
        if let Some(x0) = c.x0 {
            writeln!(f, "x0 = {x0:e}")?;
        }
        if let Some((a, b)) = c.domain {
            writeln!(f, "domain = {a:e}, {b:e}")?;
        }
        if let Some(n) = self.cells {
            writeln!(f, "cells = {n}")?;
        }
        if let Some(n) = self.cells_y {
            writeln!(f, "cells_y = {n}")?;
        }
        writeln!(f, "full_domain = {}", self.full_domain)?;
        for (k, v) in [
            ("cfl", self.cfl),
            ("kappa", self.kappa),
            ("c_im", self.c_im),
            ("end_time", self.end_time),
        ] {
            if let Some(v) = v {
                writeln!(f, "{k} = {v:e}")?;
            }
        }
        if let Some(t) = &self.snapshot_times {
            let list: Vec<String> = t.iter().map(|x| format!("{x:e}")).collect();
            writeln!(f, "snapshots = {}", list.join(", "))?;
        }
        writeln!(f, "output = {}", self.output_dir.display())?;
        if let Some(w) = self.workers {
            writeln!(f, "workers = {w}")?;
        }
        writeln!(f, "format = {}", self.format.extension())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, IoError> {
    value
        .trim()
        .parse()
        .map_err(|_| IoError::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, IoError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_gas(key: &str, value: &str) -> Result<StiffenedGas, IoError> {
    match parse_list(key, value)?.as_slice() {
        &[gamma, pi] => Ok(StiffenedGas::new(gamma, pi)?),
        _ => Err(IoError::Config(format!("'{key}' expects gamma, pi"))),
    }
}

/// Parses a state written as `alpha1, rho1, rho2, u, p`.
pub fn parse_state(key: &str, value: &str) -> Result<PrimitiveState, IoError> {
    match parse_list(key, value)?.as_slice() {
        &[alpha1, rho1, rho2, u, p] => {
            if !(0.0..=1.0).contains(&alpha1) || !(rho1 > 0.0 && rho2 > 0.0) {
                return Err(IoError::Config(format!(
                    "'{key}': need alpha1 in [0, 1] and positive phase densities"
                )));
            }
            Ok(PrimitiveState::from_phase_densities(
                alpha1, rho1, rho2, u, 0.0, p,
            ))
        }
        _ => Err(IoError::Config(format!(
            "'{key}' expects alpha1, rho1, rho2, u, p"
        ))),
    }
}

/// Inverse of [`parse_state`].
pub fn format_state(w: &PrimitiveState) -> String {
    let rho1 = if w.alpha1 > 0.0 {
        w.zeta1 * w.rho / w.alpha1
    } else {
        w.rho
    };
    let rho2 = if w.alpha1 < 1.0 {
        (1.0 - w.zeta1) * w.rho / (1.0 - w.alpha1)
    } else {
        w.rho
    };
    format!(
        "{:e}, {:e}, {:e}, {:e}, {:e}",
        w.alpha1, rho1, rho2, w.u, w.p
    )
}
