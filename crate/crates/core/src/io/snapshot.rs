//! Snapshot files: delimited text with a `#`-commented header, one row per cell in
//! row-major order (`x` fastest).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::cases::ProblemSpec;
use crate::eos::{conserved_to_primitive, wood_sound_speed, PrimitiveState, TwoPhaseEos};
use crate::scheme::{FieldState, Grid};

const COLUMNS_1D: [&str; 9] = ["x", "zeta1", "rho", "u", "p", "alpha1", "rho1", "rho2", "c"];
const COLUMNS_2D: [&str; 11] = [
    "x", "y", "zeta1", "rho", "u", "v", "p", "alpha1", "rho1", "rho2", "c",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub case: String,
    pub time: f64,
    pub nx: usize,
    pub ny: usize,
    pub cfl: f64,
    pub kappa: f64,
    pub c_im: f64,
    pub version: String,
}

impl SnapshotHeader {
    pub fn new(spec: &ProblemSpec, time: f64) -> Self {
        Self {
            case: spec.name.clone(),
            time,
            nx: spec.grid.nx,
            ny: if spec.grid.two_d { spec.grid.ny } else { 1 },
            cfl: spec.cfl,
            kappa: spec.kappa,
            c_im: spec.c_im,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Column-major table of cell values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Snapshot {
    /// Tabulates primitive cell values together with the derived phase densities and the
    /// mixture sound speed. Empty (zero-density) cells get zero derived values.
    pub fn from_primitives(
        header: SnapshotHeader,
        grid: &Grid,
        cells: &[PrimitiveState],
        eos: &TwoPhaseEos,
    ) -> Self {
        let names: &[&str] = if grid.two_d { &COLUMNS_2D } else { &COLUMNS_1D };
        let mut data = vec![Vec::with_capacity(cells.len()); names.len()];
        for (k, w) in cells.iter().enumerate() {
            let (i, j) = (k % grid.nx, k / grid.nx);
            let (rho1, rho2, c) = derived(w, eos);
            let row: Vec<f64> = if grid.two_d {
                vec![
                    grid.x_center(i),
                    grid.y_center(j),
                    w.zeta1,
                    w.rho,
                    w.u,
                    w.v,
                    w.p,
                    w.alpha1,
                    rho1,
                    rho2,
                    c,
                ]
            } else {
                vec![
                    grid.x_center(i),
                    w.zeta1,
                    w.rho,
                    w.u,
                    w.p,
                    w.alpha1,
                    rho1,
                    rho2,
                    c,
                ]
            };
            for (col, v) in data.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self {
            header,
            columns: names.iter().map(|s| s.to_string()).collect(),
            data,
        }
    }

    /// Snapshot of a solver state. Cells whose conserved values do not decode are written
    /// as NaN, so that a failed run can still be dumped for inspection.
    pub fn from_state(spec: &ProblemSpec, state: &FieldState) -> Self {
        let nan = PrimitiveState {
            zeta1: f64::NAN,
            rho: f64::NAN,
            u: f64::NAN,
            v: f64::NAN,
            p: f64::NAN,
            alpha1: f64::NAN,
        };
        let prims: Vec<PrimitiveState> = state
            .cells
            .iter()
            .map(|q| conserved_to_primitive(q, &spec.eos).unwrap_or(nan))
            .collect();
        Self::from_primitives(
            SnapshotHeader::new(spec, state.t),
            &spec.grid,
            &prims,
            &spec.eos,
        )
    }

    pub fn rows(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|k| self.data[k].as_slice())
    }

    /// Serializes with the given delimiter. Floats are written in shortest round-trip form,
    /// so the text is a deterministic function of the values.
    pub fn to_text(&self, delimiter: char) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(out, "# case: {}", h.case);
        let _ = writeln!(out, "# time: {:e}", h.time);
        let _ = writeln!(out, "# grid: {} {}", h.nx, h.ny);
        let _ = writeln!(out, "# cfl: {:e}", h.cfl);
        let _ = writeln!(out, "# kappa: {:e}", h.kappa);
        let _ = writeln!(out, "# c_im: {:e}", h.c_im);
        let _ = writeln!(out, "# version: {}", h.version);
        out.push_str(&self.columns.join(&delimiter.to_string()));
        out.push('\n');
        for r in 0..self.rows() {
            for (k, col) in self.data.iter().enumerate() {
                if k > 0 {
                    out.push(delimiter);
                }
                let _ = write!(out, "{:e}", col[r]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path, delimiter: char) -> Result<(), IoError> {
        std::fs::write(path, self.to_text(delimiter)).map_err(|e| IoError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Parses snapshot text; the delimiter (comma or tab) is detected from the column row.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut header = SnapshotHeader {
            case: String::new(),
            time: f64::NAN,
            nx: 0,
            ny: 0,
            cfl: f64::NAN,
            kappa: f64::NAN,
            c_im: f64::NAN,
            version: String::new(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();
        while let Some((n, line)) = lines.next_if(|(_, l)| l.starts_with('#')) {
            let Some((key, value)) = line[1..].split_once(':') else {
                continue;
            };
            let value = value.trim();
            let bad = || IoError::Parse {
                line: n + 1,
                message: format!("invalid header value '{value}'"),
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
            match key.trim() {
                "case" => header.case = value.to_string(),
                "time" => header.time = num(value)?,
                "grid" => {
                    let mut it = value.split_whitespace().map(|s| s.parse::<usize>());
                    match (it.next(), it.next()) {
                        (Some(Ok(nx)), Some(Ok(ny))) => (header.nx, header.ny) = (nx, ny),
                        _ => return Err(bad()),
                    }
                }
                "cfl" => header.cfl = num(value)?,
                "kappa" => header.kappa = num(value)?,
                "c_im" => header.c_im = num(value)?,
                "version" => header.version = value.to_string(),
                _ => {}
            }
        }
        let (_, names) = lines.next().ok_or(IoError::Parse {
            line: 0,
            message: "missing column row".into(),
        })?;
        let delimiter = if names.contains('\t') { '\t' } else { ',' };
        let columns: Vec<String> = names
            .split(delimiter)
            .map(|s| s.trim().to_string())
            .collect();
        let mut data = vec![Vec::new(); columns.len()];
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(delimiter).collect();
            if fields.len() != columns.len() {
                return Err(IoError::Parse {
                    line: n + 1,
                    message: format!("{} fields, expected {}", fields.len(), columns.len()),
                });
            }
            for (col, f) in data.iter_mut().zip(fields) {
                col.push(f.trim().parse().map_err(|_| IoError::Parse {
                    line: n + 1,
                    message: format!("bad number '{f}'"),
                })?);
            }
        }
        let snap = Self {
            header,
            columns,
            data,
        };
        if snap.header.nx * snap.header.ny != snap.rows() {
            return Err(IoError::Shape(format!(
                "header grid {}x{} does not match {} rows",
                snap.header.nx,
                snap.header.ny,
                snap.rows()
            )));
        }
        Ok(snap)
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }
}

fn derived(w: &PrimitiveState, eos: &TwoPhaseEos) -> (f64, f64, f64) {
    if !(w.rho > 0.0) {
        return if w.rho == 0.0 {
            (0.0, 0.0, 0.0)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
    }
    let rho1 = if w.alpha1 > 0.0 {
        w.zeta1 * w.rho / w.alpha1
    } else {
        0.0
    };
    let rho2 = if w.alpha1 < 1.0 {
        w.zeta2() * w.rho / w.alpha2()
    } else {
        0.0
    };
    (rho1, rho2, wood_sound_speed(w, eos).unwrap_or(f64::NAN))
}

/// Accepted deviation per field: `linf <= absolute + relative * max|golden|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            absolute: 0.0,
            relative: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    pub name: String,
    /// Mean absolute difference.
    pub l1: f64,
    pub linf: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub time_difference: f64,
    pub fields: Vec<FieldDiff>,
    pub pass: bool,
}

/// Field-by-field comparison of `candidate` against `golden`. Snapshots of different
/// grids or column sets are a shape error, not a failed comparison.
pub fn compare_snapshots(
    candidate: &Snapshot,
    golden: &Snapshot,
    tol: Tolerances,
) -> Result<CompareReport, IoError> {
    let (c, g) = (&candidate.header, &golden.header);
    if (c.nx, c.ny) != (g.nx, g.ny) || candidate.rows() != golden.rows() {
        return Err(IoError::Shape(format!(
            "grid {}x{} vs golden {}x{}",
            c.nx, c.ny, g.nx, g.ny
        )));
    }
    if candidate.columns != golden.columns {
        return Err(IoError::Shape(format!(
            "columns {:?} vs golden {:?}",
            candidate.columns, golden.columns
        )));
    }
    let time_difference = (c.time - g.time).abs();
    let mut pass = time_difference <= 1e-12 * g.time.abs().max(1.0);
    let fields = candidate
        .columns
        .iter()
        .zip(candidate.data.iter().zip(&golden.data))
        .map(|(name, (a, b))| {
            let (mut sum, mut linf, mut scale) = (0.0f64, 0.0f64, 0.0f64);
            for (x, y) in a.iter().zip(b) {
                // Identical values, including NaN and infinities, are no difference.
                let d = if x.to_bits() == y.to_bits() {
                    0.0
                } else {
                    (x - y).abs()
                };
                let d = if d.is_nan() { f64::INFINITY } else { d };
                sum += d;
                linf = linf.max(d);
                if y.is_finite() {
                    scale = scale.max(y.abs());
                }
            }
            let limit = tol.absolute + tol.relative * scale;
            let ok = linf <= limit;
            pass &= ok;
            FieldDiff {
                name: name.clone(),
                l1: sum / a.len().max(1) as f64,
                linf,
                limit,
                pass: ok,
            }
        })
        .collect();
    Ok(CompareReport {
        time_difference,
        fields,
        pass,
    })
}

/// Reads both files and compares them.
pub fn compare_golden(
    snapshot: &Path,
    golden: &Path,
    tol: Tolerances,
) -> Result<CompareReport, IoError> {
    compare_snapshots(&Snapshot::read(snapshot)?, &Snapshot::read(golden)?, tol)
}
