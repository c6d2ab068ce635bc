use serde::{Deserialize, Serialize};

use crate::eos::{
    conserved_to_primitive, primitive_to_conserved, ConservedState, PrimitiveState, TwoPhaseEos,
};
use crate::error::SolverError;
use crate::reconstruction::Prim6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Transmissive,
    Reflective,
}

impl std::str::FromStr for Boundary {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "transmissive" => Ok(Boundary::Transmissive),
            "reflective" => Ok(Boundary::Reflective),
            other => Err(SolverError::Config(format!(
                "unknown boundary kind '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: Boundary,
    pub right: Boundary,
    pub bottom: Boundary,
    pub top: Boundary,
}

impl Boundaries {
    pub fn all(kind: Boundary) -> Self {
        Self {
            left: kind,
            right: kind,
            bottom: kind,
            top: kind,
        }
    }
}

/// Uniform Cartesian grid. One-dimensional grids have `ny == 1` and no y-faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
    pub two_d: bool,
    pub bc: Boundaries,
}

impl Grid {
    pub fn new_1d(
        nx: usize,
        x0: f64,
        x1: f64,
        left: Boundary,
        right: Boundary,
    ) -> Result<Self, SolverError> {
        if nx < 4 || !(x1 > x0) {
            return Err(SolverError::Config(format!(
                "invalid 1D grid: nx = {nx}, [{x0}, {x1}]"
            )));
        }
        if (left == Boundary::Periodic) != (right == Boundary::Periodic) {
            return Err(SolverError::Config(
                "periodic boundaries must be paired".into(),
            ));
        }
        let dx = (x1 - x0) / nx as f64;
        Ok(Self {
            nx,
            ny: 1,
            dx,
            dy: dx,
            x0,
            y0: 0.0,
            two_d: false,
            bc: Boundaries {
                left,
                right,
                bottom: Boundary::Transmissive,
                top: Boundary::Transmissive,
            },
        })
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
        bc: Boundaries,
    ) -> Result<Self, SolverError> {
        if nx < 4 || ny < 4 || !(x1 > x0) || !(y1 > y0) {
            return Err(SolverError::Config(format!("invalid 2D grid {nx} x {ny}")));
        }
        if (bc.left == Boundary::Periodic) != (bc.right == Boundary::Periodic)
            || (bc.bottom == Boundary::Periodic) != (bc.top == Boundary::Periodic)
        {
            return Err(SolverError::Config(
                "periodic boundaries must be paired".into(),
            ));
        }
        Ok(Self {
            nx,
            ny,
            dx: (x1 - x0) / nx as f64,
            dy: (y1 - y0) / ny as f64,
            x0,
            y0,
            two_d: true,
            bc,
        })
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy
    }

    pub fn cell_volume(&self) -> f64 {
        if self.two_d {
            self.dx * self.dy
        } else {
            self.dx
        }
    }

    /// Number of x-normal faces (`(nx + 1) * ny`), indexed `j * (nx + 1) + f`.
    pub fn x_faces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    /// Number of y-normal faces (`nx * (ny + 1)`, zero in 1D), indexed `f * nx + i`.
    pub fn y_faces(&self) -> usize {
        if self.two_d {
            self.nx * (self.ny + 1)
        } else {
            0
        }
    }
}

/// Cell averages at one time level, plus the evolved interface values of the last step
/// used by the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub cells: Vec<ConservedState>,
    pub t: f64,
    pub steps: usize,
    pub hats_x: Option<Vec<Prim6>>,
    pub hats_y: Option<Vec<Prim6>>,
}

impl FieldState {
    pub fn from_primitive<F>(grid: &Grid, eos: &TwoPhaseEos, init: F) -> Result<Self, SolverError>
    where
        F: Fn(f64, f64) -> PrimitiveState,
    {
        let mut cells = Vec::with_capacity(grid.cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let y = if grid.two_d { grid.y_center(j) } else { 0.0 };
                let w = init(grid.x_center(i), y);
                w.validate(eos).map_err(|e| SolverError::StepFailure {
                    cell: grid.index(i, j),
                    reason: format!("initial state: {e}"),
                })?;
                cells.push(primitive_to_conserved(&w, eos));
            }
        }
        Ok(Self {
            cells,
            t: 0.0,
            steps: 0,
            hats_x: None,
            hats_y: None,
        })
    }

    pub fn primitives(&self, eos: &TwoPhaseEos) -> Result<Vec<PrimitiveState>, SolverError> {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, q)| {
                conserved_to_primitive(q, eos).map_err(|e| SolverError::StepFailure {
                    cell: k,
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    /// Domain totals of `(zeta1 rho, rho, rho u, rho v, rho E)`.
    pub fn totals(&self, grid: &Grid) -> [f64; 5] {
        let vol = grid.cell_volume();
        let mut sum = [0.0; 5];
        for q in &self.cells {
            for (s, x) in sum.iter_mut().zip([q.zr, q.rho, q.mx, q.my, q.en]) {
                *s += x * vol;
            }
        }
        sum
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        self.cells
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                (lo.min(q.alpha1), hi.max(q.alpha1))
            })
    }
}
