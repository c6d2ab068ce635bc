//! Slope-limited piecewise-linear reconstruction of `W = (zeta1, rho, u, v, p, alpha1)`.

use serde::{Deserialize, Serialize};

use crate::eos::{PrimitiveState, ALPHA_CUTOFF};
use crate::error::SolverError;
use crate::grp::SlopeSet;

/// Primitive vector `(zeta1, rho, u, v, p, alpha1)`.
pub type Prim6 = [f64; 6];

pub const IDX_U: usize = 2;
pub const IDX_V: usize = 3;
pub const IDX_ALPHA: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub kappa: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self { kappa: 1.5 }
    }
}

impl ReconstructionConfig {
    pub fn new(kappa: f64) -> Result<Self, SolverError> {
        if !(0.0..2.0).contains(&kappa) {
            return Err(SolverError::Config(format!(
                "kappa = {kappa} outside [0, 2)"
            )));
        }
        Ok(Self { kappa })
    }
}

pub fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Limited slope from the two one-sided differences and the difference of the evolved
/// interface values `hat_minus`, `hat_plus` on either side of the cell.
pub fn compute_slopes(
    w_im1: f64,
    w_i: f64,
    w_ip1: f64,
    hat_minus: f64,
    hat_plus: f64,
    config: &ReconstructionConfig,
    dx: f64,
) -> f64 {
    minmod3(
        (w_i - w_im1) / dx,
        config.kappa * (hat_plus - hat_minus) / dx,
        (w_ip1 - w_i) / dx,
    )
}

/// First-step slope: the central difference stands in for the interface values.
pub fn initial_slope(
    w_im1: f64,
    w_i: f64,
    w_ip1: f64,
    config: &ReconstructionConfig,
    dx: f64,
) -> f64 {
    minmod3(
        (w_i - w_im1) / dx,
        config.kappa * (w_ip1 - w_im1) / (2.0 * dx),
        (w_ip1 - w_i) / dx,
    )
}

/// Slopes of one line of cells. `centers` carries one neighbour at each end
/// (`centers.len() == n + 2`); `hats`, when present, holds the `n + 1` evolved interface
/// values of the line.
pub fn line_slopes(
    centers: &[Prim6],
    hats: Option<&[Prim6]>,
    config: &ReconstructionConfig,
    dx: f64,
) -> Vec<Prim6> {
    let n = centers.len() - 2;
    (0..n)
        .map(|i| {
            let (a, b, c) = (&centers[i], &centers[i + 1], &centers[i + 2]);
            std::array::from_fn(|k| match hats {
                Some(h) => compute_slopes(a[k], b[k], c[k], h[i][k], h[i + 1][k], config, dx),
                None => initial_slope(a[k], b[k], c[k], config, dx),
            })
        })
        .collect()
}

/// Reconstructed linear data of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellLinearData {
    pub center: Prim6,
    pub grad_x: Prim6,
    pub grad_y: Prim6,
}

impl CellLinearData {
    pub fn constant(center: Prim6) -> Self {
        Self {
            center,
            grad_x: [0.0; 6],
            grad_y: [0.0; 6],
        }
    }

    /// Scales the volume-fraction gradient so the value at every cell corner stays in
    /// `[ALPHA_CUTOFF, 1 - ALPHA_CUTOFF]`; cells already outside that band get no gradient.
    pub fn clamp_alpha(&mut self, dx: f64, dy: f64) {
        let a = self.center[IDX_ALPHA];
        let reach = 0.5 * (self.grad_x[IDX_ALPHA].abs() * dx + self.grad_y[IDX_ALPHA].abs() * dy);
        if reach == 0.0 {
            return;
        }
        let room = (a - ALPHA_CUTOFF).min(1.0 - ALPHA_CUTOFF - a).max(0.0);
        if reach > room {
            let s = room / reach;
            self.grad_x[IDX_ALPHA] *= s;
            self.grad_y[IDX_ALPHA] *= s;
        }
    }

    /// Value at the midpoint of the face at offset `sign * h / 2` along x (`axis = 0`) or
    /// y (`axis = 1`).
    pub fn face_value(&self, axis: usize, sign: f64, h: f64) -> PrimitiveState {
        let g = if axis == 0 {
            &self.grad_x
        } else {
            &self.grad_y
        };
        let w: Prim6 = std::array::from_fn(|k| self.center[k] + sign * 0.5 * h * g[k]);
        to_primitive(&w)
    }

    pub fn slope_set(&self) -> SlopeSet {
        SlopeSet {
            dv_dx: std::array::from_fn(|k| self.grad_x[k]),
            dv_dy: std::array::from_fn(|k| self.grad_y[k]),
            dalpha_dx: self.grad_x[IDX_ALPHA],
            dalpha_dy: self.grad_y[IDX_ALPHA],
        }
    }

    /// Image of the cell under reflection across a face normal to `axis`. With
    /// `negate_normal_velocity` the velocity component along `axis` changes sign
    /// (a wall); otherwise every field is even (a transmissive boundary).
    pub fn mirrored(&self, axis: usize, negate_normal_velocity: bool) -> Self {
        let normal_vel = if axis == 0 { IDX_U } else { IDX_V };
        let sign: Prim6 = std::array::from_fn(|k| {
            if negate_normal_velocity && k == normal_vel {
                -1.0
            } else {
                1.0
            }
        });
        let (gn, gt) = if axis == 0 {
            (&self.grad_x, &self.grad_y)
        } else {
            (&self.grad_y, &self.grad_x)
        };
        let normal: Prim6 = std::array::from_fn(|k| -sign[k] * gn[k]);
        let tangential: Prim6 = std::array::from_fn(|k| sign[k] * gt[k]);
        let center = std::array::from_fn(|k| sign[k] * self.center[k]);
        if axis == 0 {
            Self {
                center,
                grad_x: normal,
                grad_y: tangential,
            }
        } else {
            Self {
                center,
                grad_x: tangential,
                grad_y: normal,
            }
        }
    }
}

pub fn to_prim6(w: &PrimitiveState) -> Prim6 {
    [w.zeta1, w.rho, w.u, w.v, w.p, w.alpha1]
}

pub fn to_primitive(w: &Prim6) -> PrimitiveState {
    PrimitiveState {
        zeta1: w[0],
        rho: w[1],
        u: w[2],
        v: w[3],
        p: w[4],
        alpha1: w[5],
    }
}

/// First-step reconstruction of a 1D line given the cell centre values and one
/// neighbour at each end.
pub fn initial_reconstruction(
    centers: &[Prim6],
    config: &ReconstructionConfig,
    dx: f64,
) -> Vec<CellLinearData> {
    line_slopes(centers, None, config, dx)
        .into_iter()
        .zip(&centers[1..centers.len() - 1])
        .map(|(g, c)| {
            let mut cell = CellLinearData {
                center: *c,
                grad_x: g,
                grad_y: [0.0; 6],
            };
            cell.clamp_alpha(dx, 0.0);
            cell
        })
        .collect()
}
