//! Finite-volume update: GRP mid-time fluxes, divergence estimates, the semi-implicit
//! volume-fraction solve and the bound-preserving time-step controller.

mod flux;
mod grid;
mod source;
mod step;

pub use flux::{compute_interface_flux, physical_flux, InterfaceRecord};
pub use grid::{Boundaries, Boundary, FieldState, Grid};
pub use source::{
    alpha_predictor, alpha_step_bounds, cn_alpha_update, omega, quadratic_bound, CnSolution,
    SourceUpdateState, CN_RESIDUAL_TOL,
};
pub use step::{
    divergence_estimates, step, timestep_bound, CellFaces, SchemeConfig, StepReport, VacuumGuard,
};
