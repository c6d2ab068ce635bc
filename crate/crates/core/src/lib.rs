//! Finite-volume solver for the five-equation (Kapila) two-phase flow model built on an
//! acoustic generalized Riemann problem flux and a Crank–Nicolson volume-fraction update.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod eos;
pub mod error;
pub mod grp;
pub mod io;
pub mod quadrature;
pub mod reconstruction;
pub mod riemann;
pub mod scheme;

pub use eos::{
    conserved_to_primitive, phase_sound_speed, primitive_to_conserved, wood_sound_speed,
    ConservedState, PrimitiveState, StiffenedGas, TwoPhaseEos,
};
pub use error::{Phase, SolverError};
pub use grp::{solve_grp, CharacteristicSystem, GrpResult, SlopeSet};
pub use io::{run, IoError, RunConfig, RunError, Snapshot};
pub use reconstruction::{minmod3, CellLinearData, ReconstructionConfig};
pub use riemann::{solve_exact, Wave, WaveFan};
pub use scheme::{
    step, Boundaries, Boundary, FieldState, Grid, SchemeConfig, StepReport, VacuumGuard,
};
