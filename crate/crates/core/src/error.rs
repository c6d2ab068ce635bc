use std::fmt;

use thiserror::Error;

/// Phase index of a two-phase mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    Two,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::One => f.write_str("phase 1"),
            Phase::Two => f.write_str("phase 2"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("invalid stiffened gas parameters gamma = {gamma}, pi = {pi}")]
    InvalidEos { gamma: f64, pi: f64 },

    #[error("degenerate mixture EOS at alpha1 = {alpha1}")]
    DegenerateEos { alpha1: f64 },

    #[error("invalid {phase} state: p = {p}, rho = {rho}")]
    InvalidPhase { phase: Phase, p: f64, rho: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("shock jump conditions have no admissible solution: {0}")]
    InfeasibleJump(String),

    #[error("rarefaction reached the pressure floor {floor}")]
    CavitationLimit { floor: f64 },

    #[error("Riemann solver did not converge; pressure bracket [{lo}, {hi}]")]
    RiemannNonConvergence { lo: f64, hi: f64 },

    #[error("interface {index}: mid-time state is invalid ({reason})")]
    FluxFailure { index: usize, reason: String },

    #[error("volume fraction predictor {alpha_tilde} outside [0, {upper}]")]
    BoundViolation { alpha_tilde: f64, upper: f64 },

    #[error("volume fraction solve failed: {0}")]
    SourceSolve(String),

    #[error("no admissible time step at cell {cell}: {reason}")]
    TimeStep { cell: usize, reason: String },

    #[error("step failed at cell {cell}: {reason}")]
    StepFailure { cell: usize, reason: String },

    #[error("unknown example id {0}")]
    UnknownCase(String),

    #[error("configuration error: {0}")]
    Config(String),
}
