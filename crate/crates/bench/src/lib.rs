//! Fixtures shared by the benchmarks in `benches/`.

use kapila_core::cases::{build_example, CaseId, CaseOptions, ProblemSpec};
use kapila_core::{PrimitiveState, SlopeSet, StiffenedGas, TwoPhaseEos};

/// Water/air pair of the strong shock tubes.
pub fn water_air() -> TwoPhaseEos {
    TwoPhaseEos::new(
        StiffenedGas {
            gamma: 4.4,
            pi: 6e8,
        },
        StiffenedGas::ideal(1.4),
    )
}

/// Riemann data whose solution has a left rarefaction and a right shock.
pub fn rarefaction_shock_pair() -> (PrimitiveState, PrimitiveState) {
    (
        PrimitiveState::from_phase_densities(0.5, 1000.0, 50.0, 0.0, 0.0, 1e9),
        PrimitiveState::from_phase_densities(0.5, 1000.0, 50.0, 0.0, 0.0, 1e5),
    )
}

/// Riemann data with two shocks.
pub fn double_shock_pair() -> (PrimitiveState, PrimitiveState) {
    (
        PrimitiveState::from_phase_densities(0.7, 1000.0, 1.0, 50.0, 0.0, 1e6),
        PrimitiveState::from_phase_densities(0.7, 1000.0, 1.0, -50.0, 0.0, 1e6),
    )
}

/// Smooth two-dimensional face data with nonzero slopes on both sides.
pub fn sloped_face() -> (PrimitiveState, PrimitiveState, SlopeSet, SlopeSet) {
    let l = PrimitiveState::from_phase_densities(0.6, 1000.0, 1.2, 3.0, -1.0, 2e5);
    let r = PrimitiveState::from_phase_densities(0.58, 1001.0, 1.25, 2.5, -0.8, 2.1e5);
    let s = SlopeSet {
        dv_dx: [1e-3, 40.0, -30.0, 5.0, 1e6],
        dv_dy: [-2e-3, 10.0, 2.0, -4.0, 3e5],
        dalpha_dx: -0.2,
        dalpha_dy: 0.05,
    };
    (
        l,
        r,
        s,
        SlopeSet {
            dalpha_dx: -0.1,
            ..s
        },
    )
}

pub fn example(id: CaseId, cells: Option<usize>, cells_y: Option<usize>) -> ProblemSpec {
    build_example(
        id,
        &CaseOptions {
            cells,
            cells_y,
            full_domain: false,
        },
    )
    .expect("benchmark case builds")
}
