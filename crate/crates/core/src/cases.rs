//! Problem set-ups, reference solutions and error metrics for the benchmark examples.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eos::{phase_sound_speed, ConservedState, PrimitiveState, StiffenedGas, TwoPhaseEos};
use crate::error::{Phase, SolverError};
use crate::reconstruction::ReconstructionConfig;
use crate::riemann::{solve_exact, Wave, WaveFan};
use crate::scheme::{
    step, Boundaries, Boundary, FieldState, Grid, SchemeConfig, StepReport, VacuumGuard,
};

/// Volume fraction used for a phase that is nominally absent.
pub const SEED_FRACTION: f64 = 1e-8;

/// Standard atmosphere in Pa.
pub const ATMOSPHERE: f64 = 101_325.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// Smooth isentropic water-air mixture, periodic.
    Accuracy,
    /// Water-air shock tube, pressure ratio 10^9 : 10^5.
    ShockTube,
    /// The same shock tube attenuated to 10^7 : 10^5.
    ShockTubeMild,
    /// Two-phase water-air Riemann problem.
    TwoPhaseTube,
    /// Symmetric expansion that cavitates.
    Cavitation,
    /// Shock in air hitting a helium cylinder.
    HeliumBubble,
    /// Shock in water hitting an air cylinder.
    AirBubble,
}

impl CaseId {
    pub const ALL: [CaseId; 7] = [
        CaseId::Accuracy,
        CaseId::ShockTube,
        CaseId::ShockTubeMild,
        CaseId::TwoPhaseTube,
        CaseId::Cavitation,
        CaseId::HeliumBubble,
        CaseId::AirBubble,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CaseId::Accuracy => "1",
            CaseId::ShockTube => "2",
            CaseId::ShockTubeMild => "2a",
            CaseId::TwoPhaseTube => "3",
            CaseId::Cavitation => "4",
            CaseId::HeliumBubble => "5",
            CaseId::AirBubble => "6",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::Accuracy => "accuracy",
            CaseId::ShockTube => "water-air-shock-tube",
            CaseId::ShockTubeMild => "water-air-shock-tube-mild",
            CaseId::TwoPhaseTube => "two-phase-water-air",
            CaseId::Cavitation => "cavitation",
            CaseId::HeliumBubble => "shock-helium-bubble",
            CaseId::AirBubble => "shock-air-bubble",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CaseId {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        CaseId::ALL
            .into_iter()
            .find(|c| c.label() == s || c.name() == s || (s == "2'" && *c == CaseId::ShockTubeMild))
            .ok_or_else(|| SolverError::UnknownCase(s.to_string()))
    }
}

/// Left/right data of a one-dimensional Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannSetup {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub x0: f64,
}

pub type InitialCondition = Arc<dyn Fn(f64, f64) -> PrimitiveState + Send + Sync>;

/// Everything needed to run one example.
#[derive(Clone)]
pub struct ProblemSpec {
    pub id: Option<CaseId>,
    pub name: String,
    pub eos: TwoPhaseEos,
    pub grid: Grid,
    pub end_time: f64,
    pub cfl: f64,
    pub kappa: f64,
    pub c_im: f64,
    /// Output times of interest, sorted, all at most `end_time`.
    pub snapshot_times: Vec<f64>,
    pub initial: InitialCondition,
    pub riemann: Option<RiemannSetup>,
    /// Isentrope constants of the smooth accuracy test.
    pub entropy: Option<EntropyReference>,
    /// The initial data are symmetric about the horizontal line `y = symmetry_axis`.
    pub symmetry_axis: Option<f64>,
    pub vacuum: Option<VacuumGuard>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("grid", &self.grid)
            .field("end_time", &self.end_time)
            .field("cfl", &self.cfl)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.end_time > 0.0) {
            return Err(SolverError::Config(format!(
                "end time {} must be positive",
                self.end_time
            )));
        }
        self.scheme_config().validate()?;
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1])
            || self
                .snapshot_times
                .iter()
                .any(|&t| !(t >= 0.0 && t <= self.end_time))
        {
            return Err(SolverError::Config(
                "snapshot times must be sorted and within [0, end time]".into(),
            ));
        }
        Ok(())
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        SchemeConfig {
            cfl: self.cfl,
            recon: ReconstructionConfig { kappa: self.kappa },
            c_im: self.c_im,
            vacuum: self.vacuum,
            ..SchemeConfig::default()
        }
    }

    /// Cell averages at `t = 0` (initial data sampled at cell centres). Data symmetric
    /// about a horizontal axis are made exactly symmetric on the mesh.
    pub fn initial_state(&self) -> Result<FieldState, SolverError> {
        let mut state =
            FieldState::from_primitive(&self.grid, &self.eos, |x, y| (self.initial)(x, y))?;
        if let Some(axis) = self.symmetry_axis {
            let g = &self.grid;
            let mid = (axis - g.y0) / g.dy;
            if g.two_d && (mid - 0.5 * g.ny as f64).abs() < 1e-9 {
                for j in g.ny / 2..g.ny {
                    for i in 0..g.nx {
                        let src = state.cells[g.index(i, g.ny - 1 - j)];
                        state.cells[g.index(i, j)] = ConservedState { my: -src.my, ..src };
                    }
                }
            }
        }
        Ok(state)
    }
}

/// Resolution and domain overrides for [`build_example`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseOptions {
    pub cells: Option<usize>,
    pub cells_y: Option<usize>,
    /// Two-dimensional cases: compute on the whole domain instead of the upper half.
    pub full_domain: bool,
}

fn water_air_strong() -> TwoPhaseEos {
    TwoPhaseEos::new(
        StiffenedGas {
            gamma: 4.4,
            pi: 6e8,
        },
        StiffenedGas::ideal(1.4),
    )
}

fn riemann_spec(
    id: CaseId,
    eos: TwoPhaseEos,
    cells: usize,
    end_time: f64,
    setup: RiemannSetup,
) -> Result<ProblemSpec, SolverError> {
    let mut spec = riemann_problem(id.name(), eos, setup, cells, (0.0, 1.0), end_time)?;
    spec.id = Some(id);
    Ok(spec)
}

/// A one-dimensional Riemann problem on `domain` with transmissive ends and the default
/// scheme parameters.
pub fn riemann_problem(
    name: &str,
    eos: TwoPhaseEos,
    setup: RiemannSetup,
    cells: usize,
    domain: (f64, f64),
    end_time: f64,
) -> Result<ProblemSpec, SolverError> {
    if !(domain.0 < setup.x0 && setup.x0 < domain.1) {
        return Err(SolverError::Config(format!(
            "x0 = {} outside the domain {domain:?}",
            setup.x0
        )));
    }
    setup.left.validate(&eos)?;
    setup.right.validate(&eos)?;
    let grid = Grid::new_1d(
        cells,
        domain.0,
        domain.1,
        Boundary::Transmissive,
        Boundary::Transmissive,
    )?;
    let RiemannSetup { left, right, x0 } = setup;
    Ok(ProblemSpec {
        id: None,
        name: name.to_string(),
        eos,
        grid,
        end_time,
        cfl: 0.6,
        kappa: 1.5,
        c_im: 0.5,
        snapshot_times: vec![end_time],
        initial: Arc::new(move |x, _| if x < x0 { left } else { right }),
        riemann: Some(setup),
        entropy: None,
        symmetry_axis: None,
        vacuum: None,
    })
}

fn shock_tube(id: CaseId, p_left: f64, cells: usize) -> Result<ProblemSpec, SolverError> {
    let water = 1.0 - SEED_FRACTION;
    let left = PrimitiveState::from_phase_densities(water, 1000.0, 1.0, 0.0, 0.0, p_left);
    let right = PrimitiveState::from_phase_densities(SEED_FRACTION, 1000.0, 1.0, 0.0, 0.0, 1e5);
    riemann_spec(
        id,
        water_air_strong(),
        cells,
        2.2e-4,
        RiemannSetup {
            left,
            right,
            x0: 0.7,
        },
    )
}

/// Builds one of the benchmark problems.
pub fn build_example(id: CaseId, opts: &CaseOptions) -> Result<ProblemSpec, SolverError> {
    let spec = match id {
        CaseId::Accuracy => accuracy(opts.cells.unwrap_or(40))?,
        CaseId::ShockTube => shock_tube(id, 1e9, opts.cells.unwrap_or(200))?,
        CaseId::ShockTubeMild => shock_tube(id, 1e7, opts.cells.unwrap_or(200))?,
        CaseId::TwoPhaseTube => {
            let l = PrimitiveState::from_phase_densities(0.5, 1000.0, 50.0, 0.0, 0.0, 1e9);
            let r = PrimitiveState::from_phase_densities(0.5, 1000.0, 50.0, 0.0, 0.0, 1e5);
            let setup = RiemannSetup {
                left: l,
                right: r,
                x0: 0.5,
            };
            riemann_spec(
                id,
                water_air_strong(),
                opts.cells.unwrap_or(200),
                2e-4,
                setup,
            )?
        }
        CaseId::Cavitation => {
            let l = PrimitiveState::from_phase_densities(0.99, 1000.0, 1.0, -100.0, 0.0, 1e5);
            let r = PrimitiveState::from_phase_densities(0.99, 1000.0, 1.0, 100.0, 0.0, 1e5);
            let setup = RiemannSetup {
                left: l,
                right: r,
                x0: 0.5,
            };
            let mut spec = riemann_spec(
                id,
                water_air_strong(),
                opts.cells.unwrap_or(500),
                1.85e-3,
                setup,
            )?;
            // The expansion opens a vacuum; its cells are kept no hotter than the initial air.
            let air_speed = phase_sound_speed(1e5, 1.0, &spec.eos.phase2, Phase::Two)?;
            spec.vacuum = Some(VacuumGuard {
                density: 1e-6,
                max_sound_speed: air_speed,
            });
            spec
        }
        CaseId::HeliumBubble => helium_bubble(opts)?,
        CaseId::AirBubble => air_bubble(opts)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Isentrope constants `S_k = (p + pi_k) / rho_k^gamma_k` of the accuracy test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReference {
    pub s1: f64,
    pub s2: f64,
}

impl EntropyReference {
    /// Phase entropy `h_k(S) = zeta_k^gamma_k S`.
    pub fn h(zeta_k: f64, gamma_k: f64, s: f64) -> f64 {
        zeta_k.powf(gamma_k) * s
    }

    /// Mixture entropy `S = zeta1 h1(S1) + zeta2 h2(S2)`.
    pub fn mixture(&self, zeta1: f64, eos: &TwoPhaseEos) -> f64 {
        let z2 = 1.0 - zeta1;
        zeta1 * Self::h(zeta1, eos.phase1.gamma, self.s1)
            + z2 * Self::h(z2, eos.phase2.gamma, self.s2)
    }
}

fn accuracy(cells: usize) -> Result<ProblemSpec, SolverError> {
    let eos = TwoPhaseEos::new(StiffenedGas::new(4.4, 6000.0)?, StiffenedGas::ideal(1.4));
    let entropy = EntropyReference {
        s1: 0.05,
        s2: 5000.0,
    };
    let zeta = 0.992;
    let grid = Grid::new_1d(cells, 0.0, 1.0, Boundary::Periodic, Boundary::Periodic)?;
    let (g1, pi1, g2, pi2) = (
        eos.phase1.gamma,
        eos.phase1.pi,
        eos.phase2.gamma,
        eos.phase2.pi,
    );
    let initial = Arc::new(move |x: f64, _: f64| {
        let rho1 = 20.0 + 2.0 * (2.0 * std::f64::consts::PI * x).sin();
        let p = entropy.s1 * rho1.powf(g1) - pi1;
        let rho2 = ((p + pi2) / entropy.s2).powf(1.0 / g2);
        // alpha rho1 (1 - zeta) = zeta (1 - alpha) rho2
        let alpha = zeta * rho2 / (zeta * rho2 + (1.0 - zeta) * rho1);
        let rho = alpha * rho1 + (1.0 - alpha) * rho2;
        PrimitiveState {
            zeta1: zeta,
            rho,
            u: 0.0,
            v: 0.0,
            p,
            alpha1: alpha,
        }
    });
    Ok(ProblemSpec {
        id: Some(CaseId::Accuracy),
        name: CaseId::Accuracy.name().into(),
        eos,
        grid,
        end_time: 5e-3,
        cfl: 0.6,
        kappa: 1.5,
        c_im: 0.5,
        snapshot_times: vec![5e-3],
        initial,
        riemann: None,
        entropy: Some(entropy),
        symmetry_axis: None,
        vacuum: None,
    })
}

/// Single-phase post-shock state behind a shock of Mach number `mach` running into
/// `pre` (at rest) in the negative x direction. A stiffened gas behaves as an ideal gas
/// in `p + pi`, so the classical jump relations apply to the shifted pressure.
pub fn post_shock_state(
    mach: f64,
    pre: &PrimitiveState,
    gas: &StiffenedGas,
) -> Result<PrimitiveState, SolverError> {
    if !(mach >= 1.0) || !mach.is_finite() {
        return Err(SolverError::Config(format!(
            "shock Mach number {mach} must be at least 1"
        )));
    }
    let g = gas.gamma;
    let c = (g * (pre.p + gas.pi) / pre.rho).sqrt();
    let m2 = mach * mach;
    let rho = pre.rho * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let p = (pre.p + gas.pi) * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0)) - gas.pi;
    let u = pre.u - 2.0 / (g + 1.0) * (mach - 1.0 / mach) * c;
    Ok(PrimitiveState { rho, u, p, ..*pre })
}

/// Shock speed of [`post_shock_state`] (negative: the shock runs to the left).
pub fn shock_speed(mach: f64, pre: &PrimitiveState, gas: &StiffenedGas) -> f64 {
    pre.u - mach * (gas.gamma * (pre.p + gas.pi) / pre.rho).sqrt()
}

/// Geometry of the shock-bubble problems: a channel of height `a` and length `b`, a
/// cylinder of radius `d` centred at `(c, a / 2)`, and a left-running shock starting a
/// distance `e` to the right of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleGeometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl BubbleGeometry {
    pub fn shock_position(&self) -> f64 {
        self.c + self.d + self.e
    }
}

struct BubbleSetup {
    id: CaseId,
    geom: BubbleGeometry,
    eos: TwoPhaseEos,
    /// Fluid outside the bubble is phase 1 when true.
    outer_is_phase1: bool,
    pre: PrimitiveState,
    bubble_rho: f64,
    mach: f64,
    cells: (usize, usize),
    cfl: f64,
    wall_top: Boundary,
    times: Vec<f64>,
}

fn bubble_problem(s: BubbleSetup, opts: &CaseOptions) -> Result<ProblemSpec, SolverError> {
    let BubbleSetup {
        id,
        geom,
        eos,
        outer_is_phase1,
        pre,
        bubble_rho,
        mach,
        cells,
        cfl,
        wall_top,
        times,
    } = s;
    let outer_gas = if outer_is_phase1 {
        eos.phase1
    } else {
        eos.phase2
    };
    let post = post_shock_state(mach, &pre, &outer_gas)?;
    let hi = 1.0 - SEED_FRACTION;
    let (outer_alpha, inner_alpha) = if outer_is_phase1 {
        (hi, SEED_FRACTION)
    } else {
        (SEED_FRACTION, hi)
    };
    let mixture = move |alpha1: f64, w: &PrimitiveState, rho_inner: f64| {
        // The seeded phase carries the density of the other fluid, so each cell is a
        // near-pure state of its own fluid.
        let (rho1, rho2) = if outer_is_phase1 {
            (w.rho, rho_inner)
        } else {
            (rho_inner, w.rho)
        };
        PrimitiveState::from_phase_densities(alpha1, rho1, rho2, w.u, w.v, w.p)
    };
    let xs = geom.shock_position();
    let centre = (geom.c, 0.5 * geom.a);
    let initial = Arc::new(move |x: f64, y: f64| {
        let r2 = (x - centre.0).powi(2) + (y - centre.1).powi(2);
        if r2 < geom.d * geom.d {
            let w = PrimitiveState {
                rho: bubble_rho,
                ..pre
            };
            let (rho1, rho2) = if outer_is_phase1 {
                (pre.rho, bubble_rho)
            } else {
                (bubble_rho, pre.rho)
            };
            PrimitiveState::from_phase_densities(inner_alpha, rho1, rho2, w.u, w.v, w.p)
        } else if x > xs {
            mixture(outer_alpha, &post, bubble_rho)
        } else {
            mixture(outer_alpha, &pre, bubble_rho)
        }
    });
    let (nx, ny_half) = (
        opts.cells.unwrap_or(cells.0),
        opts.cells_y.unwrap_or(cells.1),
    );
    let (grid, axis) = if opts.full_domain {
        let ny = opts.cells_y.unwrap_or(2 * cells.1);
        let bc = Boundaries {
            left: Boundary::Transmissive,
            right: Boundary::Transmissive,
            bottom: wall_top,
            top: wall_top,
        };
        (
            Grid::new_2d(nx, ny, (0.0, geom.b), (0.0, geom.a), bc)?,
            Some(0.5 * geom.a),
        )
    } else {
        let bc = Boundaries {
            left: Boundary::Transmissive,
            right: Boundary::Transmissive,
            bottom: Boundary::Reflective,
            top: wall_top,
        };
        (
            Grid::new_2d(nx, ny_half, (0.0, geom.b), (0.5 * geom.a, geom.a), bc)?,
            None,
        )
    };
    let end_time = times.iter().cloned().fold(0.0, f64::max);
    Ok(ProblemSpec {
        id: Some(id),
        name: id.name().into(),
        eos,
        grid,
        end_time,
        cfl,
        kappa: 1.5,
        c_im: 0.5,
        snapshot_times: times,
        initial,
        riemann: None,
        entropy: None,
        symmetry_axis: axis,
        vacuum: None,
    })
}

/// Time at which the incident shock reaches the bubble.
pub fn bubble_impact_time(id: CaseId) -> Result<f64, SolverError> {
    let (geom, pre, gas, mach) = match id {
        CaseId::HeliumBubble => (
            helium_geometry(),
            helium_pre(),
            StiffenedGas::ideal(1.4),
            1.22,
        ),
        CaseId::AirBubble => (
            air_bubble_geometry(),
            air_bubble_pre(),
            StiffenedGas {
                gamma: 4.4,
                pi: 6000.0,
            },
            1.72,
        ),
        other => return Err(SolverError::Config(format!("case {other} has no bubble"))),
    };
    Ok(geom.e / -shock_speed(mach, &pre, &gas))
}

fn helium_geometry() -> BubbleGeometry {
    // Given in centimetres.
    BubbleGeometry {
        a: 0.89,
        b: 3.293,
        c: 0.5,
        d: 0.25,
        e: 1.0,
    }
}

fn helium_pre() -> PrimitiveState {
    PrimitiveState {
        zeta1: 1.0,
        rho: 1.0,
        u: 0.0,
        v: 0.0,
        p: ATMOSPHERE,
        alpha1: 1.0,
    }
}

fn air_bubble_geometry() -> BubbleGeometry {
    BubbleGeometry {
        a: 12.0,
        b: 12.0,
        c: 6.0,
        d: 2.4,
        e: 0.6,
    }
}

fn air_bubble_pre() -> PrimitiveState {
    PrimitiveState {
        zeta1: 1.0,
        rho: 1.0,
        u: 0.0,
        v: 0.0,
        p: 1.0,
        alpha1: 1.0,
    }
}

fn helium_bubble(opts: &CaseOptions) -> Result<ProblemSpec, SolverError> {
    let impact = bubble_impact_time(CaseId::HeliumBubble)?;
    bubble_problem(
        BubbleSetup {
            id: CaseId::HeliumBubble,
            geom: helium_geometry(),
            eos: TwoPhaseEos::new(StiffenedGas::ideal(1.4), StiffenedGas::ideal(1.648)),
            outer_is_phase1: true,
            pre: helium_pre(),
            bubble_rho: 0.1819,
            mach: 1.22,
            cells: (370, 50),
            cfl: 0.45,
            wall_top: Boundary::Reflective,
            times: [62e-6, 245e-6, 427e-6, 983e-6]
                .iter()
                .map(|t| impact + t)
                .collect(),
        },
        opts,
    )
}

fn air_bubble(opts: &CaseOptions) -> Result<ProblemSpec, SolverError> {
    bubble_problem(
        BubbleSetup {
            id: CaseId::AirBubble,
            geom: air_bubble_geometry(),
            eos: TwoPhaseEos::new(
                StiffenedGas {
                    gamma: 4.4,
                    pi: 6000.0,
                },
                StiffenedGas::ideal(1.4),
            ),
            outer_is_phase1: true,
            pre: air_bubble_pre(),
            bubble_rho: 0.0012,
            mach: 1.72,
            cells: (120, 60),
            cfl: 0.25,
            wall_top: Boundary::Transmissive,
            times: vec![0.015, 0.020, 0.025, 0.030, 0.035, 0.040],
        },
        opts,
    )
}

/// Norms of the entropy errors of the accuracy test.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyErrors {
    pub e1_l1: f64,
    pub e1_linf: f64,
    pub e2_l1: f64,
    pub e2_linf: f64,
    pub e_l1: f64,
    pub e_linf: f64,
}

impl EntropyErrors {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.e1_l1,
            self.e1_linf,
            self.e2_l1,
            self.e2_linf,
            self.e_l1,
            self.e_linf,
        ]
    }
}

/// Per-phase and mixture entropy errors, `E_k = h_k((p + pi_k) / rho_k^gamma_k) - h_k(S_k)`.
pub fn entropy_errors(
    state: &FieldState,
    grid: &Grid,
    reference: &EntropyReference,
    eos: &TwoPhaseEos,
) -> Result<EntropyErrors, SolverError> {
    let mut out = EntropyErrors::default();
    let vol = grid.cell_volume();
    for w in state.primitives(eos)? {
        let (z1, z2) = (w.zeta1, 1.0 - w.zeta1);
        let rho1 = z1 * w.rho / w.alpha1;
        let rho2 = z2 * w.rho / (1.0 - w.alpha1);
        let h1 = EntropyReference::h(z1, eos.phase1.gamma, eos.phase1.entropy(w.p, rho1));
        let h2 = EntropyReference::h(z2, eos.phase2.gamma, eos.phase2.entropy(w.p, rho2));
        let e1 = h1 - EntropyReference::h(z1, eos.phase1.gamma, reference.s1);
        let e2 = h2 - EntropyReference::h(z2, eos.phase2.gamma, reference.s2);
        let e = z1 * h1 + z2 * h2 - reference.mixture(z1, eos);
        if !(e1.is_finite() && e2.is_finite() && e.is_finite()) {
            return Err(SolverError::InvalidState(format!(
                "entropy undefined for {w:?}"
            )));
        }
        out.e1_l1 += e1.abs() * vol;
        out.e2_l1 += e2.abs() * vol;
        out.e_l1 += e.abs() * vol;
        out.e1_linf = out.e1_linf.max(e1.abs());
        out.e2_linf = out.e2_linf.max(e2.abs());
        out.e_linf = out.e_linf.max(e.abs());
    }
    Ok(out)
}

/// Exact solution of a Riemann-data problem at `(x, t)`.
pub fn exact_reference(spec: &ProblemSpec, x: f64, t: f64) -> Result<PrimitiveState, SolverError> {
    let fan = exact_fan(spec)?;
    sample_reference(&fan, spec, x, t)
}

pub fn exact_fan(spec: &ProblemSpec) -> Result<WaveFan, SolverError> {
    let setup = spec
        .riemann
        .ok_or_else(|| SolverError::Config(format!("{} is not a Riemann problem", spec.name)))?;
    solve_exact(&setup.left, &setup.right, &spec.eos)
}

fn sample_reference(
    fan: &WaveFan,
    spec: &ProblemSpec,
    x: f64,
    t: f64,
) -> Result<PrimitiveState, SolverError> {
    let x0 = spec.riemann.map(|r| r.x0).unwrap_or(0.0);
    if t <= 0.0 {
        return Ok(if x < x0 {
            *fan.left_state()
        } else {
            *fan.right_state()
        });
    }
    fan.sample((x - x0) / t)
}

/// Exact cell averages on the grid of `spec` at time `t`, by Gauss quadrature in each cell.
pub fn exact_cell_averages(spec: &ProblemSpec, t: f64) -> Result<Vec<PrimitiveState>, SolverError> {
    let fan = exact_fan(spec)?;
    let g = &spec.grid;
    // 8-point Gauss-Legendre nodes on [-1, 1].
    const NODES: [(f64, f64); 8] = [
        (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
        (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
        (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
        (0.183_434_642_495_649_8, 0.362_683_783_378_362),
        (0.525_532_409_916_329, 0.313_706_645_877_887_3),
        (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    ];
    (0..g.nx)
        .map(|i| {
            let xc = g.x_center(i);
            let mut acc = [0.0; 6];
            for (s, w) in NODES {
                let p = sample_reference(&fan, spec, xc + 0.5 * g.dx * s, t)?;
                for (a, v) in acc
                    .iter_mut()
                    .zip([p.zeta1, p.rho, p.u, p.v, p.p, p.alpha1])
                {
                    *a += 0.5 * w * v;
                }
            }
            Ok(PrimitiveState {
                zeta1: acc[0],
                rho: acc[1],
                u: acc[2],
                v: acc[3],
                p: acc[4],
                alpha1: acc[5],
            })
        })
        .collect()
}

/// Positions at time `t` of the two outer waves and the contact. Rarefactions are
/// represented by their heads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePositions {
    pub left: f64,
    pub contact: f64,
    pub right: f64,
}

pub fn exact_wave_positions(spec: &ProblemSpec, t: f64) -> Result<WavePositions, SolverError> {
    let fan = exact_fan(spec)?;
    let x0 = spec.riemann.map(|r| r.x0).unwrap_or(0.0);
    let front = |w: Wave| match w {
        Wave::Shock { speed, .. } => speed,
        Wave::Rarefaction { head, .. } => head,
    };
    Ok(WavePositions {
        left: x0 + front(fan.left_wave) * t,
        contact: x0 + fan.u_star * t,
        right: x0 + front(fan.right_wave) * t,
    })
}

/// Location of one wave: where the exact and the numerical profiles cross the level
/// halfway between the states on either side of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveLocation {
    pub exact: f64,
    pub numerical: f64,
}

impl WaveLocation {
    pub fn offset_cells(&self, dx: f64) -> f64 {
        (self.numerical - self.exact).abs() / dx
    }
}

/// Locates the left wave and the right wave (by pressure) and the contact (by density)
/// in a numerical solution at time `t`. A wave of zero strength is reported as `None`.
pub fn locate_waves(
    spec: &ProblemSpec,
    numerical: &[PrimitiveState],
    t: f64,
) -> Result<[Option<WaveLocation>; 3], SolverError> {
    let fan = exact_fan(spec)?;
    if fan.vacuum.is_some() {
        return Err(SolverError::Config(
            "wave locations are undefined around a vacuum".into(),
        ));
    }
    let g = &spec.grid;
    let x0 = spec.riemann.map(|r| r.x0).unwrap_or(0.0);
    let trailing = |w: Wave| match w {
        Wave::Shock { speed, .. } => speed,
        Wave::Rarefaction { tail, .. } => tail,
    };
    let contact = x0 + fan.u_star * t;
    let left_end = x0 + trailing(fan.left_wave) * t;
    let right_end = x0 + trailing(fan.right_wave) * t;
    let windows = [
        (g.x0, 0.5 * (left_end + contact)),
        (0.5 * (left_end + contact), 0.5 * (contact + right_end)),
        (0.5 * (contact + right_end), g.x0 + g.nx as f64 * g.dx),
    ];
    let (l, r) = (fan.left_state(), fan.right_state());
    let (ls, rs) = (fan.left_star, fan.right_star);
    let pressure = |w: &PrimitiveState| w.p;
    let density = |w: &PrimitiveState| w.rho;
    // The contact moves like a shock at the star velocity as far as locating it goes.
    let contact_wave = Wave::Shock {
        speed: fan.u_star,
        mass_flux: 0.0,
    };
    let waves: [(f64, f64, &dyn Fn(&PrimitiveState) -> f64, Wave); 3] = [
        (l.p, ls.p, &pressure, fan.left_wave),
        (ls.rho, rs.rho, &density, contact_wave),
        (rs.p, r.p, &pressure, fan.right_wave),
    ];
    let mut out = [None; 3];
    for (k, (a, b, field, wave)) in waves.into_iter().enumerate() {
        if (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) {
            continue;
        }
        let level = 0.5 * (a + b);
        let exact = match wave {
            Wave::Shock { speed, .. } => x0 + speed * t,
            Wave::Rarefaction { head, tail } => {
                // The field is monotone across the fan.
                let (mut lo, mut hi) = (head.min(tail), head.max(tail));
                let f_lo = field(&fan.sample(lo)?) - level;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (field(&fan.sample(mid)?) - level).signum() == f_lo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                x0 + 0.5 * (lo + hi) * t
            }
        };
        let (w_lo, w_hi) = windows[k];
        let mut best: Option<f64> = None;
        for i in 0..g.nx.saturating_sub(1) {
            let (xa, xb) = (g.x_center(i), g.x_center(i + 1));
            if xb < w_lo || xa > w_hi {
                continue;
            }
            let (fa, fb) = (
                field(&numerical[i]) - level,
                field(&numerical[i + 1]) - level,
            );
            if fa == 0.0 || fa.signum() != fb.signum() {
                let x = xa + (xb - xa) * fa / (fa - fb);
                if best.is_none_or(|y| (x - exact).abs() < (y - exact).abs()) {
                    best = Some(x);
                }
            }
        }
        let numerical = best.ok_or_else(|| {
            SolverError::Config(format!("wave {k} not found in the numerical profile"))
        })?;
        out[k] = Some(WaveLocation { exact, numerical });
    }
    Ok(out)
}

/// L1 norms (`dx * sum |.|`) of the errors of `p, u, rho, alpha1`.
pub fn riemann_l1_errors(
    numerical: &[PrimitiveState],
    exact: &[PrimitiveState],
    dx: f64,
) -> [f64; 4] {
    let mut e = [0.0; 4];
    for (n, x) in numerical.iter().zip(exact) {
        e[0] += (n.p - x.p).abs() * dx;
        e[1] += (n.u - x.u).abs() * dx;
        e[2] += (n.rho - x.rho).abs() * dx;
        e[3] += (n.alpha1 - x.alpha1).abs() * dx;
    }
    e
}

/// Totals and extremes of a complete run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
    pub max_cn_residual: f64,
    /// Smallest bound margin over all steps and checked cells.
    pub min_bound_margin: f64,
    pub retries: usize,
    pub clamped_cells: usize,
    pub flux_fallbacks: usize,
    pub initial_totals: [f64; 5],
    pub final_totals: [f64; 5],
}

impl RunSummary {
    fn new(state: &FieldState, grid: &Grid) -> Self {
        let (min_alpha, max_alpha) = state.alpha_range();
        let totals = state.totals(grid);
        Self {
            steps: 0,
            time: state.t,
            min_alpha,
            max_alpha,
            max_cn_residual: 0.0,
            min_bound_margin: f64::INFINITY,
            retries: 0,
            clamped_cells: 0,
            flux_fallbacks: 0,
            initial_totals: totals,
            final_totals: totals,
        }
    }

    fn absorb(&mut self, r: &StepReport) {
        self.steps += 1;
        self.min_alpha = self.min_alpha.min(r.min_alpha);
        self.max_alpha = self.max_alpha.max(r.max_alpha);
        self.max_cn_residual = self.max_cn_residual.max(r.max_cn_residual);
        self.min_bound_margin = self.min_bound_margin.min(r.min_bound_margin);
        self.retries += r.retries;
        self.clamped_cells += r.clamped_cells;
        self.flux_fallbacks += r.flux_fallbacks;
    }

    /// Largest relative change of the conserved totals (`zeta1 rho, rho, rho u, rho v,
    /// rho E`), each relative to its own initial magnitude, falling back to the mass scale
    /// for vanishing momentum totals.
    pub fn conservation_drift(&self) -> [f64; 5] {
        let scale = self.initial_totals[1].abs();
        std::array::from_fn(|k| {
            let d = (self.final_totals[k] - self.initial_totals[k]).abs();
            let s = self.initial_totals[k].abs();
            d / if s > 1e-12 * scale { s } else { scale }
        })
    }
}

/// Advances `state` to `end_time`, landing exactly on every time of `stops` (sorted) and
/// calling `on_stop` there. `on_step` sees every accepted step.
pub fn simulate(
    spec: &ProblemSpec,
    state: &mut FieldState,
    stops: &[f64],
    mut on_stop: impl FnMut(&FieldState) -> Result<(), SolverError>,
    mut on_step: impl FnMut(&FieldState, &StepReport),
) -> Result<RunSummary, SolverError> {
    let cfg = spec.scheme_config();
    let mut summary = RunSummary::new(state, &spec.grid);
    let t0 = state.t;
    let mut targets: Vec<(f64, bool)> = stops
        .iter()
        .filter(|&&t| t >= t0 && t <= spec.end_time)
        .map(|&t| (t, true))
        .collect();
    if targets.last().is_none_or(|&(t, _)| t < spec.end_time) {
        targets.push((spec.end_time, false));
    }
    for (target, report_stop) in targets {
        while state.t < target {
            let report = step(state, &spec.grid, &spec.eos, &cfg, target - state.t)?;
            // Land exactly on the requested time despite round-off in the accumulation.
            if (target - state.t).abs() <= 1e-12 * target {
                state.t = target;
            }
            summary.absorb(&report);
            on_step(state, &report);
        }
        if report_stop {
            on_stop(state)?;
        }
    }
    summary.time = state.t;
    summary.final_totals = state.totals(&spec.grid);
    Ok(summary)
}

/// Runs `spec` to its end time without output.
pub fn run_to_end(spec: &ProblemSpec) -> Result<(FieldState, RunSummary), SolverError> {
    let mut state = spec.initial_state()?;
    let summary = simulate(spec, &mut state, &[], |_| Ok(()), |_, _| {})?;
    Ok((state, summary))
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub errors: EntropyErrors,
    /// `log2(E_{N/2} / E_N)` for each norm; absent on the first row.
    pub orders: Option<[f64; 6]>,
}

/// Observed orders `log2(E_coarse / E_fine)` between successive rows of a sequence of
/// doubling resolutions.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Runs the accuracy test at each resolution and tabulates the entropy errors.
pub fn convergence_study(
    resolutions: &[usize],
    c_im: f64,
) -> Result<Vec<ConvergenceRow>, SolverError> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let mut spec = build_example(
            CaseId::Accuracy,
            &CaseOptions {
                cells: Some(n),
                ..Default::default()
            },
        )?;
        spec.c_im = c_im;
        let (state, _) = run_to_end(&spec)?;
        let reference = spec
            .entropy
            .expect("accuracy test carries its entropy reference");
        let errors = entropy_errors(&state, &spec.grid, &reference, &spec.eos)?;
        let orders = rows.last().map(|prev| {
            let (a, b) = (prev.errors.as_array(), errors.as_array());
            let ratio = (n as f64 / prev.cells as f64).log2();
            std::array::from_fn(|k| (a[k] / b[k]).log2() / ratio)
        });
        rows.push(ConvergenceRow {
            cells: n,
            errors,
            orders,
        });
    }
    Ok(rows)
}
