//! Acoustic generalized Riemann problem solver.
//!
//! The quasi-linear system `V_t + A V_x + B V_y = 0` for `V = (zeta1, rho, u, v, p)` is
//! frozen at the Riemann star state and split by characteristics. The volume fraction
//! derivative is then recovered from the phase-1 density derivative through
//! `alpha1 tau = zeta1 tau1`.

use crate::eos::{wood_sound_speed, PrimitiveState, TwoPhaseEos, ALPHA_CUTOFF};
use crate::error::SolverError;
use crate::riemann::{mirror, solve_exact};

pub type Vec5 = [f64; 5];
pub type Mat5 = [[f64; 5]; 5];

const ZETA: usize = 0;
const RHO: usize = 1;
const U: usize = 2;
const V: usize = 3;
const P: usize = 4;

/// One-sided gradients of `(zeta1, rho, u, v, p)` and `alpha1` at an interface.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlopeSet {
    pub dv_dx: Vec5,
    pub dv_dy: Vec5,
    pub dalpha_dx: f64,
    pub dalpha_dy: f64,
}

impl SlopeSet {
    pub const ZERO: SlopeSet = SlopeSet {
        dv_dx: [0.0; 5],
        dv_dy: [0.0; 5],
        dalpha_dx: 0.0,
        dalpha_dy: 0.0,
    };

    /// The same gradients in a frame where x and y (and u and v) are exchanged, so that
    /// a y-interface can be solved as an x-interface.
    pub fn rotated(&self) -> SlopeSet {
        SlopeSet {
            dv_dx: swap_uv(self.dv_dy),
            dv_dy: swap_uv(self.dv_dx),
            dalpha_dx: self.dalpha_dy,
            dalpha_dy: self.dalpha_dx,
        }
    }

    /// Gradients of the data reflected through `x = 0` (u is odd, the rest even).
    pub fn mirrored(&self) -> SlopeSet {
        let flip = |d: Vec5, negate_u: bool| {
            std::array::from_fn(|k| if (k == U) == negate_u { -d[k] } else { d[k] })
        };
        SlopeSet {
            dv_dx: flip(self.dv_dx, false),
            dv_dy: flip(self.dv_dy, true),
            dalpha_dx: -self.dalpha_dx,
            dalpha_dy: self.dalpha_dy,
        }
    }

    fn mean(a: &SlopeSet, b: &SlopeSet) -> SlopeSet {
        let avg = |x: Vec5, y: Vec5| std::array::from_fn(|k| 0.5 * (x[k] + y[k]));
        SlopeSet {
            dv_dx: avg(a.dv_dx, b.dv_dx),
            dv_dy: avg(a.dv_dy, b.dv_dy),
            dalpha_dx: 0.5 * (a.dalpha_dx + b.dalpha_dx),
            dalpha_dy: 0.5 * (a.dalpha_dy + b.dalpha_dy),
        }
    }
}

#[inline]
pub fn swap_uv(mut v: Vec5) -> Vec5 {
    v.swap(U, V);
    v
}

/// Interface value and instantaneous time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpResult {
    pub star: PrimitiveState,
    pub dv_dt: Vec5,
    pub dalpha_dt: f64,
    /// The interface sits in a vacuum region of the associated Riemann problem.
    pub vacuum: bool,
}

impl GrpResult {
    /// Undo [`SlopeSet::rotated`] on the output of a y-interface solve.
    pub fn rotated(&self) -> GrpResult {
        GrpResult {
            star: self.star.swap_velocity(),
            dv_dt: swap_uv(self.dv_dt),
            ..*self
        }
    }

    /// The solution of the reflected problem, reflected back.
    pub fn mirrored(&self) -> GrpResult {
        let mut dv_dt = self.dv_dt;
        dv_dt[U] = -dv_dt[U];
        GrpResult {
            star: mirror(&self.star),
            dv_dt,
            ..*self
        }
    }
}

pub fn primitive_vector(w: &PrimitiveState) -> Vec5 {
    [w.zeta1, w.rho, w.u, w.v, w.p]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSystem {
    /// Columns are the right eigenvectors.
    pub right: Mat5,
    /// Rows are the left eigenvectors; `left = right^-1`.
    pub left: Mat5,
    pub eigenvalues: Vec5,
    pub sound_speed: f64,
}

impl CharacteristicSystem {
    pub fn lambda_plus(&self) -> Vec5 {
        self.eigenvalues.map(|l| l.max(0.0))
    }

    pub fn lambda_minus(&self) -> Vec5 {
        self.eigenvalues.map(|l| l.min(0.0))
    }

    /// Upwind indicators. A characteristic standing exactly on the interface is shared
    /// equally by both sides.
    pub fn indicator_plus(&self) -> Vec5 {
        self.eigenvalues.map(|l| {
            if l > 0.0 {
                1.0
            } else if l < 0.0 {
                0.0
            } else {
                0.5
            }
        })
    }

    pub fn indicator_minus(&self) -> Vec5 {
        self.indicator_plus().map(|i| 1.0 - i)
    }

    /// `R diag(d) L x`.
    pub fn project(&self, d: &Vec5, x: &Vec5) -> Vec5 {
        let w: Vec5 = std::array::from_fn(|i| d[i] * dot(&self.left[i], x));
        std::array::from_fn(|r| (0..5).map(|i| self.right[r][i] * w[i]).sum())
    }
}

#[inline]
fn dot(a: &Vec5, b: &Vec5) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4]
}

pub fn mat_vec(m: &Mat5, x: &Vec5) -> Vec5 {
    std::array::from_fn(|r| dot(&m[r], x))
}

/// Coefficient matrix of `V_x`.
pub fn a_matrix(w: &PrimitiveState, c: f64) -> Mat5 {
    let (u, rho) = (w.u, w.rho);
    [
        [u, 0.0, 0.0, 0.0, 0.0],
        [0.0, u, rho, 0.0, 0.0],
        [0.0, 0.0, u, 0.0, 1.0 / rho],
        [0.0, 0.0, 0.0, u, 0.0],
        [0.0, 0.0, rho * c * c, 0.0, u],
    ]
}

/// Coefficient matrix of `V_y`.
pub fn b_matrix(w: &PrimitiveState, c: f64) -> Mat5 {
    let (v, rho) = (w.v, w.rho);
    [
        [v, 0.0, 0.0, 0.0, 0.0],
        [0.0, v, 0.0, rho, 0.0],
        [0.0, 0.0, v, 0.0, 0.0],
        [0.0, 0.0, 0.0, v, 1.0 / rho],
        [0.0, 0.0, 0.0, rho * c * c, v],
    ]
}

pub fn build_characteristic_system(
    star: &PrimitiveState,
    eos: &TwoPhaseEos,
) -> Result<CharacteristicSystem, SolverError> {
    let c = wood_sound_speed(star, eos)?;
    let rho = star.rho;
    let (ic2, irc) = (1.0 / (c * c), 1.0 / (rho * c));
    // Eigenvector order: u - c, shear, entropy (density), mass fraction, u + c.
    let right = [
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [ic2, 0.0, 1.0, 0.0, ic2],
        [-irc, 0.0, 0.0, 0.0, irc],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let half_z = 0.5 * rho * c;
    let left = [
        [0.0, 0.0, -half_z, 0.0, 0.5],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, -ic2],
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, half_z, 0.0, 0.5],
    ];
    let u = star.u;
    Ok(CharacteristicSystem {
        right,
        left,
        eigenvalues: [u - c, u, u, u, u + c],
        sound_speed: c,
    })
}

/// `(dV/dt)*` from the characteristic splitting. With `transverse` off the y-gradients
/// are ignored.
pub fn acoustic_time_derivatives(
    sys: &CharacteristicSystem,
    star: &PrimitiveState,
    slopes_l: &SlopeSet,
    slopes_r: &SlopeSet,
    transverse: bool,
) -> Vec5 {
    let a = sys.project(&sys.lambda_plus(), &slopes_l.dv_dx);
    let b = sys.project(&sys.lambda_minus(), &slopes_r.dv_dx);
    let mut dt: Vec5 = std::array::from_fn(|k| -(a[k] + b[k]));
    if transverse {
        let bm = b_matrix(star, sys.sound_speed);
        let tl = sys.project(&sys.indicator_plus(), &mat_vec(&bm, &slopes_l.dv_dy));
        let tr = sys.project(&sys.indicator_minus(), &mat_vec(&bm, &slopes_r.dv_dy));
        for k in 0..5 {
            dt[k] -= tl[k] + tr[k];
        }
    }
    dt
}

/// `(tau1 drho1/dt)*`. The entropy-advection term is written through pressure and
/// phase-density gradients, `u (p_x - c1^2 rho1_x) + v (p_y - c1^2 rho1_y)`, using the
/// gradients upwind of the contact. Returns `None` when phase 1 is (nearly) absent.
pub fn phase_density_time_derivative(
    star: &PrimitiveState,
    dp_dt: f64,
    upwind: &SlopeSet,
    eos: &TwoPhaseEos,
    transverse: bool,
) -> Option<f64> {
    if star.alpha1 <= ALPHA_CUTOFF || star.zeta1 <= ALPHA_CUTOFF {
        return None;
    }
    let k1 = eos.phase1.rho_c2(star.p);
    // rho1_x / rho1 from rho1 = zeta1 rho / alpha1.
    let log_grad =
        |dv: &Vec5, da: f64| dv[ZETA] / star.zeta1 + dv[RHO] / star.rho - da / star.alpha1;
    let mut rate =
        dp_dt + star.u * (upwind.dv_dx[P] - k1 * log_grad(&upwind.dv_dx, upwind.dalpha_dx));
    if transverse {
        rate += star.v * (upwind.dv_dy[P] - k1 * log_grad(&upwind.dv_dy, upwind.dalpha_dy));
    }
    Some(rate / k1)
}

/// `(dalpha1/dt)* = alpha1 (-tau1 rho1_t + zeta1_t / zeta1 + tau rho_t)`, zero outside the
/// mixture band.
pub fn alpha_time_derivative(
    star: &PrimitiveState,
    d_taurho1_dt: f64,
    dzeta_dt: f64,
    drho_dt: f64,
) -> f64 {
    if star.alpha1 <= ALPHA_CUTOFF || star.alpha1 >= 1.0 - ALPHA_CUTOFF || star.zeta1 <= 0.0 {
        return 0.0;
    }
    star.alpha1 * (-d_taurho1_dt + dzeta_dt / star.zeta1 + drho_dt / star.rho)
}

/// Full acoustic GRP at an x-interface between piecewise-linear data.
///
/// The problem is solved in a canonical orientation: of the data and its reflection
/// through the interface, the one whose left side orders first is solved. Mirrored data
/// therefore give bitwise mirrored results.
pub fn solve_grp(
    left: &PrimitiveState,
    right: &PrimitiveState,
    slopes_l: &SlopeSet,
    slopes_r: &SlopeSet,
    eos: &TwoPhaseEos,
    transverse: bool,
) -> Result<GrpResult, SolverError> {
    let (ml, mr) = (mirror(right), mirror(left));
    let (msl, msr) = (slopes_r.mirrored(), slopes_l.mirrored());
    let key = |w: &PrimitiveState, s: &SlopeSet| {
        let mut k = vec![
            w.rho,
            w.p,
            w.alpha1,
            w.zeta1,
            w.u,
            w.v,
            s.dalpha_dx,
            s.dalpha_dy,
        ];
        k.extend(s.dv_dx);
        k.extend(s.dv_dy);
        k
    };
    let a = key(left, slopes_l);
    let b = key(&ml, &msl);
    let flip = a
        .iter()
        .zip(&b)
        .find_map(|(x, y)| (x != y).then(|| x.total_cmp(y)))
        .is_some_and(|o| o == std::cmp::Ordering::Greater);
    if flip {
        solve_oriented(&ml, &mr, &msl, &msr, eos, transverse).map(|g| g.mirrored())
    } else {
        solve_oriented(left, right, slopes_l, slopes_r, eos, transverse)
    }
}

fn solve_oriented(
    left: &PrimitiveState,
    right: &PrimitiveState,
    slopes_l: &SlopeSet,
    slopes_r: &SlopeSet,
    eos: &TwoPhaseEos,
    transverse: bool,
) -> Result<GrpResult, SolverError> {
    let fan = solve_exact(left, right, eos)?;
    let star = fan.sample(0.0)?;
    if !(star.rho > 0.0) {
        return Ok(GrpResult {
            star,
            dv_dt: [0.0; 5],
            dalpha_dt: 0.0,
            vacuum: true,
        });
    }
    let sys = build_characteristic_system(&star, eos)?;
    let dv_dt = acoustic_time_derivatives(&sys, &star, slopes_l, slopes_r, transverse);
    let mean;
    let upwind = if star.u > 0.0 {
        slopes_l
    } else if star.u < 0.0 {
        slopes_r
    } else {
        mean = SlopeSet::mean(slopes_l, slopes_r);
        &mean
    };
    let dalpha_dt = match phase_density_time_derivative(&star, dv_dt[P], upwind, eos, transverse) {
        Some(tr) => alpha_time_derivative(&star, tr, dv_dt[ZETA], dv_dt[RHO]),
        None => 0.0,
    };
    Ok(GrpResult {
        star,
        dv_dt,
        dalpha_dt,
        vacuum: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::StiffenedGas;
    use proptest::prelude::*;

    fn water_air() -> TwoPhaseEos {
        TwoPhaseEos::new(
            StiffenedGas::new(4.4, 6e8).unwrap(),
            StiffenedGas::ideal(1.4),
        )
    }

    fn state(alpha: f64, rho1: f64, rho2: f64, u: f64, v: f64, p: f64) -> PrimitiveState {
        PrimitiveState::from_phase_densities(alpha, rho1, rho2, u, v, p)
    }

    fn mat_mul(a: &Mat5, b: &Mat5) -> Mat5 {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..5).map(|k| a[i][k] * b[k][j]).sum()))
    }

    fn max_rel_diff(a: &Vec5, b: &Vec5) -> f64 {
        let scale = a
            .iter()
            .chain(b.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1e-300);
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    fn lax_wendroff(w: &PrimitiveState, c: f64, s: &SlopeSet) -> (Vec5, Vec5) {
        let a = a_matrix(w, c);
        let b = b_matrix(w, c);
        let ax = mat_vec(&a, &s.dv_dx);
        let by = mat_vec(&b, &s.dv_dy);
        // Sum of absolute term magnitudes, for scaling the comparison.
        let mut scale = [0.0; 5];
        for r in 0..5 {
            for k in 0..5 {
                scale[r] += (a[r][k] * s.dv_dx[k]).abs() + (b[r][k] * s.dv_dy[k]).abs();
            }
        }
        (std::array::from_fn(|k| -(ax[k] + by[k])), scale)
    }

    fn arb_state() -> impl Strategy<Value = PrimitiveState> {
        (
            0.01f64..0.99,
            500.0f64..1500.0,
            0.5f64..100.0,
            -300.0f64..300.0,
            -300.0f64..300.0,
            1e5f64..1e9,
        )
            .prop_map(|(a, r1, r2, u, v, p)| state(a, r1, r2, u, v, p))
    }

    fn arb_slopes() -> impl Strategy<Value = SlopeSet> {
        (
            prop::array::uniform5(-1.0f64..1.0),
            prop::array::uniform5(-1.0f64..1.0),
            -1.0f64..1.0,
            -1.0f64..1.0,
        )
            .prop_map(|(x, y, ax, ay)| {
                let sc = [1e-3, 1e2, 1e2, 1e2, 1e8];
                SlopeSet {
                    dv_dx: std::array::from_fn(|k| x[k] * sc[k]),
                    dv_dy: std::array::from_fn(|k| y[k] * sc[k]),
                    dalpha_dx: ax * 1e-2,
                    dalpha_dy: ay * 1e-2,
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn eigensystem_identities(w in arb_state()) {
            let eos = water_air();
            let sys = build_characteristic_system(&w, &eos).unwrap();
            let rl = mat_mul(&sys.right, &sys.left);
            for i in 0..5 {
                for j in 0..5 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    // Entries of R L mix 1/c^2 with rho c; scale by their product.
                    prop_assert!((rl[i][j] - expect).abs() < 1e-12, "RL[{i}][{j}] = {}", rl[i][j]);
                }
            }
            let a = a_matrix(&w, sys.sound_speed);
            let lam: Mat5 = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { sys.eigenvalues[i] } else { 0.0 }));
            let ral = mat_mul(&mat_mul(&sys.right, &lam), &sys.left);
            for i in 0..5 {
                for j in 0..5 {
                    let scale = a[i][j].abs().max(w.u.abs() + sys.sound_speed).max(1e-300);
                    prop_assert!((ral[i][j] - a[i][j]).abs() <= 1e-12 * scale, "A[{i}][{j}]: {} vs {}", ral[i][j], a[i][j]);
                }
            }
        }

        #[test]
        fn smooth_data_gives_lax_wendroff(w in arb_state(), s in arb_slopes()) {
            let eos = water_air();
            let sys = build_characteristic_system(&w, &eos).unwrap();
            let got = acoustic_time_derivatives(&sys, &w, &s, &s, true);
            let (expect, scale) = lax_wendroff(&w, sys.sound_speed, &s);
            for k in 0..5 {
                prop_assert!((got[k] - expect[k]).abs() <= 1e-12 * scale[k].max(1e-300),
                    "component {k}: {} vs {}", got[k], expect[k]);
            }
        }

        #[test]
        fn alpha_chain_matches_direct_form(w in arb_state(), s in arb_slopes()) {
            let eos = water_air();
            let res = solve_grp(&w, &w, &s, &s, &eos, true).unwrap();
            let (u, v, a) = (w.u, w.v, w.alpha1);
            let k = eos.source_coefficient(w.p, a);
            let div = s.dv_dx[U] + s.dv_dy[V];
            let direct = -u * s.dalpha_dx - v * s.dalpha_dy + a * (k - 1.0) * div;
            let scale = (u * s.dalpha_dx).abs() + (v * s.dalpha_dy).abs() + (a * (k - 1.0) * div).abs();
            prop_assert!((res.dalpha_dt - direct).abs() <= 1e-12 * scale.max(1e-300),
                "{} vs {direct}", res.dalpha_dt);
        }
    }

    #[test]
    fn single_phase_eigenvectors() {
        // Pure ideal gas: hand-written acoustic eigenvectors with c^2 = gamma p / rho.
        let eos = TwoPhaseEos::single(StiffenedGas::ideal(1.4));
        let w = PrimitiveState {
            zeta1: 1.0,
            rho: 1.0,
            u: 0.3,
            v: 0.0,
            p: 1.0,
            alpha1: 1.0,
        };
        let sys = build_characteristic_system(&w, &eos).unwrap();
        let c = 1.4f64.sqrt();
        assert!((sys.sound_speed - c).abs() < 1e-15);
        let a = a_matrix(&w, c);
        for (col, lam) in [(0usize, 0.3 - c), (4, 0.3 + c)] {
            let r: Vec5 = std::array::from_fn(|k| sys.right[k][col]);
            let expect = [
                0.0,
                1.0 / (c * c),
                if col == 0 { -1.0 / c } else { 1.0 / c },
                0.0,
                1.0,
            ];
            assert!(max_rel_diff(&r, &expect) < 1e-15);
            let ar = mat_vec(&a, &r);
            assert!(max_rel_diff(&ar, &r.map(|x| lam * x)) < 1e-14);
        }
    }

    #[test]
    fn zero_slopes_give_zero_derivatives() {
        let eos = water_air();
        let l = state(0.5, 1000.0, 50.0, 0.0, 0.0, 1e9);
        let r = state(0.5, 1000.0, 50.0, 0.0, 0.0, 1e5);
        let res = solve_grp(&l, &r, &SlopeSet::ZERO, &SlopeSet::ZERO, &eos, true).unwrap();
        assert_eq!(res.dv_dt, [0.0; 5]);
        assert_eq!(res.dalpha_dt, 0.0);
        let fan = solve_exact(&l, &r, &eos).unwrap();
        assert_eq!(res.star, fan.sample(0.0).unwrap());
    }

    #[test]
    fn identical_constant_data() {
        let eos = water_air();
        let w = state(0.3, 1000.0, 10.0, 5.0, -2.0, 2e5);
        let res = solve_grp(&w, &w, &SlopeSet::ZERO, &SlopeSet::ZERO, &eos, true).unwrap();
        assert_eq!(res.star, w);
        assert_eq!(res.dv_dt, [0.0; 5]);
        assert_eq!(res.dalpha_dt, 0.0);
    }

    #[test]
    fn density_slope_is_advected() {
        let eos = water_air();
        let w = state(0.5, 1000.0, 50.0, 40.0, 0.0, 1e6);
        let mut s = SlopeSet::ZERO;
        s.dv_dx[RHO] = 3.0;
        let res = solve_grp(&w, &w, &s, &s, &eos, false).unwrap();
        assert!((res.dv_dt[RHO] + 40.0 * 3.0).abs() < 1e-12 * 120.0);
        for k in [ZETA, U, V, P] {
            assert!(res.dv_dt[k].abs() < 1e-9, "component {k}: {}", res.dv_dt[k]);
        }
    }

    #[test]
    fn supersonic_star_uses_left_slopes_only() {
        let eos = TwoPhaseEos::single(StiffenedGas::ideal(1.4));
        let w = PrimitiveState {
            zeta1: 0.5,
            rho: 1.0,
            u: 5.0,
            v: 0.1,
            p: 1.0,
            alpha1: 0.5,
        };
        let mut sl = SlopeSet::ZERO;
        sl.dv_dx = [0.1, 0.2, -0.3, 0.4, 0.5];
        sl.dv_dy = [0.01, 0.02, 0.03, -0.04, 0.05];
        let garbage = SlopeSet {
            dv_dx: [9.0; 5],
            dv_dy: [-7.0; 5],
            dalpha_dx: 3.0,
            dalpha_dy: 4.0,
        };
        let a = solve_grp(&w, &w, &sl, &SlopeSet::ZERO, &eos, true).unwrap();
        let b = solve_grp(&w, &w, &sl, &garbage, &eos, true).unwrap();
        assert_eq!(a.dv_dt, b.dv_dt);
        assert_eq!(a.dalpha_dt, b.dalpha_dt);
    }

    #[test]
    fn isentropic_phase_slope_leaves_pressure_term_only() {
        let eos = water_air();
        let w = state(0.4, 1000.0, 20.0, 30.0, 0.0, 1e6);
        let rho1 = w.phase_density(crate::Phase::One);
        let c1sq = eos.phase1.rho_c2(w.p) / rho1;
        // Vary only rho1 (through rho at fixed zeta, alpha): rho1_x / rho1 = rho_x / rho.
        let drho1 = 0.7;
        let mut s = SlopeSet::ZERO;
        s.dv_dx[RHO] = drho1 * w.rho / rho1;
        s.dv_dx[P] = c1sq * drho1;
        let dp_dt = 12345.0;
        let got = phase_density_time_derivative(&w, dp_dt, &s, &eos, false).unwrap();
        let expect = dp_dt / eos.phase1.rho_c2(w.p);
        assert!(
            (got - expect).abs() <= 1e-10 * expect.abs(),
            "{got} vs {expect}"
        );
        assert_eq!(
            phase_density_time_derivative(&w, 0.0, &SlopeSet::ZERO, &eos, false),
            Some(0.0)
        );
    }

    #[test]
    fn phase_density_rate_matches_finite_difference() {
        // Evolve V and alpha by the smooth-data equations for a short time +-h and
        // difference rho1 = zeta1 rho / alpha1 centrally.
        let eos = water_air();
        let w = state(0.35, 1010.0, 12.0, 25.0, -7.0, 3e6);
        let s = SlopeSet {
            dv_dx: [2e-3, 40.0, -15.0, 3.0, 4e7],
            dv_dy: [-1e-3, 25.0, 6.0, -9.0, -2e7],
            dalpha_dx: 0.02,
            dalpha_dy: -0.01,
        };
        let res = solve_grp(&w, &w, &s, &s, &eos, true).unwrap();
        let c = wood_sound_speed(&w, &eos).unwrap();
        let (vt, _) = lax_wendroff(&w, c, &s);
        let k = eos.source_coefficient(w.p, w.alpha1);
        let at = -w.u * s.dalpha_dx - w.v * s.dalpha_dy
            + w.alpha1 * (k - 1.0) * (s.dv_dx[U] + s.dv_dy[V]);
        let rho1_at =
            |h: f64| (w.zeta1 + h * vt[ZETA]) * (w.rho + h * vt[RHO]) / (w.alpha1 + h * at);
        let h = 1e-7;
        let fd = (rho1_at(h) - rho1_at(-h)) / (2.0 * h);
        let rho1 = w.phase_density(crate::Phase::One);
        let got = phase_density_time_derivative(&w, res.dv_dt[P], &s, &eos, true).unwrap() * rho1;
        assert!((got - fd).abs() <= 1e-7 * fd.abs(), "{got} vs {fd}");
    }

    #[test]
    fn compression_raises_air_fraction_per_source_sign() {
        // Uniform alpha and zeta, u_x < 0: dalpha1/dt = alpha1 (K - 1) u_x.
        let eos = water_air();
        let w = state(0.5, 1000.0, 50.0, 0.0, 0.0, 1e6);
        let mut s = SlopeSet::ZERO;
        s.dv_dx[U] = -100.0;
        let res = solve_grp(&w, &w, &s, &s, &eos, false).unwrap();
        let k = eos.source_coefficient(w.p, w.alpha1);
        let direct = w.alpha1 * (k - 1.0) * s.dv_dx[U];
        assert!((res.dalpha_dt - direct).abs() <= 1e-12 * direct.abs());
        // Air is far more compressible: K < 1 and the water fraction grows.
        assert!(k < 1.0 && res.dalpha_dt > 0.0);
    }

    #[test]
    fn pure_phase_star_has_no_alpha_rate() {
        let eos = water_air();
        let w = state(1.0 - 1e-8, 1000.0, 1.0, 10.0, 0.0, 1e6);
        let mut s = SlopeSet::ZERO;
        s.dv_dx[U] = -50.0;
        s.dalpha_dx = 1e-3;
        let res = solve_grp(&w, &w, &s, &s, &eos, false).unwrap();
        assert_eq!(res.dalpha_dt, 0.0);
        assert_eq!(alpha_time_derivative(&w, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn rotation_round_trip() {
        let s = SlopeSet {
            dv_dx: [1.0, 2.0, 3.0, 4.0, 5.0],
            dv_dy: [6.0, 7.0, 8.0, 9.0, 10.0],
            dalpha_dx: 0.1,
            dalpha_dy: 0.2,
        };
        assert_eq!(s.rotated().rotated(), s);
        assert_eq!(s.rotated().dv_dx, [6.0, 7.0, 9.0, 8.0, 10.0]);
    }

    #[test]
    fn mirrored_data_give_mirrored_derivatives() {
        let eos = water_air();
        let l = state(0.6, 1000.0, 40.0, 20.0, 0.0, 2e6);
        let r = state(0.4, 990.0, 30.0, -10.0, 0.0, 1e6);
        let sl = SlopeSet {
            dv_dx: [1e-3, 5.0, -2.0, 0.0, 1e5],
            dalpha_dx: 0.01,
            ..SlopeSet::ZERO
        };
        let sr = SlopeSet {
            dv_dx: [-2e-3, 3.0, 1.0, 0.0, -3e5],
            dalpha_dx: -0.02,
            ..SlopeSet::ZERO
        };
        let flip = |w: &PrimitiveState| PrimitiveState { u: -w.u, ..*w };
        let flip_s = |s: &SlopeSet| {
            let mut d = s.dv_dx.map(|x| -x);
            d[U] = s.dv_dx[U];
            SlopeSet {
                dv_dx: d,
                dalpha_dx: -s.dalpha_dx,
                ..*s
            }
        };
        for transverse in [false, true] {
            let a = solve_grp(&l, &r, &sl, &sr, &eos, transverse).unwrap();
            let b = solve_grp(
                &flip(&r),
                &flip(&l),
                &flip_s(&sr),
                &flip_s(&sl),
                &eos,
                transverse,
            )
            .unwrap();
            assert_eq!(a, b.mirrored());
            assert_eq!(flip_s(&sl), sl.mirrored());
        }
    }
}
