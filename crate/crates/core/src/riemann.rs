//! Exact solution of the planar two-phase Riemann problem with constant data.
//!
//! Shocks follow the per-phase Hugoniot relations
//!
//! ```text
//! zeta_k = zeta_k0,  rho (u - sigma) = rho0 (u0 - sigma) = m,
//! p - p0 = m^2 (tau - tau0),  e_k - e_k0 + (p + p0)/2 (tau_k - tau_k0) = 0,
//! ```
//!
//! which for stiffened gases are linear in each phase specific volume `tau_k`, so the
//! post-shock state is explicit in the post-shock pressure. Rarefactions follow the
//! per-phase isentropes, and the velocity is the Riemann invariant `du = -+ dp / (rho c)`
//! with the Wood sound speed, integrated by adaptive quadrature.

use serde::{Deserialize, Serialize};

use crate::eos::{wood_sound_speed, PrimitiveState, StiffenedGas, TwoPhaseEos, VANISHED_FRACTION};
use crate::error::SolverError;
use crate::quadrature;

const QUAD_RTOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wave {
    Shock { speed: f64, mass_flux: f64 },
    Rarefaction { head: f64, tail: f64 },
}

impl Wave {
    pub fn is_shock(&self) -> bool {
        matches!(self, Wave::Shock { .. })
    }
}

/// Two rarefactions that fail to meet leave a region of vanishing density between
/// `left_front` and `right_front`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vacuum {
    pub left_front: f64,
    pub right_front: f64,
}

#[derive(Debug, Clone, Copy)]
struct PhaseRef {
    zeta: f64,
    tau0: f64,
    gas: StiffenedGas,
    present: bool,
}

/// Pre-wave data of one side, with everything the wave curves need precomputed.
#[derive(Debug, Clone, Copy)]
struct Side {
    state: PrimitiveState,
    tau0: f64,
    c0: f64,
    phases: [PhaseRef; 2],
    floor: f64,
}

impl Side {
    fn new(state: PrimitiveState, eos: &TwoPhaseEos) -> Result<Self, SolverError> {
        state.validate(eos)?;
        let c0 = wood_sound_speed(&state, eos)?;
        let make = |alpha: f64, zeta: f64, gas: StiffenedGas| {
            let present = alpha > VANISHED_FRACTION && zeta > 0.0;
            PhaseRef {
                zeta,
                tau0: if present {
                    alpha / (zeta * state.rho)
                } else {
                    0.0
                },
                gas,
                present,
            }
        };
        let phases = [
            make(state.alpha1, state.zeta1, eos.phase1),
            make(state.alpha2(), state.zeta2(), eos.phase2),
        ];
        let floor = phases
            .iter()
            .filter(|ph| ph.present)
            .map(|ph| -ph.gas.pi)
            .fold(f64::NEG_INFINITY, f64::max);
        if floor == f64::NEG_INFINITY {
            return Err(SolverError::InvalidState(format!(
                "no phase present in {state:?}"
            )));
        }
        Ok(Self {
            state,
            tau0: 1.0 / state.rho,
            c0,
            phases,
            floor,
        })
    }

    /// Post-shock phase specific volumes and the mixture specific volume with its
    /// pressure derivative.
    fn shock_volumes(&self, p: f64) -> ([f64; 2], f64, f64) {
        let p0 = self.state.p;
        let mut taus = [0.0; 2];
        let mut tau = self.tau0;
        let mut dtau = 0.0;
        for (k, ph) in self.phases.iter().enumerate() {
            if !ph.present {
                continue;
            }
            let g = ph.gas.gamma;
            let avg = 0.5 * (p + p0);
            let num = (p0 + g * ph.gas.pi) / (g - 1.0) + avg;
            let den = (p + g * ph.gas.pi) / (g - 1.0) + avg;
            let tk = ph.tau0 * num / den;
            let dtk = ph.tau0 * (0.5 * den - num * (1.0 / (g - 1.0) + 0.5)) / (den * den);
            taus[k] = tk;
            tau += ph.zeta * (tk - ph.tau0);
            dtau += ph.zeta * dtk;
        }
        (taus, tau, dtau)
    }

    fn isentrope_volumes(&self, p: f64) -> ([f64; 2], f64) {
        let p0 = self.state.p;
        let mut taus = [0.0; 2];
        let mut tau = self.tau0;
        for (k, ph) in self.phases.iter().enumerate() {
            if !ph.present {
                continue;
            }
            let ratio = (p0 + ph.gas.pi) / (p + ph.gas.pi);
            let tk = ph.tau0 * ratio.powf(1.0 / ph.gas.gamma);
            taus[k] = tk;
            tau += ph.zeta * (tk - ph.tau0);
        }
        (taus, tau)
    }

    /// `1 / (rho c)` along the isentrope through the pre-wave state.
    fn inverse_impedance(&self, p: f64) -> f64 {
        let p0 = self.state.p;
        let mut sum = 0.0;
        for ph in self.phases.iter().filter(|ph| ph.present) {
            let pp = p + ph.gas.pi;
            let tk = ph.tau0 * ((p0 + ph.gas.pi) / pp).powf(1.0 / ph.gas.gamma);
            sum += ph.zeta * tk / (ph.gas.gamma * pp);
        }
        sum.sqrt()
    }

    /// `int_p^p0 dp' / (rho c)` for `p <= p0`.
    fn isentrope_integral(&self, p: f64) -> f64 {
        self.impedance_integral(p, self.state.p)
    }

    /// As [`Self::isentrope_integral`], reusing the value `cache = (p', I(p'))` of a
    /// nearby pressure. Iterations that move in small steps then only integrate the
    /// increment. The cache is updated.
    fn isentrope_integral_cached(&self, p: f64, cache: &mut Option<(f64, f64)>) -> f64 {
        let p0 = self.state.p;
        let value = match *cache {
            Some((pc, ic)) if (p - pc).abs() < p0 - p => {
                if p < pc {
                    ic + self.impedance_integral(p, pc)
                } else {
                    ic - self.impedance_integral(pc, p)
                }
            }
            _ => self.isentrope_integral(p),
        };
        *cache = Some((p, value));
        value
    }

    /// `int_a^b dp / (rho c)` along the isentrope, zero unless `a < b`.
    fn impedance_integral(&self, a: f64, b: f64) -> f64 {
        if a >= b {
            return 0.0;
        }
        let span = b - self.floor;
        let lo = a - self.floor;
        if lo > 10.0 * (b - a) {
            return quadrature::integrate(|x| self.inverse_impedance(x), a, b, QUAD_RTOL).0;
        }
        // The integrand behaves like a power of the distance to the floor, where it
        // is singular; with p = floor + s^q it becomes smooth and bounded.
        let gamma = self
            .phases
            .iter()
            .filter(|ph| ph.present && -ph.gas.pi == self.floor)
            .map(|ph| ph.gas.gamma)
            .fold(f64::INFINITY, f64::min);
        let q = (2.0 * gamma / (gamma - 1.0)).ceil().clamp(2.0, 16.0) as i32;
        let s_lo = lo.max(0.0).powf(1.0 / q as f64);
        let s_hi = span.powf(1.0 / q as f64);
        let floor = self.floor;
        quadrature::integrate(
            |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let sq1 = s.powi(q - 1);
                self.inverse_impedance(floor + sq1 * s) * q as f64 * sq1
            },
            s_lo,
            s_hi,
            QUAD_RTOL,
        )
        .0
    }

    /// Velocity change across the wave facing this side: the star velocity is
    /// `u_L - f_L(p)` on the left and `u_R + f_R(p)` on the right. Returns `(f, df/dp)`.
    fn velocity_change(&self, p: f64) -> (f64, f64) {
        self.velocity_change_cached(p, &mut None)
    }

    fn velocity_change_cached(&self, p: f64, cache: &mut Option<(f64, f64)>) -> (f64, f64) {
        let p0 = self.state.p;
        if p > p0 {
            let (_, tau, dtau) = self.shock_volumes(p);
            let g = (p - p0) * (self.tau0 - tau);
            let f = g.max(0.0).sqrt();
            let df = if f > 0.0 {
                ((self.tau0 - tau) - (p - p0) * dtau) / (2.0 * f)
            } else {
                1.0 / (self.state.rho * self.c0)
            };
            (f, df)
        } else if p == p0 {
            (0.0, 1.0 / (self.state.rho * self.c0))
        } else {
            (
                -self.isentrope_integral_cached(p, cache),
                self.inverse_impedance(p),
            )
        }
    }

    /// Mass flux through a shock reaching pressure `p`.
    fn mass_flux(&self, p: f64) -> f64 {
        let p0 = self.state.p;
        let (_, tau, dtau) = self.shock_volumes(p);
        if p > p0 && self.tau0 > tau {
            ((p - p0) / (self.tau0 - tau)).sqrt()
        } else {
            // Zero-strength limit: the acoustic impedance.
            (-1.0 / dtau).sqrt()
        }
    }

    /// State behind the wave at pressure `p` with velocity `u`.
    fn behind(&self, p: f64, u: f64) -> PrimitiveState {
        let (taus, tau) = if p >= self.state.p {
            let (t, tau, _) = self.shock_volumes(p);
            (t, tau)
        } else {
            self.isentrope_volumes(p)
        };
        let alpha1 = if self.phases[0].present {
            (self.phases[0].zeta * taus[0] / tau).clamp(0.0, 1.0)
        } else if self.phases[1].present {
            (1.0 - self.phases[1].zeta * taus[1] / tau).clamp(0.0, 1.0)
        } else {
            self.state.alpha1
        };
        PrimitiveState {
            zeta1: self.state.zeta1,
            rho: 1.0 / tau,
            u,
            v: self.state.v,
            p,
            alpha1,
        }
    }
}

/// Post-shock velocity, state and shock speed for a shock of post-shock pressure
/// `p_star` moving into `pre`, for a left-facing (`-1`) or right-facing (`+1`) wave.
pub fn shock_branch(
    p_star: f64,
    pre: &PrimitiveState,
    eos: &TwoPhaseEos,
    direction: f64,
) -> Result<(f64, PrimitiveState, f64), SolverError> {
    if p_star < pre.p {
        return Err(SolverError::InfeasibleJump(format!(
            "shock pressure {p_star} below pre-shock pressure {}",
            pre.p
        )));
    }
    let side = Side::new(*pre, eos)?;
    let (f, _) = side.velocity_change(p_star);
    let (_, tau, _) = side.shock_volumes(p_star);
    if !(tau > 0.0) || !(tau <= side.tau0) {
        return Err(SolverError::InfeasibleJump(format!(
            "post-shock specific volume {tau}"
        )));
    }
    let u = pre.u + direction * f;
    let m = side.mass_flux(p_star);
    let sigma = pre.u + direction * m * side.tau0;
    Ok((u, side.behind(p_star, u), sigma))
}

/// Post-rarefaction velocity and state at pressure `p_star`, with the head and tail
/// characteristic speeds.
pub fn rarefaction_branch(
    p_star: f64,
    pre: &PrimitiveState,
    eos: &TwoPhaseEos,
    direction: f64,
) -> Result<(f64, PrimitiveState, f64, f64), SolverError> {
    if p_star > pre.p {
        return Err(SolverError::InvalidState(format!(
            "rarefaction pressure {p_star} above pre-wave pressure {}",
            pre.p
        )));
    }
    let side = Side::new(*pre, eos)?;
    if p_star <= side.floor {
        return Err(SolverError::CavitationLimit { floor: side.floor });
    }
    let (f, _) = side.velocity_change(p_star);
    let u = pre.u + direction * f;
    let behind = side.behind(p_star, u);
    let c = wood_sound_speed(&behind, eos)?;
    let head = pre.u + direction * side.c0;
    let tail = u + direction * c;
    Ok((u, behind, head, tail))
}

/// Complete self-similar solution of a Riemann problem.
#[derive(Debug, Clone, Copy)]
pub struct WaveFan {
    pub p_star: f64,
    pub u_star: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
    pub left_star: PrimitiveState,
    pub right_star: PrimitiveState,
    pub vacuum: Option<Vacuum>,
    left: Side,
    right: Side,
    eos: TwoPhaseEos,
}

pub fn solve_exact(
    left: &PrimitiveState,
    right: &PrimitiveState,
    eos: &TwoPhaseEos,
) -> Result<WaveFan, SolverError> {
    let l = Side::new(*left, eos)?;
    let r = Side::new(*right, eos)?;
    let du = right.u - left.u;
    let floor = l.floor.max(r.floor);
    let scale = 1f64
        .max(left.u.abs())
        .max(right.u.abs())
        .max(l.c0)
        .max(r.c0);
    let tol = 1e-13 * scale;

    let (mut cache_l, mut cache_r) = (None, None);
    let mut residual = |p: f64| {
        let (fl, dfl) = l.velocity_change_cached(p, &mut cache_l);
        let (fr, dfr) = r.velocity_change_cached(p, &mut cache_r);
        (fl + fr + du, dfl + dfr)
    };

    let p_star = if left == right {
        left.p
    } else {
        // The residual increases with p. Probing the lower initial pressure first
        // avoids the singular integrals down to the floor unless both waves are
        // rarefactions, and even then the floor is only examined once the
        // iteration heads towards it.
        let p_min = left.p.min(right.p);
        let (f_min, _) = residual(p_min);
        let (mut lo, mut hi) = if f_min < 0.0 {
            (p_min, f64::INFINITY)
        } else {
            (floor, p_min)
        };
        let mut floor_checked = f_min < 0.0;
        // Acoustic (linearised) guess.
        let zl = left.rho * l.c0;
        let zr = right.rho * r.c0;
        let guess = (zl * right.p + zr * left.p + zl * zr * (left.u - right.u)) / (zl + zr);
        let mut p = if guess > lo && guess < hi {
            guess
        } else if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            2.0 * lo - floor
        };
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (f, df) = residual(p);
            if f.abs() <= tol {
                converged = true;
                break;
            }
            if f < 0.0 {
                lo = p;
                floor_checked = true;
            } else {
                hi = p;
            }
            if !floor_checked && hi - floor <= 1e-6 * (p_min - floor) {
                floor_checked = true;
                if residual(floor).0 >= 0.0 {
                    return Ok(vacuum_fan(l, r, floor, *eos));
                }
            }
            let newton = p - f / df;
            let next = if newton > lo && newton < hi && newton.is_finite() {
                newton
            } else if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                floor + 2.0 * (p - floor)
            };
            if hi.is_finite() && (hi - lo) <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
                p = next;
                converged = floor_checked;
                break;
            }
            p = next;
        }
        if !converged {
            return Err(SolverError::RiemannNonConvergence { lo, hi });
        }
        p
    };

    let (fl, _) = l.velocity_change_cached(p_star, &mut cache_l);
    let (fr, _) = r.velocity_change_cached(p_star, &mut cache_r);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let left_star = l.behind(p_star, u_star);
    let right_star = r.behind(p_star, u_star);

    let left_wave = if p_star > left.p {
        Wave::Shock {
            speed: left.u - l.mass_flux(p_star) * l.tau0,
            mass_flux: l.mass_flux(p_star),
        }
    } else {
        Wave::Rarefaction {
            head: left.u - l.c0,
            tail: u_star - wood_sound_speed(&left_star, eos)?,
        }
    };
    let right_wave = if p_star > right.p {
        Wave::Shock {
            speed: right.u + r.mass_flux(p_star) * r.tau0,
            mass_flux: r.mass_flux(p_star),
        }
    } else {
        Wave::Rarefaction {
            head: right.u + r.c0,
            tail: u_star + wood_sound_speed(&right_star, eos)?,
        }
    };

    Ok(WaveFan {
        p_star,
        u_star,
        left_wave,
        right_wave,
        left_star,
        right_star,
        vacuum: None,
        left: l,
        right: r,
        eos: *eos,
    })
}

fn vacuum_fan(l: Side, r: Side, floor: f64, eos: TwoPhaseEos) -> WaveFan {
    let left_front = l.state.u + l.isentrope_integral(floor);
    let right_front = r.state.u - r.isentrope_integral(floor);
    let near_floor = |s: &Side| floor + (s.state.p - floor) * 1e-12;
    let mut left_star = l.behind(near_floor(&l), left_front);
    let mut right_star = r.behind(near_floor(&r), right_front);
    left_star.rho = 0.0;
    left_star.p = floor;
    right_star.rho = 0.0;
    right_star.p = floor;
    WaveFan {
        p_star: floor,
        u_star: 0.5 * (left_front + right_front),
        left_wave: Wave::Rarefaction {
            head: l.state.u - l.c0,
            tail: left_front,
        },
        right_wave: Wave::Rarefaction {
            head: r.state.u + r.c0,
            tail: right_front,
        },
        left_star,
        right_star,
        vacuum: Some(Vacuum {
            left_front,
            right_front,
        }),
        left: l,
        right: r,
        eos,
    }
}

impl WaveFan {
    pub fn left_state(&self) -> &PrimitiveState {
        &self.left.state
    }

    pub fn right_state(&self) -> &PrimitiveState {
        &self.right.state
    }

    /// Solution at similarity coordinate `xi = x / t`. Inside a vacuum region the
    /// returned state has zero density, floor pressure and velocity `xi`.
    pub fn sample(&self, xi: f64) -> Result<PrimitiveState, SolverError> {
        if let Some(vac) = self.vacuum {
            if xi >= vac.left_front && xi <= vac.right_front {
                let mut s = if xi < 0.0 {
                    self.left_star
                } else {
                    self.right_star
                };
                s.u = xi;
                return Ok(s);
            }
            return if xi < vac.left_front {
                self.sample_side(xi, &self.left, self.left_wave, self.left_star, -1.0)
            } else {
                self.sample_side(xi, &self.right, self.right_wave, self.right_star, 1.0)
            };
        }
        if xi < self.u_star {
            self.sample_side(xi, &self.left, self.left_wave, self.left_star, -1.0)
        } else if xi > self.u_star {
            self.sample_side(xi, &self.right, self.right_wave, self.right_star, 1.0)
        } else {
            let (l, r) = (self.left_star, self.right_star);
            Ok(PrimitiveState {
                zeta1: 0.5 * (l.zeta1 + r.zeta1),
                rho: 0.5 * (l.rho + r.rho),
                u: self.u_star,
                v: 0.5 * (l.v + r.v),
                p: self.p_star,
                alpha1: 0.5 * (l.alpha1 + r.alpha1),
            })
        }
    }

    fn sample_side(
        &self,
        xi: f64,
        side: &Side,
        wave: Wave,
        star: PrimitiveState,
        direction: f64,
    ) -> Result<PrimitiveState, SolverError> {
        // `direction * (xi - speed) > 0` means xi lies beyond the wave, in the undisturbed state.
        match wave {
            Wave::Shock { speed, .. } => {
                if direction * (xi - speed) > 0.0 {
                    Ok(side.state)
                } else {
                    Ok(star)
                }
            }
            Wave::Rarefaction { head, tail } => {
                if direction * (xi - head) >= 0.0 {
                    Ok(side.state)
                } else if direction * (xi - tail) <= 0.0 {
                    Ok(star)
                } else {
                    self.inside_fan(xi, side, direction)
                }
            }
        }
    }

    /// State inside a rarefaction fan: the pressure at which the characteristic speed
    /// `u -+ c` equals `xi`, located by bisection.
    fn inside_fan(
        &self,
        xi: f64,
        side: &Side,
        direction: f64,
    ) -> Result<PrimitiveState, SolverError> {
        let p0 = side.state.p;
        let mut cache = None;
        let mut speed_at = |p: f64| -> Result<(f64, PrimitiveState), SolverError> {
            let u = side.state.u - direction * side.isentrope_integral_cached(p, &mut cache);
            let s = side.behind(p, u);
            let c = wood_sound_speed(&s, &self.eos)?;
            Ok((u + direction * c, s))
        };
        let mut hi = p0;
        let mut lo = if self.vacuum.is_some() {
            self.p_star + (p0 - self.p_star) * 1e-12
        } else {
            self.p_star
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (speed, _) = speed_at(mid)?;
            // The speed moves away from xi as the pressure rises towards the head.
            if direction * (speed - xi) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(speed_at(0.5 * (lo + hi))?.1)
    }
}

/// The same fan viewed with the x axis reversed.
pub fn mirror(state: &PrimitiveState) -> PrimitiveState {
    PrimitiveState {
        u: -state.u,
        ..*state
    }
}
