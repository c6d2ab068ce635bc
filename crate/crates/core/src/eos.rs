//! Stiffened-gas closures for two phases and the mixture state representations.
//!
//! Phase 1 is always the "first" material of a [`TwoPhaseEos`]; phase 2 quantities
//! (`alpha2`, `zeta2`) are complements and are never stored.

use serde::{Deserialize, Serialize};

use crate::error::{Phase, SolverError};

/// Volume fraction below which a phase is treated as absent for thermodynamic purposes.
pub const VANISHED_FRACTION: f64 = 1e-9;

/// Cells (and interface states) with `alpha1` outside `(ALPHA_CUTOFF, 1 - ALPHA_CUTOFF)`
/// are treated as pure for the stiff volume-fraction logic.
pub const ALPHA_CUTOFF: f64 = 1e-6;

/// Stiffened gas: `p = (gamma - 1) rho e - gamma pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffenedGas {
    pub gamma: f64,
    pub pi: f64,
}

impl StiffenedGas {
    pub fn new(gamma: f64, pi: f64) -> Result<Self, SolverError> {
        if !(gamma > 1.0) || !(pi >= 0.0) || !pi.is_finite() {
            return Err(SolverError::InvalidEos { gamma, pi });
        }
        Ok(Self { gamma, pi })
    }

    pub const fn ideal(gamma: f64) -> Self {
        Self { gamma, pi: 0.0 }
    }

    /// `rho_k c_k^2 = gamma (p + pi)`, the acoustic impedance squared over density.
    #[inline]
    pub fn rho_c2(&self, p: f64) -> f64 {
        self.gamma * (p + self.pi)
    }

    /// Volumetric internal energy `rho_k e_k` at pressure `p`.
    #[inline]
    pub fn rho_e(&self, p: f64) -> f64 {
        (p + self.gamma * self.pi) / (self.gamma - 1.0)
    }

    /// Isentrope constant `(p + pi) / rho^gamma`.
    #[inline]
    pub fn entropy(&self, p: f64, rho: f64) -> f64 {
        (p + self.pi) / rho.powf(self.gamma)
    }
}

/// Sound speed `sqrt(gamma (p + pi) / rho_k)` of a single stiffened-gas phase.
pub fn phase_sound_speed(
    p: f64,
    rho_k: f64,
    gas: &StiffenedGas,
    phase: Phase,
) -> Result<f64, SolverError> {
    let c2 = gas.rho_c2(p) / rho_k;
    if !(rho_k > 0.0) || !(c2 > 0.0) || !c2.is_finite() {
        return Err(SolverError::InvalidPhase {
            phase,
            p,
            rho: rho_k,
        });
    }
    Ok(c2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseEos {
    pub phase1: StiffenedGas,
    pub phase2: StiffenedGas,
}

impl TwoPhaseEos {
    pub const fn new(phase1: StiffenedGas, phase2: StiffenedGas) -> Self {
        Self { phase1, phase2 }
    }

    /// Both phases governed by the same law.
    pub const fn single(gas: StiffenedGas) -> Self {
        Self {
            phase1: gas,
            phase2: gas,
        }
    }

    #[inline]
    pub fn phase(&self, phase: Phase) -> &StiffenedGas {
        match phase {
            Phase::One => &self.phase1,
            Phase::Two => &self.phase2,
        }
    }

    /// Denominator of the mixture pressure relation:
    /// `L2(alpha) = (gamma2 - gamma1) alpha + gamma1 - 1`.
    #[inline]
    pub fn pressure_denominator(&self, alpha1: f64) -> f64 {
        (self.phase2.gamma - self.phase1.gamma) * alpha1 + self.phase1.gamma - 1.0
    }

    /// Numerator of the mixture pressure relation, `L1(alpha)`.
    #[inline]
    pub fn pressure_numerator(&self, rho_e: f64, alpha1: f64) -> f64 {
        let (g1, g2) = (self.phase1.gamma, self.phase2.gamma);
        (g1 - 1.0) * (g2 - 1.0) * rho_e
            - g1 * self.phase1.pi * (g2 - 1.0) * alpha1
            - g2 * self.phase2.pi * (g1 - 1.0) * (1.0 - alpha1)
    }

    /// Pressure in equilibrium with the volumetric internal energy `rho_e`.
    pub fn mixture_pressure(&self, rho_e: f64, alpha1: f64) -> Result<f64, SolverError> {
        let den = self.pressure_denominator(alpha1);
        if !(den > 0.0) {
            return Err(SolverError::DegenerateEos { alpha1 });
        }
        Ok(self.pressure_numerator(rho_e, alpha1) / den)
    }

    /// Volumetric internal energy of the mixture, the inverse of [`Self::mixture_pressure`].
    #[inline]
    pub fn mixture_rho_e(&self, p: f64, alpha1: f64) -> f64 {
        alpha1 * self.phase1.rho_e(p) + (1.0 - alpha1) * self.phase2.rho_e(p)
    }

    /// `1 / (rho c^2)` by the Wood formula. Vanished phases do not contribute.
    pub fn wood_compressibility(&self, p: f64, alpha1: f64) -> Result<f64, SolverError> {
        let mut sum = 0.0;
        for (phase, alpha) in [(Phase::One, alpha1), (Phase::Two, 1.0 - alpha1)] {
            if alpha <= VANISHED_FRACTION {
                continue;
            }
            let rc2 = self.phase(phase).rho_c2(p);
            if !(rc2 > 0.0) {
                return Err(SolverError::InvalidPhase {
                    phase,
                    p,
                    rho: f64::NAN,
                });
            }
            sum += alpha / rc2;
        }
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(SolverError::InvalidState(format!(
                "no phase present (alpha1 = {alpha1})"
            )));
        }
        Ok(sum)
    }

    /// The coefficient `K = rho2 c2^2 / (alpha1 rho2 c2^2 + alpha2 rho1 c1^2)` of the
    /// volume-fraction balance law, evaluated at pressure `p`.
    #[inline]
    pub fn source_coefficient(&self, p: f64, alpha1: f64) -> f64 {
        let (r1, r2) = (self.phase1.rho_c2(p), self.phase2.rho_c2(p));
        r2 / (alpha1 * r2 + (1.0 - alpha1) * r1)
    }

    /// The phase-swapped counterpart of [`Self::source_coefficient`]:
    /// `rho1 c1^2 / (alpha1 rho2 c2^2 + alpha2 rho1 c1^2)`.
    #[inline]
    pub fn complementary_source_coefficient(&self, p: f64, alpha1: f64) -> f64 {
        let (r1, r2) = (self.phase1.rho_c2(p), self.phase2.rho_c2(p));
        r1 / (alpha1 * r2 + (1.0 - alpha1) * r1)
    }

    /// Lowest pressure admissible for the phases present at volume fraction `alpha1`.
    pub fn pressure_floor(&self, alpha1: f64) -> f64 {
        let mut floor = f64::NEG_INFINITY;
        if alpha1 > VANISHED_FRACTION {
            floor = floor.max(-self.phase1.pi);
        }
        if 1.0 - alpha1 > VANISHED_FRACTION {
            floor = floor.max(-self.phase2.pi);
        }
        floor
    }
}

/// Primitive variables `(zeta1, rho, u, v, p, alpha1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub zeta1: f64,
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub alpha1: f64,
}

impl PrimitiveState {
    /// Builds a state from phase densities instead of mass fraction and mixture density.
    pub fn from_phase_densities(alpha1: f64, rho1: f64, rho2: f64, u: f64, v: f64, p: f64) -> Self {
        let rho = alpha1 * rho1 + (1.0 - alpha1) * rho2;
        Self {
            zeta1: alpha1 * rho1 / rho,
            rho,
            u,
            v,
            p,
            alpha1,
        }
    }

    #[inline]
    pub fn alpha2(&self) -> f64 {
        1.0 - self.alpha1
    }

    #[inline]
    pub fn zeta2(&self) -> f64 {
        1.0 - self.zeta1
    }

    #[inline]
    pub fn alpha(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.alpha1,
            Phase::Two => self.alpha2(),
        }
    }

    #[inline]
    pub fn zeta(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.zeta1,
            Phase::Two => self.zeta2(),
        }
    }

    /// Phase density `zeta_k rho / alpha_k`, with `alpha_k` clamped from below at
    /// [`VANISHED_FRACTION`].
    pub fn phase_density(&self, phase: Phase) -> f64 {
        self.zeta(phase) * self.rho / self.alpha(phase).max(VANISHED_FRACTION)
    }

    pub fn rho_e(&self, eos: &TwoPhaseEos) -> f64 {
        eos.mixture_rho_e(self.p, self.alpha1)
    }

    /// Mixture sound speed from the Wood formula.
    pub fn sound_speed(&self, eos: &TwoPhaseEos) -> Result<f64, SolverError> {
        wood_sound_speed(self, eos)
    }

    /// Same state with the velocity components exchanged; used to solve y-normal problems
    /// with the x-normal machinery.
    #[inline]
    pub fn swap_velocity(mut self) -> Self {
        std::mem::swap(&mut self.u, &mut self.v);
        self
    }

    pub fn is_finite(&self) -> bool {
        [self.zeta1, self.rho, self.u, self.v, self.p, self.alpha1]
            .iter()
            .all(|x| x.is_finite())
    }

    pub fn validate(&self, eos: &TwoPhaseEos) -> Result<(), SolverError> {
        if !self.is_finite() {
            return Err(SolverError::InvalidState(format!(
                "non-finite state {self:?}"
            )));
        }
        if !(self.rho > 0.0) {
            return Err(SolverError::InvalidState(format!(
                "non-positive density {}",
                self.rho
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha1) || !(0.0..=1.0).contains(&self.zeta1) {
            return Err(SolverError::InvalidState(format!(
                "fractions out of range: alpha1 = {}, zeta1 = {}",
                self.alpha1, self.zeta1
            )));
        }
        if !(self.p > eos.pressure_floor(self.alpha1)) {
            return Err(SolverError::InvalidState(format!(
                "pressure {} below the admissible floor {}",
                self.p,
                eos.pressure_floor(self.alpha1)
            )));
        }
        Ok(())
    }
}

/// Mixture sound speed: `1/(rho c^2) = alpha1/(rho1 c1^2) + alpha2/(rho2 c2^2)`.
pub fn wood_sound_speed(state: &PrimitiveState, eos: &TwoPhaseEos) -> Result<f64, SolverError> {
    let comp = eos.wood_compressibility(state.p, state.alpha1)?;
    if !(state.rho > 0.0) {
        return Err(SolverError::InvalidState(format!(
            "non-positive density {}",
            state.rho
        )));
    }
    Ok((1.0 / (state.rho * comp)).sqrt())
}

/// Conserved variables `(zeta1 rho, rho, rho u, rho v, rho E, alpha1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConservedState {
    pub zr: f64,
    pub rho: f64,
    pub mx: f64,
    pub my: f64,
    pub en: f64,
    pub alpha1: f64,
}

impl ConservedState {
    pub const ZERO: Self = Self {
        zr: 0.0,
        rho: 0.0,
        mx: 0.0,
        my: 0.0,
        en: 0.0,
        alpha1: 0.0,
    };

    pub fn to_array(self) -> [f64; 6] {
        [self.zr, self.rho, self.mx, self.my, self.en, self.alpha1]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            zr: a[0],
            rho: a[1],
            mx: a[2],
            my: a[3],
            en: a[4],
            alpha1: a[5],
        }
    }

    /// Internal energy per unit volume.
    #[inline]
    pub fn rho_e(&self) -> f64 {
        self.en - 0.5 * (self.mx * self.mx + self.my * self.my) / self.rho
    }
}

pub fn primitive_to_conserved(w: &PrimitiveState, eos: &TwoPhaseEos) -> ConservedState {
    let kinetic = 0.5 * w.rho * (w.u * w.u + w.v * w.v);
    ConservedState {
        zr: w.zeta1 * w.rho,
        rho: w.rho,
        mx: w.rho * w.u,
        my: w.rho * w.v,
        en: w.rho_e(eos) + kinetic,
        alpha1: w.alpha1,
    }
}

pub fn conserved_to_primitive(
    q: &ConservedState,
    eos: &TwoPhaseEos,
) -> Result<PrimitiveState, SolverError> {
    if !(q.rho > 0.0) || !q.rho.is_finite() {
        return Err(SolverError::InvalidState(format!(
            "non-positive density {}",
            q.rho
        )));
    }
    let rho_e = q.rho_e();
    if !rho_e.is_finite() {
        return Err(SolverError::InvalidState(format!(
            "non-finite energy in {q:?}"
        )));
    }
    let p = eos.mixture_pressure(rho_e, q.alpha1)?;
    let w = PrimitiveState {
        zeta1: q.zr / q.rho,
        rho: q.rho,
        u: q.mx / q.rho,
        v: q.my / q.rho,
        p,
        alpha1: q.alpha1,
    };
    w.validate(eos)?;
    Ok(w)
}
