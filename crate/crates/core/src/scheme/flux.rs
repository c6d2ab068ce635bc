use crate::eos::{
    conserved_to_primitive, primitive_to_conserved, ConservedState, PrimitiveState, TwoPhaseEos,
};
use crate::error::SolverError;
use crate::grp::GrpResult;

/// Everything the cell update needs from one interface, in the interface's normal frame
/// (`u` is the normal velocity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceRecord {
    pub grp: GrpResult,
    /// Mid-time flux of `(zeta1 rho, rho, rho u, rho v, rho E, alpha1)`.
    pub flux: [f64; 6],
    /// Normal velocity extrapolated to the end of the step, `u* + dt u_t`.
    pub u_hat: f64,
    /// Mass fraction of the mid-time state.
    pub zeta_mid: f64,
}

/// Normal flux of the conserved variables plus the volume-fraction advection `u alpha1`.
pub fn physical_flux(w: &PrimitiveState, q: &ConservedState) -> [f64; 6] {
    let u = w.u;
    [
        w.zeta1 * q.mx,
        q.mx,
        q.mx * u + w.p,
        q.my * u,
        (q.en + w.p) * u,
        u * w.alpha1,
    ]
}

/// Conserved-variable time derivative from the primitive one by the chain rule.
fn conserved_rate(w: &PrimitiveState, dv: &[f64; 5], dalpha: f64, eos: &TwoPhaseEos) -> [f64; 5] {
    let [zt, rt, ut, vt, pt] = *dv;
    let (g1, g2) = (eos.phase1.gamma, eos.phase2.gamma);
    let de_dp = w.alpha1 / (g1 - 1.0) + (1.0 - w.alpha1) / (g2 - 1.0);
    let de_dalpha = eos.phase1.rho_e(w.p) - eos.phase2.rho_e(w.p);
    [
        zt * w.rho + w.zeta1 * rt,
        rt,
        rt * w.u + w.rho * ut,
        rt * w.v + w.rho * vt,
        de_dp * pt
            + de_dalpha * dalpha
            + 0.5 * rt * (w.u * w.u + w.v * w.v)
            + w.rho * (w.u * ut + w.v * vt),
    ]
}

/// Mid-time flux `F(U* + dt/2 U_t)`. A vacuum star carries only its floor pressure.
pub fn compute_interface_flux(
    grp: &GrpResult,
    dt: f64,
    eos: &TwoPhaseEos,
    index: usize,
) -> Result<InterfaceRecord, SolverError> {
    let star = &grp.star;
    if grp.vacuum {
        return Ok(InterfaceRecord {
            grp: *grp,
            flux: [0.0, 0.0, star.p, 0.0, 0.0, 0.0],
            u_hat: star.u,
            zeta_mid: star.zeta1,
        });
    }
    let q = primitive_to_conserved(star, eos);
    let rate = conserved_rate(star, &grp.dv_dt, grp.dalpha_dt, eos);
    let h = 0.5 * dt;
    let mid = ConservedState {
        zr: q.zr + h * rate[0],
        rho: q.rho + h * rate[1],
        mx: q.mx + h * rate[2],
        my: q.my + h * rate[3],
        en: q.en + h * rate[4],
        alpha1: star.alpha1 + h * grp.dalpha_dt,
    };
    // Without a time increment the star state is used as is: a cold star next to a
    // vacuum may not survive the round trip through the total energy.
    let w = if dt == 0.0 {
        *star
    } else {
        conserved_to_primitive(&mid, eos).map_err(|e| SolverError::FluxFailure {
            index,
            reason: e.to_string(),
        })?
    };
    let mut flux = physical_flux(&w, &mid);
    // The volume-fraction flux is the Taylor expansion of `u alpha1` itself, so that its
    // divergence is exactly the quantity bounded by the time-step controller.
    let ut = grp.dv_dt[2];
    flux[5] = star.u * star.alpha1 + h * (ut * star.alpha1 + star.u * grp.dalpha_dt);
    Ok(InterfaceRecord {
        grp: *grp,
        flux,
        u_hat: star.u + dt * ut,
        zeta_mid: w.zeta1,
    })
}

/// Makes the phase-1 mass flux carry a mass fraction taken from where the mass comes
/// from. `traces` are the mass fractions on the two sides of the interface. While the
/// mid-time mass flux runs the same way as the star velocity the mid-time fraction is
/// kept, limited to the range of the traces; otherwise the upwind trace is used. A
/// cell free of phase 1 then never loses phase-1 mass.
pub fn upwind_fraction_flux(rec: &mut InterfaceRecord, traces: [f64; 2]) {
    let m = rec.flux[1];
    let upwind = if m > 0.0 { traces[0] } else { traces[1] };
    let zeta = if (m > 0.0) == (rec.grp.star.u > 0.0) {
        rec.zeta_mid
            .clamp(traces[0].min(traces[1]), traces[0].max(traces[1]))
    } else {
        upwind
    };
    rec.flux[0] = zeta * m;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::StiffenedGas;

    fn water_air() -> TwoPhaseEos {
        TwoPhaseEos::new(
            StiffenedGas::new(4.4, 6e8).unwrap(),
            StiffenedGas::ideal(1.4),
        )
    }

    fn still(w: PrimitiveState) -> GrpResult {
        GrpResult {
            star: w,
            dv_dt: [0.0; 5],
            dalpha_dt: 0.0,
            vacuum: false,
        }
    }

    #[test]
    fn uniform_flow_flux_is_analytic() {
        let eos = water_air();
        let w = PrimitiveState::from_phase_densities(0.4, 1000.0, 20.0, 30.0, -4.0, 2e6);
        let rec = compute_interface_flux(&still(w), 1e-5, &eos, 0).unwrap();
        let rho_e = eos.mixture_rho_e(w.p, w.alpha1);
        let en = rho_e + 0.5 * w.rho * (w.u * w.u + w.v * w.v);
        let expect = [
            w.zeta1 * w.rho * w.u,
            w.rho * w.u,
            w.rho * w.u * w.u + w.p,
            w.rho * w.u * w.v,
            (en + w.p) * w.u,
            w.u * w.alpha1,
        ];
        for k in 0..6 {
            assert!(
                (rec.flux[k] - expect[k]).abs() <= 1e-12 * expect[k].abs().max(1.0),
                "{k}"
            );
        }
        assert_eq!(rec.u_hat, w.u);
    }

    #[test]
    fn zero_dt_gives_star_flux() {
        let eos = water_air();
        let w = PrimitiveState::from_phase_densities(0.4, 1000.0, 20.0, 30.0, 0.0, 2e6);
        let grp = GrpResult {
            star: w,
            dv_dt: [1e-3, 5.0, -40.0, 2.0, 1e7],
            dalpha_dt: 0.3,
            vacuum: false,
        };
        let a = compute_interface_flux(&grp, 0.0, &eos, 0).unwrap();
        let b = compute_interface_flux(&still(w), 0.0, &eos, 0).unwrap();
        for k in 0..6 {
            assert!((a.flux[k] - b.flux[k]).abs() <= 1e-12 * a.flux[k].abs().max(1.0));
        }
    }

    #[test]
    fn chain_rule_matches_finite_difference() {
        let eos = water_air();
        let w = PrimitiveState::from_phase_densities(0.4, 1000.0, 20.0, 30.0, -7.0, 2e6);
        let dv = [1e-3, 5.0, -40.0, 2.0, 1e7];
        let da = 0.3;
        let rate = conserved_rate(&w, &dv, da, &eos);
        let at = |h: f64| {
            let s = PrimitiveState {
                zeta1: w.zeta1 + h * dv[0],
                rho: w.rho + h * dv[1],
                u: w.u + h * dv[2],
                v: w.v + h * dv[3],
                p: w.p + h * dv[4],
                alpha1: w.alpha1 + h * da,
            };
            primitive_to_conserved(&s, &eos).to_array()
        };
        let h = 1e-6;
        let (a, b) = (at(h), at(-h));
        for k in 0..5 {
            let fd = (a[k] - b[k]) / (2.0 * h);
            assert!(
                (rate[k] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                "{k}: {} vs {fd}",
                rate[k]
            );
        }
    }

    #[test]
    fn alpha_flux_is_linear_in_dt() {
        let eos = water_air();
        let w = PrimitiveState::from_phase_densities(0.4, 1000.0, 20.0, 30.0, 0.0, 2e6);
        let grp = GrpResult {
            star: w,
            dv_dt: [0.0, 5.0, -40.0, 0.0, 1e7],
            dalpha_dt: 0.3,
            vacuum: false,
        };
        let dt = 1e-4;
        let rec = compute_interface_flux(&grp, dt, &eos, 0).unwrap();
        let expect = w.u * w.alpha1 + 0.5 * dt * (-40.0 * w.alpha1 + w.u * 0.3);
        assert!((rec.flux[5] - expect).abs() <= 1e-14);
    }

    #[test]
    fn infeasible_mid_state_names_the_interface() {
        let eos = water_air();
        let w = PrimitiveState::from_phase_densities(0.4, 1000.0, 20.0, 0.0, 0.0, 2e6);
        let grp = GrpResult {
            star: w,
            dv_dt: [0.0, -1e9, 0.0, 0.0, 0.0],
            dalpha_dt: 0.0,
            vacuum: false,
        };
        match compute_interface_flux(&grp, 1.0, &eos, 17) {
            Err(SolverError::FluxFailure { index, .. }) => assert_eq!(index, 17),
            other => panic!("{other:?}"),
        }
    }

    fn record(m: f64, star_u: f64, zeta_mid: f64) -> InterfaceRecord {
        let w = PrimitiveState {
            zeta1: 0.5,
            rho: 1.0,
            u: star_u,
            v: 0.0,
            p: 1e5,
            alpha1: 0.5,
        };
        InterfaceRecord {
            grp: still(w),
            flux: [0.0, m, 0.0, 0.0, 0.0, 0.0],
            u_hat: star_u,
            zeta_mid,
        }
    }

    #[test]
    fn fraction_flux_keeps_consistent_mid_value() {
        let mut rec = record(2.0, 1.0, 0.3);
        upwind_fraction_flux(&mut rec, [0.2, 0.4]);
        assert_eq!(rec.flux[0], 0.6);
        // Limited to the range of the traces.
        let mut rec = record(-2.0, -1.0, 0.9);
        upwind_fraction_flux(&mut rec, [0.2, 0.4]);
        assert_eq!(rec.flux[0], -0.8);
    }

    #[test]
    fn fraction_flux_falls_back_to_upwind_trace() {
        let mut rec = record(2.0, -1.0, 0.3);
        upwind_fraction_flux(&mut rec, [0.0, 1.0]);
        assert_eq!(rec.flux[0], 0.0, "left side has no phase 1");
        let mut rec = record(-2.0, 1.0, 0.3);
        upwind_fraction_flux(&mut rec, [0.0, 1.0]);
        assert_eq!(rec.flux[0], -2.0);
    }
}
