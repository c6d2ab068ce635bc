use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::{compute_interface_flux, upwind_fraction_flux, InterfaceRecord};
use super::grid::{Boundary, FieldState, Grid};
use super::source::{
    alpha_predictor, alpha_step_bounds, cn_alpha_update, omega, SourceUpdateState,
};
use crate::eos::{
    conserved_to_primitive, primitive_to_conserved, wood_sound_speed, ConservedState,
    PrimitiveState, TwoPhaseEos, ALPHA_CUTOFF,
};
use crate::error::SolverError;
use crate::grp::{solve_grp, GrpResult, SlopeSet};
use crate::reconstruction::{
    compute_slopes, initial_slope, to_prim6, CellLinearData, Prim6, ReconstructionConfig, IDX_U,
    IDX_V,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub recon: ReconstructionConfig,
    /// Implicitness of the volume-fraction source, in `[0, 1]`.
    pub c_im: f64,
    /// How many times a step may halve its time step before giving up.
    pub max_retries: usize,
    pub vacuum: Option<VacuumGuard>,
}

/// Treatment of cells emptied by cavitation.
///
/// In a cell whose density falls below `density` the internal energy is round-off
/// left over from the neighbouring liquid, which yields unbounded sound speeds and
/// stalls the time step. Such cells are cooled at fixed density, velocity and volume
/// fraction until their mixture sound speed does not exceed `max_sound_speed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumGuard {
    pub density: f64,
    pub max_sound_speed: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.6,
            recon: ReconstructionConfig::default(),
            c_im: 0.5,
            max_retries: 40,
            vacuum: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::Config(format!(
                "CFL {} outside (0, 1]",
                self.cfl
            )));
        }
        if !(0.0..=1.0).contains(&self.c_im) {
            return Err(SolverError::Config(format!(
                "c_im {} outside [0, 1]",
                self.c_im
            )));
        }
        if let Some(g) = self.vacuum {
            if !(g.density > 0.0 && g.max_sound_speed > 0.0) {
                return Err(SolverError::Config(format!("invalid vacuum guard {g:?}")));
            }
        }
        ReconstructionConfig::new(self.recon.kappa).map(|_| ())
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    /// Step allowed by the CFL condition alone.
    pub dt_cfl: f64,
    /// Step allowed by the volume-fraction bounds alone.
    pub dt_bound: f64,
    /// Number of time-step halvings before the step was accepted.
    pub retries: usize,
    pub max_cn_residual: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
    /// Smallest of `alpha_tilde` and `1 - theta - alpha_tilde` over the cells inside the
    /// cut-off band (where the bounds are enforced); infinite if there are none.
    pub min_bound_margin: f64,
    pub bound_checks: usize,
    /// Cells outside the band whose predictor was clipped into `[0, 1 - theta]`.
    pub clamped_cells: usize,
    /// Interfaces that fell back to first-order data.
    pub flux_fallbacks: usize,
    pub vacuum_faces: usize,
    /// Cells cooled by the vacuum guard.
    pub cooled_cells: usize,
}

/// The interfaces around one cell. `south`/`north` are absent in 1D.
#[derive(Debug, Clone, Copy)]
pub struct CellFaces<'a> {
    pub west: &'a InterfaceRecord,
    pub east: &'a InterfaceRecord,
    pub south: Option<&'a InterfaceRecord>,
    pub north: Option<&'a InterfaceRecord>,
}

/// `(eta^n, eta^{n+1}, eta_t)` by the Gauss-Green formula from the star and evolved
/// normal velocities.
pub fn divergence_estimates(faces: &CellFaces, dt: f64, grid: &Grid) -> (f64, f64, f64) {
    let mut eta_n = (faces.east.grp.star.u - faces.west.grp.star.u) / grid.dx;
    let mut eta_np1 = (faces.east.u_hat - faces.west.u_hat) / grid.dx;
    if let (Some(s), Some(n)) = (faces.south, faces.north) {
        eta_n += (n.grp.star.u - s.grp.star.u) / grid.dy;
        eta_np1 += (n.u_hat - s.u_hat) / grid.dy;
    }
    let eta_t = if dt > 0.0 {
        (eta_np1 - eta_n) / dt
    } else {
        0.0
    };
    (eta_n, eta_np1, eta_t)
}

/// `(u*, u_t, (u alpha)*, (u alpha)_t)` of one interface.
fn face_rates(g: &GrpResult) -> [f64; 4] {
    let (u, a) = (g.star.u, g.star.alpha1);
    let ut = g.dv_dt[2];
    if g.vacuum {
        return [u, 0.0, 0.0, 0.0];
    }
    [u, ut, u * a, ut * a + u * g.dalpha_dt]
}

fn cell_sources(
    w: &PrimitiveState,
    q: &ConservedState,
    faces: [Option<&GrpResult>; 4],
    grid: &Grid,
    eos: &TwoPhaseEos,
    c_im: f64,
) -> SourceUpdateState {
    let diff = |a: Option<&GrpResult>, b: Option<&GrpResult>, h: f64| -> [f64; 4] {
        match (a, b) {
            (Some(lo), Some(hi)) => {
                let (l, r) = (face_rates(lo), face_rates(hi));
                std::array::from_fn(|k| (r[k] - l[k]) / h)
            }
            _ => [0.0; 4],
        }
    };
    let x = diff(faces[0], faces[1], grid.dx);
    let y = diff(faces[2], faces[3], grid.dy);
    SourceUpdateState {
        alpha_bar: q.alpha1,
        eta_n: x[0] + y[0],
        eta_t: x[1] + y[1],
        beta: x[2] + y[2],
        beta_t: x[3] + y[3],
        k_n: eos.source_coefficient(w.p, w.alpha1),
        omega: omega(eos, w.p),
        c_im,
        ..Default::default()
    }
}

/// Largest admissible step: the CFL limit and the per-cell volume-fraction bounds.
/// Returns `(dt_cfl, dt_bound)`.
pub fn timestep_bound(
    cells: &[PrimitiveState],
    sources: &[SourceUpdateState],
    grid: &Grid,
    cfl: f64,
    eos: &TwoPhaseEos,
) -> Result<(f64, f64), SolverError> {
    let mut max_rate = 0.0f64;
    let mut dt_bound = f64::INFINITY;
    for (k, (w, s)) in cells.iter().zip(sources).enumerate() {
        let c = wood_sound_speed(w, eos).map_err(|e| SolverError::TimeStep {
            cell: k,
            reason: e.to_string(),
        })?;
        let mut rate = (w.u.abs() + c) / grid.dx;
        if grid.two_d {
            rate = rate.max((w.v.abs() + c) / grid.dy);
        }
        max_rate = max_rate.max(rate);
        let (lo, hi) = alpha_step_bounds(s, ALPHA_CUTOFF);
        let b = lo.min(hi);
        if !(b > 0.0) {
            return Err(SolverError::TimeStep {
                cell: k,
                reason: format!("volume-fraction bound admits no positive step ({s:?})"),
            });
        }
        dt_bound = dt_bound.min(b);
    }
    let dt_cfl = if max_rate > 0.0 {
        cfl / max_rate
    } else {
        f64::INFINITY
    };
    Ok((dt_cfl, dt_bound))
}

/// Solution of one interface before the time step is known.
#[derive(Debug, Clone, Copy)]
struct FaceSolve {
    grp: GrpResult,
    /// Mean of the adjacent cell centres in the global frame, used as the evolved
    /// interface value where the star state is a vacuum.
    mean: Prim6,
    /// Mass fractions of the left and right data the Riemann problem was posed with.
    zeta_traces: [f64; 2],
    fallback: bool,
}

struct Reconstructed {
    cells: Vec<CellLinearData>,
}

impl Reconstructed {
    /// Linear data of cell `(i, j)`, where one index may step one cell outside the grid.
    fn get(&self, grid: &Grid, i: isize, j: isize) -> CellLinearData {
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        let at = |i: isize, j: isize| self.cells[(j * nx + i) as usize];
        let ghost =
            |bc: Boundary, axis: usize, inner: CellLinearData, wrap: CellLinearData| match bc {
                Boundary::Periodic => wrap,
                Boundary::Transmissive => inner.mirrored(axis, false),
                Boundary::Reflective => inner.mirrored(axis, true),
            };
        if i < 0 {
            ghost(grid.bc.left, 0, at(0, j), at(nx - 1, j))
        } else if i >= nx {
            ghost(grid.bc.right, 0, at(nx - 1, j), at(0, j))
        } else if j < 0 {
            ghost(grid.bc.bottom, 1, at(i, 0), at(i, ny - 1))
        } else if j >= ny {
            ghost(grid.bc.top, 1, at(i, ny - 1), at(i, 0))
        } else {
            at(i, j)
        }
    }
}

/// Neighbour centre value across a boundary, following the boundary kind.
fn ghost_center(bc: Boundary, inner: &Prim6, wrap: &Prim6, normal_vel: usize) -> Prim6 {
    match bc {
        Boundary::Periodic => *wrap,
        Boundary::Transmissive => *inner,
        Boundary::Reflective => {
            let mut g = *inner;
            g[normal_vel] = -g[normal_vel];
            g
        }
    }
}

fn reconstruct(
    state: &FieldState,
    centers: &[Prim6],
    grid: &Grid,
    config: &SchemeConfig,
) -> Reconstructed {
    let (nx, ny) = (grid.nx, grid.ny);
    let cfg = &config.recon;
    let cells = (0..grid.cells())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let c = &centers[k];
            let west = if i > 0 {
                centers[k - 1]
            } else {
                ghost_center(grid.bc.left, c, &centers[grid.index(nx - 1, j)], IDX_U)
            };
            let east = if i + 1 < nx {
                centers[k + 1]
            } else {
                ghost_center(grid.bc.right, c, &centers[grid.index(0, j)], IDX_U)
            };
            let fx = j * (nx + 1) + i;
            let grad_x: Prim6 = std::array::from_fn(|v| match &state.hats_x {
                Some(h) => {
                    compute_slopes(west[v], c[v], east[v], h[fx][v], h[fx + 1][v], cfg, grid.dx)
                }
                None => initial_slope(west[v], c[v], east[v], cfg, grid.dx),
            });
            let grad_y: Prim6 = if grid.two_d {
                let south = if j > 0 {
                    centers[k - nx]
                } else {
                    ghost_center(grid.bc.bottom, c, &centers[grid.index(i, ny - 1)], IDX_V)
                };
                let north = if j + 1 < ny {
                    centers[k + nx]
                } else {
                    ghost_center(grid.bc.top, c, &centers[grid.index(i, 0)], IDX_V)
                };
                let fy = j * nx + i;
                std::array::from_fn(|v| match &state.hats_y {
                    Some(h) => compute_slopes(
                        south[v],
                        c[v],
                        north[v],
                        h[fy][v],
                        h[fy + nx][v],
                        cfg,
                        grid.dy,
                    ),
                    None => initial_slope(south[v], c[v], north[v], cfg, grid.dy),
                })
            } else {
                [0.0; 6]
            };
            let mut cell = CellLinearData {
                center: *c,
                grad_x,
                grad_y,
            };
            cell.clamp_alpha(grid.dx, if grid.two_d { grid.dy } else { 0.0 });
            cell
        })
        .collect();
    Reconstructed { cells }
}

fn solve_face(
    lo: &CellLinearData,
    hi: &CellLinearData,
    axis: usize,
    h: f64,
    eos: &TwoPhaseEos,
    two_d: bool,
) -> Result<FaceSolve, SolverError> {
    let mean: Prim6 = std::array::from_fn(|k| 0.5 * (lo.center[k] + hi.center[k]));
    let (mut wl, mut wr) = (lo.face_value(axis, 1.0, h), hi.face_value(axis, -1.0, h));
    let (mut sl, mut sr) = (lo.slope_set(), hi.slope_set());
    if axis == 1 {
        wl = wl.swap_velocity();
        wr = wr.swap_velocity();
        sl = sl.rotated();
        sr = sr.rotated();
    }
    match solve_grp(&wl, &wr, &sl, &sr, eos, two_d) {
        Ok(grp) => Ok(FaceSolve {
            grp,
            mean,
            zeta_traces: [wl.zeta1, wr.zeta1],
            fallback: false,
        }),
        Err(_) => {
            // First-order data: cell centres, no slopes.
            let (mut cl, mut cr) = (
                crate::reconstruction::to_primitive(&lo.center),
                crate::reconstruction::to_primitive(&hi.center),
            );
            if axis == 1 {
                cl = cl.swap_velocity();
                cr = cr.swap_velocity();
            }
            let grp = solve_grp(&cl, &cr, &SlopeSet::ZERO, &SlopeSet::ZERO, eos, two_d)?;
            Ok(FaceSolve {
                grp,
                mean,
                zeta_traces: [cl.zeta1, cr.zeta1],
                fallback: true,
            })
        }
    }
}

enum CellOutcome {
    Done {
        q: ConservedState,
        residual: f64,
        margin: Option<f64>,
        clamped: bool,
        cooled: bool,
    },
    /// A failure that a smaller time step may cure.
    Retry(SolverError),
}

/// Advances `state` by one step of at most `dt_cap`. On error `state` is left untouched.
pub fn step(
    state: &mut FieldState,
    grid: &Grid,
    eos: &TwoPhaseEos,
    config: &SchemeConfig,
    dt_cap: f64,
) -> Result<StepReport, SolverError> {
    let nx = grid.nx;
    let prims = state.primitives(eos)?;
    let centers: Vec<Prim6> = prims.iter().map(to_prim6).collect();
    let recon = reconstruct(state, &centers, grid, config);

    let nfx = grid.x_faces();
    let nfy = grid.y_faces();
    let faces: Vec<FaceSolve> = (0..nfx + nfy)
        .into_par_iter()
        .map(|f| {
            let (lo, hi, axis, h) = if f < nfx {
                let (j, i) = ((f / (nx + 1)) as isize, (f % (nx + 1)) as isize);
                (recon.get(grid, i - 1, j), recon.get(grid, i, j), 0, grid.dx)
            } else {
                let g = f - nfx;
                let (j, i) = ((g / nx) as isize, (g % nx) as isize);
                (recon.get(grid, i, j - 1), recon.get(grid, i, j), 1, grid.dy)
            };
            solve_face(&lo, &hi, axis, h, eos, grid.two_d).map_err(|e| SolverError::FluxFailure {
                index: f,
                reason: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;

    let xf = |i: usize, j: usize| j * (nx + 1) + i;
    let yf = |i: usize, j: usize| nfx + j * nx + i;
    let mut sources: Vec<SourceUpdateState> = (0..grid.cells())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let ys = if grid.two_d {
                [Some(&faces[yf(i, j)].grp), Some(&faces[yf(i, j + 1)].grp)]
            } else {
                [None, None]
            };
            cell_sources(
                &prims[k],
                &state.cells[k],
                [
                    Some(&faces[xf(i, j)].grp),
                    Some(&faces[xf(i + 1, j)].grp),
                    ys[0],
                    ys[1],
                ],
                grid,
                eos,
                config.c_im,
            )
        })
        .collect();

    let (dt_cfl, dt_bound) = timestep_bound(&prims, &sources, grid, config.cfl, eos)?;
    let mut dt = dt_cfl.min(dt_bound).min(dt_cap);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::TimeStep {
            cell: 0,
            reason: format!("non-positive step {dt}"),
        });
    }

    let mut retries = 0;
    loop {
        let attempt = try_update(state, grid, eos, config, &faces, &mut sources, dt);
        match attempt {
            Ok((cells, records, flux_fallbacks, stats)) => {
                let hats = evolved_interface_values(&faces, &records, dt, nfx);
                let (hats_x, hats_y) = hats.split_at(nfx);
                state.cells = cells;
                state.t += dt;
                state.steps += 1;
                state.hats_x = Some(hats_x.to_vec());
                state.hats_y = if grid.two_d {
                    Some(hats_y.to_vec())
                } else {
                    None
                };
                let (min_alpha, max_alpha) = state.alpha_range();
                return Ok(StepReport {
                    dt,
                    dt_cfl,
                    dt_bound,
                    retries,
                    max_cn_residual: stats.max_residual,
                    min_alpha,
                    max_alpha,
                    min_bound_margin: stats.min_margin,
                    bound_checks: stats.checks,
                    clamped_cells: stats.clamped,
                    flux_fallbacks: flux_fallbacks + faces.iter().filter(|f| f.fallback).count(),
                    vacuum_faces: faces.iter().filter(|f| f.grp.vacuum).count(),
                    cooled_cells: stats.cooled,
                });
            }
            Err(e) => {
                if retries >= config.max_retries {
                    return Err(e);
                }
                retries += 1;
                dt *= 0.5;
            }
        }
    }
}

struct UpdateStats {
    max_residual: f64,
    min_margin: f64,
    checks: usize,
    clamped: usize,
    cooled: usize,
}

fn try_update(
    state: &FieldState,
    grid: &Grid,
    eos: &TwoPhaseEos,
    config: &SchemeConfig,
    faces: &[FaceSolve],
    sources: &mut [SourceUpdateState],
    dt: f64,
) -> Result<
    (
        Vec<ConservedState>,
        Vec<InterfaceRecord>,
        usize,
        UpdateStats,
    ),
    SolverError,
> {
    let (nx, nfx) = (grid.nx, grid.x_faces());
    let records: Vec<(InterfaceRecord, bool)> = faces
        .par_iter()
        .enumerate()
        .map(|(f, fs)| {
            let (mut rec, fallback) = match compute_interface_flux(&fs.grp, dt, eos, f) {
                Ok(r) => (r, false),
                // An infeasible mid-time state falls back to the star-state flux.
                Err(_) => {
                    let mut r = compute_interface_flux(&fs.grp, 0.0, eos, f)?;
                    r.u_hat = fs.grp.star.u;
                    (r, true)
                }
            };
            upwind_fraction_flux(&mut rec, fs.zeta_traces);
            Ok((rec, fallback))
        })
        .collect::<Result<_, _>>()?;
    let fallbacks = records.iter().filter(|r| r.1).count();
    let records: Vec<InterfaceRecord> = records.into_iter().map(|r| r.0).collect();

    let (dtdx, dtdy) = (dt / grid.dx, dt / grid.dy);
    let outcomes: Vec<(CellOutcome, SourceUpdateState)> = (0..grid.cells())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let west = &records[j * (nx + 1) + i];
            let east = &records[j * (nx + 1) + i + 1];
            let mut d = [0.0; 6];
            for (v, dv) in d.iter_mut().enumerate() {
                *dv = dtdx * (east.flux[v] - west.flux[v]);
            }
            let (mut south, mut north) = (None, None);
            if grid.two_d {
                let s = &records[nfx + j * nx + i];
                let n = &records[nfx + (j + 1) * nx + i];
                // Local frame of a y-face: (zr, rho, normal = my, tangential = mx, E, alpha).
                let g = |v: usize| dtdy * (n.flux[v] - s.flux[v]);
                d = [
                    d[0] + g(0),
                    d[1] + g(1),
                    d[2] + g(3),
                    d[3] + g(2),
                    d[4] + g(4),
                    d[5] + g(5),
                ];
                south = Some(s);
                north = Some(n);
            }
            let q = &state.cells[k];
            let mut src = sources[k];
            let (_, eta_np1, _) = divergence_estimates(
                &CellFaces {
                    west,
                    east,
                    south,
                    north,
                },
                dt,
                grid,
            );
            src.eta_np1 = eta_np1;
            let new = ConservedState {
                zr: q.zr - d[0],
                rho: q.rho - d[1],
                mx: q.mx - d[2],
                my: q.my - d[3],
                en: q.en - d[4],
                alpha1: q.alpha1,
            };
            let source_n = q.alpha1 * src.k_n * src.eta_n;
            let alpha_tilde = alpha_predictor(q.alpha1, d[5] / dt, source_n, dt, config.c_im);
            let theta = config.c_im * dt * eta_np1;
            src.alpha_tilde = alpha_tilde;
            src.theta = theta;
            (update_cell(new, src, eos, config.vacuum), src)
        })
        .collect();

    let mut stats = UpdateStats {
        max_residual: 0.0,
        min_margin: f64::INFINITY,
        checks: 0,
        clamped: 0,
        cooled: 0,
    };
    let mut cells = Vec::with_capacity(outcomes.len());
    for (k, (out, src)) in outcomes.into_iter().enumerate() {
        sources[k] = src;
        match out {
            CellOutcome::Done {
                q,
                residual,
                margin,
                clamped,
                cooled,
            } => {
                stats.cooled += cooled as usize;
                stats.max_residual = stats.max_residual.max(residual);
                if let Some(m) = margin {
                    stats.min_margin = stats.min_margin.min(m);
                    stats.checks += 1;
                }
                stats.clamped += clamped as usize;
                cells.push(q);
            }
            CellOutcome::Retry(e) => {
                return Err(SolverError::StepFailure {
                    cell: k,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok((cells, records, fallbacks, stats))
}

/// Bound check, implicit volume-fraction solve and validation of one cell.
fn update_cell(
    mut new: ConservedState,
    src: SourceUpdateState,
    eos: &TwoPhaseEos,
    guard: Option<VacuumGuard>,
) -> CellOutcome {
    let (abar, at, theta) = (src.alpha_bar, src.alpha_tilde, src.theta);
    let upper = 1.0 - theta;
    if !(upper >= 0.0) {
        return CellOutcome::Retry(SolverError::BoundViolation {
            alpha_tilde: at,
            upper,
        });
    }
    // Pure cells reproduce the end points up to round-off; snap so that they stay pure
    // and round-off alone never fails the bound check.
    let snap = 64.0 * f64::EPSILON;
    let at = if (at - upper).abs() <= snap {
        upper
    } else if at.abs() <= snap {
        0.0
    } else {
        at
    };
    let mut margin: Option<f64> = None;
    let mut admissible = true;
    if abar > ALPHA_CUTOFF {
        margin = Some(at);
        admissible &= at >= 0.0;
    }
    if abar < 1.0 - ALPHA_CUTOFF {
        let m = upper - at;
        margin = Some(margin.map_or(m, |x| x.min(m)));
        admissible &= at <= upper;
    }
    if !admissible {
        return CellOutcome::Retry(SolverError::BoundViolation {
            alpha_tilde: at,
            upper,
        });
    }
    let clipped = at.clamp(0.0, upper);
    let clamped = clipped != at;
    if !(new.rho > 0.0) {
        return CellOutcome::Retry(SolverError::InvalidState(format!("density {}", new.rho)));
    }
    let sol = match cn_alpha_update(clipped, theta, new.rho_e(), eos) {
        Ok(s) => s,
        Err(e) => return CellOutcome::Retry(e),
    };
    new.alpha1 = sol.alpha;
    let mut cooled = false;
    match (
        conserved_to_primitive(&new, eos),
        guard.filter(|g| new.rho < g.density),
    ) {
        (Ok(_), None) => {}
        (Err(e), None) => return CellOutcome::Retry(e),
        (w, Some(g)) => {
            let w = w.ok();
            match cool(&new, w, g.max_sound_speed, eos) {
                Ok(Some(q)) => {
                    new = q;
                    cooled = true;
                }
                Ok(None) => {}
                Err(e) => return CellOutcome::Retry(e),
            }
        }
    }
    CellOutcome::Done {
        q: new,
        residual: sol.residual,
        margin,
        clamped,
        cooled,
    }
}

/// Limits the sound speed of the cell `q` to `cap` by lowering its pressure at fixed
/// density, velocity and volume fraction; `None` if it already complies. A cell whose
/// energy has no admissible pressure at all (`w` is `None`) is put at the limit.
fn cool(
    q: &ConservedState,
    w: Option<PrimitiveState>,
    cap: f64,
    eos: &TwoPhaseEos,
) -> Result<Option<ConservedState>, SolverError> {
    let base = w.unwrap_or(PrimitiveState {
        zeta1: (q.zr / q.rho).clamp(0.0, 1.0),
        rho: q.rho,
        u: q.mx / q.rho,
        v: q.my / q.rho,
        p: f64::NAN,
        alpha1: q.alpha1,
    });
    let speed = |p: f64| wood_sound_speed(&PrimitiveState { p, ..base }, eos);
    let floor = eos.pressure_floor(base.alpha1);
    let mut hi = match w {
        Some(w) if speed(w.p)? <= cap => return Ok(None),
        Some(w) => w.p,
        None => {
            let mut hi = floor + floor.abs().max(1.0);
            while speed(hi).map_or(true, |c| c <= cap) {
                hi = floor + 2.0 * (hi - floor);
                if !hi.is_finite() {
                    return Err(SolverError::InvalidState(format!(
                        "cannot reset cell with density {}",
                        q.rho
                    )));
                }
            }
            hi
        }
    };
    // The sound speed grows with pressure and vanishes at the floor.
    let mut lo = floor;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match speed(mid) {
            Ok(c) if c <= cap => lo = mid,
            _ => hi = mid,
        }
    }
    if !(lo > floor) {
        return Err(SolverError::InvalidState(format!(
            "cannot cool cell with density {}",
            q.rho
        )));
    }
    let mut cooled = primitive_to_conserved(&PrimitiveState { p: lo, ..base }, eos);
    cooled.alpha1 = base.alpha1;
    Ok(Some(cooled))
}

/// `W* + dt W_t` at every interface, in the global frame.
fn evolved_interface_values(
    faces: &[FaceSolve],
    records: &[InterfaceRecord],
    dt: f64,
    nfx: usize,
) -> Vec<Prim6> {
    faces
        .iter()
        .zip(records)
        .enumerate()
        .map(|(f, (fs, rec))| {
            let g = &rec.grp;
            if g.vacuum {
                return fs.mean;
            }
            let s = &g.star;
            let d = &g.dv_dt;
            let mut w = [
                s.zeta1 + dt * d[0],
                s.rho + dt * d[1],
                s.u + dt * d[2],
                s.v + dt * d[3],
                s.p + dt * d[4],
                s.alpha1 + dt * g.dalpha_dt,
            ];
            if f >= nfx {
                w.swap(IDX_U, IDX_V);
            }
            w
        })
        .collect()
}
