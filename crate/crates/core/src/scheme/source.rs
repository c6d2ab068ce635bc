//! Semi-implicit volume-fraction update and the time-step bounds that keep it in `[0, 1]`.

use crate::eos::TwoPhaseEos;
use crate::error::SolverError;

/// Tolerance on `|f|` at the returned root.
pub const CN_RESIDUAL_TOL: f64 = 1e-12;
const NEWTON_ITERS: usize = 50;

/// Per-cell scalars of the volume-fraction update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceUpdateState {
    /// Cell average at `t^n`.
    pub alpha_bar: f64,
    /// Explicit predictor (flux difference and old-time source).
    pub alpha_tilde: f64,
    /// `C_im dt eta^{n+1}`.
    pub theta: f64,
    pub eta_n: f64,
    pub eta_np1: f64,
    pub eta_t: f64,
    /// Divergence of the star-state volume-fraction flux and its time derivative.
    pub beta: f64,
    pub beta_t: f64,
    /// Source coefficient at `t^n` from the cell average.
    pub k_n: f64,
    /// `rho1 c1^2 / (rho1 c1^2 - rho2 c2^2)`; infinite when the impedances coincide.
    pub omega: f64,
    pub c_im: f64,
}

/// `alpha_tilde = alpha_bar - dt * div(u alpha) + (1 - C_im) dt alpha_bar K^n eta^n`.
pub fn alpha_predictor(
    alpha_bar: f64,
    alpha_flux_div: f64,
    source_n: f64,
    dt: f64,
    c_im: f64,
) -> f64 {
    alpha_bar - dt * alpha_flux_div + (1.0 - c_im) * dt * source_n
}

/// Result of the implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnSolution {
    pub alpha: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// The nonlinear function `f(xi) = xi - alpha_tilde - theta xi K(xi)` written with the
/// linear pressure numerator and denominator, together with its derivative.
struct SourceFunction<'a> {
    eos: &'a TwoPhaseEos,
    rho_e: f64,
    alpha_tilde: f64,
    theta: f64,
}

impl SourceFunction<'_> {
    fn eval(&self, xi: f64) -> (f64, f64) {
        let (g1, p1) = (self.eos.phase1.gamma, self.eos.phase1.pi);
        let (g2, p2) = (self.eos.phase2.gamma, self.eos.phase2.pi);
        let l1 = self.eos.pressure_numerator(self.rho_e, xi);
        let l2 = self.eos.pressure_denominator(xi);
        let dl1 = -g1 * p1 * (g2 - 1.0) + g2 * p2 * (g1 - 1.0);
        let dl2 = g2 - g1;
        let n = g2 * (l1 + p2 * l2);
        let dn = g2 * (dl1 + p2 * dl2);
        let a = (g2 - g1) * xi + g1;
        let b = (g2 * p2 - g1 * p1) * xi + g1 * p1;
        let d = a * l1 + b * l2;
        let dd = (g2 - g1) * l1 + a * dl1 + (g2 * p2 - g1 * p1) * l2 + b * dl2;
        let k = n / d;
        let dk = (dn * d - n * dd) / (d * d);
        let f = xi - self.alpha_tilde - self.theta * xi * k;
        let df = 1.0 - self.theta * (k + xi * dk);
        (f, df)
    }
}

/// Solves `f(xi; alpha_tilde) = 0` on `[0, 1]`. `rho_e_np1` is the updated internal
/// energy per unit volume.
///
/// `f` need not be monotone when `theta < 0`, so the root nearest `alpha_tilde` is taken:
/// Newton iteration from `alpha_tilde` first, then a scan of `[0, 1]` for sign changes,
/// each refined by bisection. Brackets that close on a pole of `K` are discarded.
pub fn cn_alpha_update(
    alpha_tilde: f64,
    theta: f64,
    rho_e_np1: f64,
    eos: &TwoPhaseEos,
) -> Result<CnSolution, SolverError> {
    let upper = 1.0 - theta;
    if !(alpha_tilde >= 0.0 && alpha_tilde <= upper) {
        return Err(SolverError::BoundViolation { alpha_tilde, upper });
    }
    if theta == 0.0 {
        return Ok(CnSolution {
            alpha: alpha_tilde,
            residual: 0.0,
            iterations: 0,
        });
    }
    if alpha_tilde == 0.0 {
        return Ok(CnSolution {
            alpha: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    if alpha_tilde == upper {
        return Ok(CnSolution {
            alpha: 1.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    let func = SourceFunction {
        eos,
        rho_e: rho_e_np1,
        alpha_tilde,
        theta,
    };
    let mut iterations = 0;

    let mut x = alpha_tilde.clamp(0.0, 1.0);
    for _ in 0..NEWTON_ITERS {
        iterations += 1;
        let (f, df) = func.eval(x);
        if !f.is_finite() {
            break;
        }
        if f.abs() <= CN_RESIDUAL_TOL {
            // One more step polishes the root at no risk.
            let next = x - f / df;
            let (fn_, _) = func.eval(next);
            let (x, f) = if (0.0..=1.0).contains(&next) && fn_.abs() < f.abs() {
                (next, fn_)
            } else {
                (x, f)
            };
            return Ok(CnSolution {
                alpha: x,
                residual: f.abs(),
                iterations,
            });
        }
        let next = (x - f / df).clamp(0.0, 1.0);
        if !next.is_finite() || next == x {
            break;
        }
        x = next;
    }

    const SCAN: usize = 256;
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (0.0, func.eval(0.0).0);
    for k in 1..=SCAN {
        let xk = k as f64 / SCAN as f64;
        let fk = func.eval(xk).0;
        let (x0, f0) = prev;
        prev = (xk, fk);
        let root = if f0 == 0.0 {
            Some(x0)
        } else if fk == 0.0 {
            Some(xk)
        } else if f0.is_finite() && fk.is_finite() && (f0 < 0.0) != (fk < 0.0) {
            let (mut lo, mut hi, lo_neg) = (x0, xk, f0 < 0.0);
            for _ in 0..200 {
                iterations += 1;
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (func.eval(mid).0 < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (fl, fh) = (func.eval(lo).0.abs(), func.eval(hi).0.abs());
            Some(if fl <= fh { lo } else { hi })
        } else {
            None
        };
        if let Some(r) = root {
            let fr = func.eval(r).0.abs();
            let closer =
                best.is_none_or(|(b, _)| (r - alpha_tilde).abs() < (b - alpha_tilde).abs());
            if fr <= CN_RESIDUAL_TOL && closer {
                best = Some((r, fr));
            }
        }
    }
    match best {
        Some((alpha, residual)) => Ok(CnSolution { alpha, residual, iterations }),
        None => Err(SolverError::SourceSolve(format!(
            "no root with |f| <= {CN_RESIDUAL_TOL:e} (alpha_tilde = {alpha_tilde}, theta = {theta}, \
             rho_e = {rho_e_np1})"
        ))),
    }
}

/// Largest `t0` such that `a t^2 + b t - c <= 0` for all `t` in `[0, t0]`, given `c >= 0`.
/// Returns infinity when the inequality never fails.
pub fn quadratic_bound(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 {
        return if b > 0.0 { c / b } else { f64::INFINITY };
    }
    let disc = b * b + 4.0 * a * c;
    if a > 0.0 {
        let s = disc.sqrt();
        return if b >= 0.0 {
            2.0 * c / (b + s)
        } else {
            (s - b) / (2.0 * a)
        };
    }
    // a < 0: the parabola opens downwards; it only crosses zero if it rises first.
    if b <= 0.0 || disc < 0.0 {
        return f64::INFINITY;
    }
    2.0 * c / (b + disc.sqrt())
}

/// Time-step bounds from `alpha_tilde >= 0` and `alpha_tilde <= 1 - theta`, with
/// `eta^{n+1} = eta^n + dt eta_t`. The coefficient `alpha K` replaces the equivalent
/// `alpha (omega - 1) / (omega - alpha)`, which is singular when the two phase
/// impedances coincide.
pub fn alpha_step_bounds(s: &SourceUpdateState, cutoff: f64) -> (f64, f64) {
    let c = s.c_im;
    let explicit = (1.0 - c) * s.alpha_bar * s.k_n * s.eta_n;
    let lower = if s.alpha_bar > cutoff {
        quadratic_bound(0.5 * s.beta_t, s.beta - explicit, s.alpha_bar)
    } else {
        f64::INFINITY
    };
    let upper = if s.alpha_bar < 1.0 - cutoff {
        quadratic_bound(
            c * s.eta_t - 0.5 * s.beta_t,
            c * s.eta_n - s.beta + explicit,
            1.0 - s.alpha_bar,
        )
    } else {
        f64::INFINITY
    };
    (lower, upper)
}

/// `omega = rho1 c1^2 / (rho1 c1^2 - rho2 c2^2)` at pressure `p`.
pub fn omega(eos: &TwoPhaseEos, p: f64) -> f64 {
    let (r1, r2) = (eos.phase1.rho_c2(p), eos.phase2.rho_c2(p));
    r1 / (r1 - r2)
}
