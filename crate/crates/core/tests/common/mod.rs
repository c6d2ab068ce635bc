//! Helpers shared by the integration tests.
#![allow(dead_code)]

/// Exact solution of the ideal-gas Riemann problem by the classical two-rarefaction /
/// two-shock pressure iteration. Written independently of the library solver.
pub struct IdealRiemann {
    pub gamma: f64,
    pub left: (f64, f64, f64),
    pub right: (f64, f64, f64),
    pub p_star: f64,
    pub u_star: f64,
}

impl IdealRiemann {
    pub fn new(gamma: f64, left: (f64, f64, f64), right: (f64, f64, f64)) -> Self {
        let f = |p: f64, (rho, _u, pk): (f64, f64, f64)| -> (f64, f64) {
            let c = (gamma * pk / rho).sqrt();
            if p > pk {
                let a = 2.0 / ((gamma + 1.0) * rho);
                let b = (gamma - 1.0) / (gamma + 1.0) * pk;
                let s = (a / (p + b)).sqrt();
                ((p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (p + b)))
            } else {
                let r = (p / pk).powf((gamma - 1.0) / (2.0 * gamma));
                (
                    2.0 * c / (gamma - 1.0) * (r - 1.0),
                    r / (rho * c) * (pk / p),
                )
            }
        };
        let du = right.1 - left.1;
        let mut p = 0.5 * (left.2 + right.2);
        for _ in 0..100 {
            let (fl, dl) = f(p, left);
            let (fr, dr) = f(p, right);
            let next = (p - (fl + fr + du) / (dl + dr)).max(1e-12);
            let done = ((next - p) / p).abs() < 1e-15;
            p = next;
            if done {
                break;
            }
        }
        let u = 0.5 * (left.1 + right.1) + 0.5 * (f(p, right).0 - f(p, left).0);
        Self {
            gamma,
            left,
            right,
            p_star: p,
            u_star: u,
        }
    }

    /// `(rho, u, p)` at similarity coordinate `xi = x / t`.
    pub fn sample(&self, xi: f64) -> (f64, f64, f64) {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let side = |(rho, u, p): (f64, f64, f64), sgn: f64| -> (f64, f64, f64) {
            // sgn = -1 for the left wave, +1 for the right one; work in the left-wave frame.
            let c = (g * p / rho).sqrt();
            let (xi, u, us) = (sgn * -xi, sgn * -u, sgn * -us);
            let out = if ps > p {
                let s = u - c * ((g + 1.0) / (2.0 * g) * ps / p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi < s {
                    (rho, u, p)
                } else {
                    let r = ps / p;
                    let gg = (g - 1.0) / (g + 1.0);
                    (rho * (r + gg) / (gg * r + 1.0), us, ps)
                }
            } else {
                let cs = c * (ps / p).powf((g - 1.0) / (2.0 * g));
                if xi < u - c {
                    (rho, u, p)
                } else if xi > us - cs {
                    (rho * (ps / p).powf(1.0 / g), us, ps)
                } else {
                    let cf = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * (u - xi));
                    let uf = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u + xi);
                    (
                        rho * (cf / c).powf(2.0 / (g - 1.0)),
                        uf,
                        p * (cf / c).powf(2.0 * g / (g - 1.0)),
                    )
                }
            };
            (out.0, sgn * -out.1, out.2)
        };
        if xi <= us {
            side(self.left, -1.0)
        } else {
            side(self.right, 1.0)
        }
    }
}

/// Cell average of `f` over `[a, b]` by composite Simpson.
pub fn cell_average(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (b - a)
}

/// Star pressure and velocity of a single-phase stiffened-gas Riemann problem. The
/// stiffened gas is an ideal gas in the shifted pressure `p + pi`, so the classical
/// pressure function is applied to the shifted pressures. Newton's method safeguarded by
/// bisection; returns `None` when the data generate a vacuum.
pub fn stiffened_star(
    gamma: f64,
    pi: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
) -> Option<(f64, f64)> {
    let g = gamma;
    let f = |pb: f64, (rho, _u, p): (f64, f64, f64)| -> (f64, f64) {
        let pk = p + pi;
        let c = (g * pk / rho).sqrt();
        if pb > pk {
            let a = 2.0 / ((g + 1.0) * rho);
            let b = (g - 1.0) / (g + 1.0) * pk;
            let s = (a / (pb + b)).sqrt();
            ((pb - pk) * s, s * (1.0 - 0.5 * (pb - pk) / (pb + b)))
        } else {
            let r = (pb / pk).powf((g - 1.0) / (2.0 * g));
            (2.0 * c / (g - 1.0) * (r - 1.0), r / (rho * c) * (pk / pb))
        }
    };
    let du = right.1 - left.1;
    let residual = |pb: f64| f(pb, left).0 + f(pb, right).0 + du;
    // At zero shifted pressure both rarefactions are complete: a vacuum opens unless the
    // residual is already negative there.
    if residual(0.0) >= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, (left.2 + pi).max(right.2 + pi));
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut pb = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fl, dl) = f(pb, left);
        let (fr, dr) = f(pb, right);
        let r = fl + fr + du;
        if r < 0.0 {
            lo = pb;
        } else {
            hi = pb;
        }
        let mut next = pb - r / (dl + dr);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - pb).abs() <= 1e-16 * pb;
        pb = next;
        if done || hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let u = 0.5 * (left.1 + right.1) + 0.5 * (f(pb, right).0 - f(pb, left).0);
    Some((pb - pi, u))
}
