//! Reference Dirac-Coulomb bound-state energies.
//!
//! Two independent sources: the closed-form Sommerfeld spectrum and a
//! fourth-order Runge-Kutta shooting solver for the first-order radial system
//! with matching at an interior point.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Closed-form energy of the `k`-th bound state (1-based) in channel `kappa`
/// for `V = -nu / r`:
///
/// ```text
/// E = [1 + nu^2 / (n + s)^2]^{-1/2},  s = sqrt(kappa^2 - nu^2)
/// ```
///
/// with radial quantum number `n = k - 1` for `kappa < 0` and `n = k` for
/// `kappa > 0`. The limit `n + s = 0` (critical ground state) is `0`.
pub fn analytic_oracle<T: Real>(nu: T, kappa: i32, k: usize) -> Result<T> {
    if kappa == 0 {
        return Err(Error::ZeroKappa);
    }
    if k == 0 {
        return Err(Error::Precondition("state index k must be >= 1".to_string()));
    }
    let kk = T::lit(f64::from(kappa));
    if !(nu > T::zero()) {
        return Err(Error::CouplingOutOfRange { nu: nu.to_f64_lossy() });
    }
    if nu > kk.abs() {
        return Err(Error::SupercriticalChannel {
            nu: nu.to_f64_lossy(),
            kappa,
        });
    }
    let s = (kk * kk - nu * nu).max(T::zero()).sqrt();
    let n = T::count(if kappa < 0 { k - 1 } else { k });
    let denom = n + s;
    if denom == T::zero() {
        return Ok(T::zero());
    }
    let q = nu / denom;
    Ok((T::one() + q * q).sqrt().recip())
}

/// Settings of the shooting solver.
#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    /// Start of the outward integration (regular series `r^s` imposed here).
    pub r0: f64,
    /// Matching radius.
    pub r_match: f64,
    /// Start of the inward integration (decaying asymptote imposed here).
    pub r_max: f64,
    /// Step in `ln r` on the outward leg.
    pub dt: f64,
    /// Step in `r` on the inward leg.
    pub dr: f64,
    /// Energy scan resolution before bisection.
    pub scan_points: usize,
    pub tol: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            r0: 1e-10,
            r_match: 1.0,
            r_max: 60.0,
            dt: 4e-3,
            dr: 4e-3,
            scan_points: 300,
            tol: 1e-13,
        }
    }
}

/// `k`-th bound-state energy in channel `kappa` for `V = -nu / r` by shooting.
/// Requires `0 < nu < |kappa|` (a regular series with `s > 0`).
pub fn shooting_eigenvalue(nu: f64, kappa: i32, k: usize, cfg: &ShootingConfig) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::ZeroKappa);
    }
    if k == 0 {
        return Err(Error::Precondition("state index k must be >= 1".to_string()));
    }
    let kk = f64::from(kappa);
    if !(nu > 0.0 && nu < kk.abs()) {
        return Err(Error::Precondition(format!(
            "shooting needs 0 < nu < |kappa|, got nu = {nu}, kappa = {kappa}"
        )));
    }
    let mismatch = |e: f64| wronskian(nu, kappa, e, cfg);

    let (lo, hi) = (-1.0 + 1e-9, 1.0 - 1e-9);
    let step = (hi - lo) / cfg.scan_points as f64;
    let mut found = 0;
    let mut prev_e = lo;
    let mut prev_w = mismatch(lo);
    for i in 1..=cfg.scan_points {
        let e = lo + step * i as f64;
        let w = mismatch(e);
        if prev_w.signum() != w.signum() {
            found += 1;
            if found == k {
                return Ok(bisect(&mismatch, prev_e, e, prev_w, cfg.tol));
            }
        }
        prev_e = e;
        prev_w = w;
    }
    Err(Error::NoEigenvalue { k, margin: prev_w })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Wronskian of the normalized outward and inward solutions at `r_match`.
fn wronskian(nu: f64, kappa: i32, e: f64, cfg: &ShootingConfig) -> f64 {
    let kk = f64::from(kappa);
    let s = (kk * kk - nu * nu).sqrt();

    // outward in t = ln r:  f' = -kappa f + (r(E+1) + nu) g,  g' = kappa g - (r(E-1) + nu) f
    let rhs_t = |t: f64, y: [f64; 2]| {
        let r = t.exp();
        [
            -kk * y[0] + (r * (e + 1.0) + nu) * y[1],
            kk * y[1] - (r * (e - 1.0) + nu) * y[0],
        ]
    };
    let (t0, t1) = (cfg.r0.ln(), cfg.r_match.ln());
    let n_out = ((t1 - t0) / cfg.dt).ceil() as usize;
    let out = rk4(rhs_t, t0, [1.0, (s + kk) / nu], (t1 - t0) / n_out as f64, n_out);

    // inward in r from the decaying asymptote g = -lambda / (1 + E) f
    let rhs_r = |r: f64, y: [f64; 2]| {
        let v = -nu / r;
        [
            -kk / r * y[0] + (e + 1.0 - v) * y[1],
            kk / r * y[1] - (e - 1.0 - v) * y[0],
        ]
    };
    let lambda = (1.0 - e * e).sqrt();
    let n_in = ((cfg.r_max - cfg.r_match) / cfg.dr).ceil() as usize;
    let inn = rk4(
        rhs_r,
        cfg.r_max,
        [1.0, -lambda / (1.0 + e)],
        -(cfg.r_max - cfg.r_match) / n_in as f64,
        n_in,
    );

    let no = out[0].hypot(out[1]);
    let ni = inn[0].hypot(inn[1]);
    (out[0] * inn[1] - out[1] * inn[0]) / (no * ni)
}

fn rk4(f: impl Fn(f64, [f64; 2]) -> [f64; 2], x0: f64, y0: [f64; 2], h: f64, steps: usize) -> [f64; 2] {
    let mut y = y0;
    let mut x = x0;
    let axpy = |y: [f64; 2], a: f64, k: [f64; 2]| [y[0] + a * k[0], y[1] + a * k[1]];
    for _ in 0..steps {
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1));
        let k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2));
        let k4 = f(x + h, axpy(y, h, k3));
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x += h;
        // keep magnitudes bounded; only the direction matters for matching
        let m = y[0].abs().max(y[1].abs());
        if m > 1e100 {
            y = [y[0] / m, y[1] / m];
        }
    }
    y
}
