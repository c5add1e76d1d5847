//! Hardy-Dirac inequality checks: nonnegativity of `b_{1+c}` channel by
//! channel, and the largest shift `c` for which it holds on a given mesh.

use std::fmt;

use crate::error::{Error, Result};
use crate::form::{FormMatrix, OriginClosure};
use crate::grid::{MeshInfo, RadialGrid};
use crate::potential::RadialPotential;
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_CHANNELS: [i32; 4] = [-1, 1, -2, 2];

/// Width of the marginal band below `-tol`, in units of `tol`.
pub const MARGINAL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Marginal,
    Fails,
}

impl Verdict {
    /// `Holds` iff `min_mu1 >= -tol`; `Marginal` for `-10 tol < min_mu1 < -tol`.
    pub fn classify<T: Real>(min_mu1: T, tol: T) -> Self {
        if min_mu1 >= -tol {
            Verdict::Holds
        } else if min_mu1 > -T::lit(MARGINAL_FACTOR) * tol {
            Verdict::Marginal
        } else {
            Verdict::Fails
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Marginal => "marginal",
            Verdict::Fails => "fails",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyReport<T> {
    pub c_tested: T,
    pub channels: Vec<i32>,
    pub mu1_per_channel: Vec<T>,
    pub verdict: Verdict,
    pub tolerance: T,
    pub mesh: MeshInfo,
    pub closure: OriginClosure,
}

impl<T: Real> HardyReport<T> {
    pub fn min_mu1(&self) -> T {
        self.mu1_per_channel
            .iter()
            .copied()
            .fold(T::infinity(), T::min)
    }

    /// Channel attaining the smallest `mu_1`.
    pub fn binding_channel(&self) -> i32 {
        let (idx, _) = self
            .mu1_per_channel
            .iter()
            .enumerate()
            .fold((0, T::infinity()), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        self.channels[idx]
    }
}

fn check_shift<T: Real>(c: T) -> Result<()> {
    if c > -T::one() && c < T::one() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("shift c = {c} must lie in (-1, 1)")))
    }
}

pub fn verify_hardy<T: Real>(
    potential: &RadialPotential<T>,
    c: T,
    channels: &[i32],
    grid: &RadialGrid<T>,
    tol: T,
) -> Result<HardyReport<T>> {
    verify_hardy_with(potential, c, channels, grid, tol, OriginClosure::Regular)
}

pub fn verify_hardy_with<T: Real>(
    potential: &RadialPotential<T>,
    c: T,
    channels: &[i32],
    grid: &RadialGrid<T>,
    tol: T,
    closure: OriginClosure,
) -> Result<HardyReport<T>> {
    check_shift(c)?;
    if channels.is_empty() {
        return Err(Error::Precondition("channel list is empty".to_string()));
    }
    if !(tol >= T::zero()) {
        return Err(Error::Precondition(format!("tolerance {tol} must be nonnegative")));
    }
    let gamma = T::one() + c;
    let mu1_per_channel = channels
        .iter()
        .map(|&kappa| FormMatrix::assemble(potential, gamma, kappa, grid, closure)?.mu(1))
        .collect::<Result<Vec<T>>>()?;
    let min = mu1_per_channel.iter().copied().fold(T::infinity(), T::min);
    Ok(HardyReport {
        c_tested: c,
        channels: channels.to_vec(),
        mu1_per_channel,
        verdict: Verdict::classify(min, tol),
        tolerance: tol,
        mesh: grid.summary(),
        closure,
    })
}

/// Result of the search for the largest admissible shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftEstimate<T> {
    /// Largest `c` found to hold.
    pub c: T,
    /// Smallest `c` found to fail; equals `c` when capped.
    pub c_fail: T,
    /// The form stayed nonnegative up to the cap `1 - tol`.
    pub capped: bool,
    pub mesh: MeshInfo,
}

const COARSE_SCAN: usize = 40;

/// Largest `c` (to within `tol`) with a nonnegative form in every channel,
/// by a coarse downward scan followed by bisection. Nonnegativity is tested
/// at the verdict tolerance [`DEFAULT_TOL`].
pub fn estimate_cv<T: Real>(
    potential: &RadialPotential<T>,
    channels: &[i32],
    grid: &RadialGrid<T>,
    tol: T,
) -> Result<ShiftEstimate<T>> {
    estimate_cv_with(potential, channels, grid, tol, OriginClosure::Regular)
}

pub fn estimate_cv_with<T: Real>(
    potential: &RadialPotential<T>,
    channels: &[i32],
    grid: &RadialGrid<T>,
    tol: T,
    closure: OriginClosure,
) -> Result<ShiftEstimate<T>> {
    if channels.is_empty() {
        return Err(Error::Precondition("channel list is empty".to_string()));
    }
    if !(tol > T::zero() && tol < T::lit(0.1)) {
        return Err(Error::Precondition(format!("tolerance {tol} must lie in (0, 0.1)")));
    }
    let verdict_tol = T::lit(DEFAULT_TOL);
    let holds = |c: T| -> Result<bool> {
        let gamma = T::one() + c;
        for &kappa in channels {
            let form = FormMatrix::assemble(potential, gamma, kappa, grid, closure)?;
            if form.count_below(-verdict_tol) > 0 {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let cap = T::one() - tol;
    let floor = (-T::one()).max(potential.sup() - T::one()) + tol;
    if !(floor < cap) {
        return Err(Error::NoValidC);
    }
    let mesh = grid.summary();
    if holds(cap)? {
        return Ok(ShiftEstimate {
            c: cap,
            c_fail: cap,
            capped: true,
            mesh,
        });
    }

    let step = (cap - floor) / T::count(COARSE_SCAN);
    let mut fail = cap;
    let mut good = None;
    for i in 1..=COARSE_SCAN {
        let c = cap - step * T::count(i);
        if holds(c)? {
            good = Some(c);
            break;
        }
        fail = c;
    }
    let mut good = good.ok_or(Error::NoValidC)?;
    while fail - good > tol {
        let mid = T::lit(0.5) * (good + fail);
        if holds(mid)? {
            good = mid;
        } else {
            fail = mid;
        }
    }
    Ok(ShiftEstimate {
        c: good,
        c_fail: fail,
        capped: false,
        mesh,
    })
}
