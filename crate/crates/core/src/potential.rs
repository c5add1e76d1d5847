//! Spherically symmetric electrostatic potentials with certified metadata.
//!
//! Every potential carries `sup V` (written `Gamma` below), the coupling
//! `nu = sup r|V|`, the shift `c1` of the lower bound `-nu/r - c1 <= V`, and an
//! optional known Hardy constant `c(V)`. The behaviour of `r V(r)` at the
//! origin fixes the regular near-origin exponent used by the boundary closure.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::scalar::Real;

/// Closed-form family or user-supplied profile.
#[derive(Clone)]
pub enum PotentialShape<T> {
    /// `V = 0`.
    Free,
    /// `V = -nu / r`.
    Coulomb { nu: T },
    /// `V = max(-nu/r - c1 e^{-r}, -nu/r - c1)`, clipped above by `gamma_cap`.
    PerturbedCoulomb { nu: T, c1: T, gamma_cap: T },
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: fmt::Debug> fmt::Debug for PotentialShape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialShape::Free => f.write_str("Free"),
            PotentialShape::Coulomb { nu } => f.debug_struct("Coulomb").field("nu", nu).finish(),
            PotentialShape::PerturbedCoulomb { nu, c1, gamma_cap } => f
                .debug_struct("PerturbedCoulomb")
                .field("nu", nu)
                .field("c1", c1)
                .field("gamma_cap", gamma_cap)
                .finish(),
            PotentialShape::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Bounds a caller certifies for a custom profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBounds<T> {
    pub sup: T,
    pub nu: T,
    pub c1: T,
    pub cv_hint: Option<T>,
    /// `lim_{r -> 0} r |V(r)|`.
    pub origin_coupling: T,
}

#[derive(Debug, Clone)]
pub struct RadialPotential<T> {
    shape: PotentialShape<T>,
    sup: T,
    nu: T,
    c1: T,
    cv_hint: Option<T>,
    origin_coupling: T,
    label: String,
}

impl<T: Real> RadialPotential<T> {
    pub fn free() -> Self {
        Self {
            shape: PotentialShape::Free,
            sup: T::zero(),
            nu: T::zero(),
            c1: T::zero(),
            cv_hint: None,
            origin_coupling: T::zero(),
            label: "free".to_string(),
        }
    }

    /// Pure Coulomb potential `-nu/r` for `0 < nu <= 1`.
    ///
    /// The Hardy constant hint is `sqrt(1 - nu^2)`; at `nu = 1` it is `0`,
    /// matching the critical inequality with denominator `1 + 1/r`.
    pub fn coulomb(nu: T) -> Result<Self> {
        if !(nu > T::zero() && nu <= T::one()) {
            return Err(Error::CouplingOutOfRange { nu: nu.to_f64_lossy() });
        }
        let hint = if nu == T::one() {
            T::zero()
        } else {
            (T::one() - nu * nu).sqrt()
        };
        Ok(Self {
            shape: PotentialShape::Coulomb { nu },
            sup: T::zero(),
            nu,
            c1: T::zero(),
            cv_hint: Some(hint),
            origin_coupling: nu,
            label: format!("coulomb(nu={nu})"),
        })
    }

    /// Coulomb tail plus a bounded short-range well, admissible when
    /// `c1 + Gamma - 1 < sqrt(1 - nu^2)`.
    ///
    /// The profile is nonpositive, so the cap never binds; `Gamma` is recorded
    /// as `gamma_cap`, which is a valid (not sharp) upper bound.
    pub fn perturbed_coulomb(nu: T, c1: T, gamma_cap: T) -> Result<Self> {
        if !(nu > T::zero() && nu < T::one()) {
            return Err(Error::CouplingOutOfRange { nu: nu.to_f64_lossy() });
        }
        if !(c1 >= T::zero()) || !(gamma_cap >= T::zero()) {
            return Err(Error::InvalidPotential(
                "c1 and gamma_cap must be nonnegative".to_string(),
            ));
        }
        let bound = (T::one() - nu * nu).sqrt();
        let lhs = c1 + gamma_cap - T::one();
        if !(lhs < bound) {
            return Err(Error::TheoremHypothesisViolated {
                lhs: lhs.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
        let cv_hint = if c1 == T::zero() { Some(bound) } else { None };
        Ok(Self {
            shape: PotentialShape::PerturbedCoulomb { nu, c1, gamma_cap },
            sup: gamma_cap,
            nu,
            c1,
            cv_hint,
            origin_coupling: nu,
            label: format!("perturbed-coulomb(nu={nu},c1={c1},gamma_cap={gamma_cap})"),
        })
    }

    pub fn custom(
        label: impl Into<String>,
        profile: impl Fn(T) -> T + Send + Sync + 'static,
        bounds: PotentialBounds<T>,
    ) -> Result<Self> {
        if let Some(c) = bounds.cv_hint {
            if !(c > -T::one() && c < T::one()) {
                return Err(Error::InvalidPotential(format!("c(V) hint {c} outside (-1, 1)")));
            }
            if !(bounds.sup < T::one() + c) {
                return Err(Error::InvalidPotential(format!(
                    "sup V = {} must be below 1 + c(V) = {}",
                    bounds.sup,
                    T::one() + c
                )));
            }
        }
        if !(bounds.nu >= T::zero()) || !(bounds.c1 >= T::zero()) {
            return Err(Error::InvalidPotential("nu and c1 must be nonnegative".to_string()));
        }
        if !(bounds.origin_coupling >= T::zero() && bounds.origin_coupling <= bounds.nu) {
            return Err(Error::InvalidPotential(
                "origin coupling must lie in [0, nu]".to_string(),
            ));
        }
        Ok(Self {
            shape: PotentialShape::Custom(Arc::new(profile)),
            sup: bounds.sup,
            nu: bounds.nu,
            c1: bounds.c1,
            cv_hint: bounds.cv_hint,
            origin_coupling: bounds.origin_coupling,
            label: label.into(),
        })
    }

    pub fn eval(&self, r: T) -> T {
        match &self.shape {
            PotentialShape::Free => T::zero(),
            PotentialShape::Coulomb { nu } => -*nu / r,
            PotentialShape::PerturbedCoulomb { nu, c1, gamma_cap } => {
                let coulomb = -*nu / r;
                let v = (coulomb - *c1 * (-r).exp()).max(coulomb - *c1);
                v.min(*gamma_cap)
            }
            PotentialShape::Custom(f) => f(r),
        }
    }

    pub fn on_nodes(&self, grid: &RadialGrid<T>) -> Vec<T> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }

    pub fn on_cells(&self, grid: &RadialGrid<T>) -> Vec<T> {
        grid.midpoints().iter().map(|&r| self.eval(r)).collect()
    }

    pub fn shape(&self) -> &PotentialShape<T> {
        &self.shape
    }

    /// `Gamma = sup V`.
    pub fn sup(&self) -> T {
        self.sup
    }

    /// `sup r |V(r)|`.
    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    pub fn cv_hint(&self) -> Option<T> {
        self.cv_hint
    }

    pub fn origin_coupling(&self) -> T {
        self.origin_coupling
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether the potential satisfies the Coulomb-plus-bounded hypotheses
    /// `nu < 1`, `c1 + Gamma - 1 < sqrt(1 - nu^2)`.
    pub fn theorem_admissible(&self) -> bool {
        self.nu < T::one()
            && self.c1 + self.sup - T::one() < (T::one() - self.nu * self.nu).sqrt()
    }

    /// Near-origin exponent `s = sqrt(kappa^2 - nu0^2)` of the regular solution
    /// in channel `kappa`.
    pub fn origin_exponent(&self, kappa: i32) -> T {
        let k = T::lit(f64::from(kappa));
        let nu0 = self.origin_coupling;
        (k * k - nu0 * nu0).max(T::zero()).sqrt()
    }

    /// Checks `V <= Gamma` and `V >= -nu/r - c1` on every node and cell
    /// midpoint of `grid`.
    pub fn check_on(&self, grid: &RadialGrid<T>) -> Result<()> {
        let slack = T::lit(64.0) * T::epsilon();
        for &r in grid.nodes().iter().chain(grid.midpoints()) {
            let v = self.eval(r);
            if !v.is_finite() {
                return Err(Error::PotentialBoundViolated { r: r.to_f64_lossy(), what: "non-finite value" });
            }
            if v > self.sup + slack * self.sup.abs().max(T::one()) {
                return Err(Error::PotentialBoundViolated { r: r.to_f64_lossy(), what: "V exceeds sup" });
            }
            let floor = -self.nu / r - self.c1;
            if v < floor - slack * floor.abs() {
                return Err(Error::PotentialBoundViolated {
                    r: r.to_f64_lossy(),
                    what: "V below -nu/r - c1",
                });
            }
        }
        Ok(())
    }
}

pub fn make_coulomb<T: Real>(nu: T) -> Result<RadialPotential<T>> {
    RadialPotential::coulomb(nu)
}

pub fn make_bounded_perturbed_coulomb<T: Real>(nu: T, c1: T, gamma_cap: T) -> Result<RadialPotential<T>> {
    RadialPotential::perturbed_coulomb(nu, c1, gamma_cap)
}
