//! Form-level inequalities comparing `b_gamma` across shifts and bounding it
//! from below by the graph norm.

use crate::error::{Error, Result};
use crate::form::FormMatrix;
use crate::grid::RadialGrid;
use crate::potential::RadialPotential;
use crate::scalar::{positive_part, Real};

const RELATIVE_SLACK: f64 = 1e-12;

/// Outcome of checking
/// `1/(gamma - V) - 1/(gamma' - V) <= [gamma - gamma']_+ / ((gamma - Gamma)(gamma' - Gamma))`
/// on every node and cell midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseCheck<T> {
    pub holds: bool,
    /// Points checked (nodes plus midpoints).
    pub points: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen.
    pub worst_excess: T,
    pub worst_r: T,
}

pub fn pointwise_gamma_bound<T: Real>(
    potential: &RadialPotential<T>,
    gamma: T,
    gamma_prime: T,
    grid: &RadialGrid<T>,
) -> Result<PointwiseCheck<T>> {
    let sup = potential.sup();
    for g in [gamma, gamma_prime] {
        if !(g > sup) {
            return Err(Error::GammaBelowSup {
                gamma: g.to_f64_lossy(),
                sup: sup.to_f64_lossy(),
            });
        }
    }
    let rhs = positive_part(gamma - gamma_prime) / ((gamma - sup) * (gamma_prime - sup));
    let slack = T::lit(RELATIVE_SLACK);
    let mut check = PointwiseCheck {
        holds: true,
        points: 0,
        violations: 0,
        worst_excess: T::neg_infinity(),
        worst_r: T::nan(),
    };
    for &r in grid.nodes().iter().chain(grid.midpoints()) {
        let v = potential.eval(r);
        let lhs = (gamma - v).recip() - (gamma_prime - v).recip();
        let excess = lhs - rhs;
        check.points += 1;
        if excess > check.worst_excess {
            check.worst_excess = excess;
            check.worst_r = r;
        }
        if excess > slack * lhs.abs().max(rhs.abs()) {
            check.violations += 1;
        }
    }
    check.holds = check.violations == 0;
    Ok(check)
}

/// Both sides of
/// `b_gamma(u,u) <= b_gamma'(u,u) + [gamma - gamma']_+ (1/((gamma' - Gamma)(gamma - Gamma)) + 1) |u|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceCheck<T> {
    pub holds: bool,
    pub lhs: T,
    pub rhs: T,
}

/// Compares the forms at two shifts for one vector `u` in channel `kappa`.
pub fn check_gamma_equivalence<T: Real>(
    u: &[T],
    potential: &RadialPotential<T>,
    gamma: T,
    gamma_prime: T,
    kappa: i32,
    grid: &RadialGrid<T>,
) -> Result<EquivalenceCheck<T>> {
    let lo = FormMatrix::assemble(potential, gamma, kappa, grid, Default::default())?;
    let hi = FormMatrix::assemble(potential, gamma_prime, kappa, grid, Default::default())?;
    check_with_forms(u, &lo, &hi)
}

/// Same as [`check_gamma_equivalence`] with preassembled forms, for batches.
pub fn check_with_forms<T: Real>(
    u: &[T],
    form: &FormMatrix<T>,
    form_prime: &FormMatrix<T>,
) -> Result<EquivalenceCheck<T>> {
    let n = form.grid().len();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let (gamma, gamma_prime) = (form.gamma(), form_prime.gamma());
    let sup = form.potential_sup();
    let pu = form.project(u);
    let lhs = form.value(&pu);
    let factor = positive_part(gamma - gamma_prime)
        * (((gamma_prime - sup) * (gamma - sup)).recip() + T::one());
    let rhs = form_prime.value(&pu) + factor * form.grid().norm_sq(&pu);
    let slack = T::lit(RELATIVE_SLACK) * lhs.abs().max(rhs.abs());
    Ok(EquivalenceCheck {
        holds: lhs <= rhs + slack,
        lhs,
        rhs,
    })
}

/// `delta = (gamma - Gamma)(1 + c - gamma) / (1 + c - Gamma)`, requiring
/// `Gamma < gamma < 1 + c`.
pub fn delta_lower_bound<T: Real>(sup: T, gamma: T, c: T) -> Result<T> {
    let top = T::one() + c;
    if !(sup < gamma && gamma < top) {
        return Err(Error::Precondition(format!(
            "need sup V = {sup} < gamma = {gamma} < 1 + c = {top}"
        )));
    }
    Ok((gamma - sup) * (top - gamma) / (top - sup))
}

/// Both sides of `b_gamma(u,u) >= delta (|u|^2 + |D u / (gamma - V)|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCertificate<T> {
    pub delta: T,
    pub form_value: T,
    pub graph_norm_sq: T,
    pub holds: bool,
}

pub fn certify_delta_bound<T: Real>(u: &[T], form: &FormMatrix<T>, delta: T) -> Result<DeltaCertificate<T>> {
    let n = form.grid().len();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let pu = form.project(u);
    let grid = form.grid();
    let du = form.operator().apply(&pu);
    let ratio: Vec<T> = du.iter().zip(form.cell_gap()).map(|(&d, &g)| d / g).collect();
    let graph_norm_sq = grid.norm_sq(&pu) + grid.cell_norm_sq(&ratio);
    let form_value = form.value(&pu);
    let rhs = delta * graph_norm_sq;
    Ok(DeltaCertificate {
        delta,
        form_value,
        graph_norm_sq,
        holds: form_value >= rhs - T::lit(RELATIVE_SLACK) * rhs.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MeshScheme;

    fn grid() -> RadialGrid<f64> {
        RadialGrid::new(1e-4, 30.0, 300, MeshScheme::LogUniform).unwrap()
    }

    fn bump(g: &RadialGrid<f64>) -> Vec<f64> {
        g.nodes().iter().map(|&r| r.sqrt() * (-r).exp()).collect()
    }

    #[test]
    fn delta_formula() {
        let d: f64 = delta_lower_bound(0.0, 1.5, 0.8).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        assert!(1.0 + 0.8 - 1.5 > d);
        assert!(delta_lower_bound(0.0, 1e-12, 0.8).unwrap() < 1e-11);
        assert!(delta_lower_bound(0.0, 1.9, 0.8).is_err());
        assert!(delta_lower_bound(0.0, 0.0, 0.8).is_err());
    }

    #[test]
    fn equal_shifts_give_identical_sides() {
        let g = grid();
        let v = RadialPotential::coulomb(0.5).unwrap();
        let u = bump(&g);
        let chk = check_gamma_equivalence(&u, &v, 1.3, 1.3, -1, &g).unwrap();
        assert!(chk.holds);
        assert_eq!(chk.lhs, chk.rhs);
    }

    #[test]
    fn larger_shift_on_left_is_bounded() {
        let g = grid();
        let v = RadialPotential::coulomb(0.5).unwrap();
        assert!(pointwise_gamma_bound(&v, 1.5, 1.2, &g).unwrap().holds);
        let chk = check_gamma_equivalence(&bump(&g), &v, 1.5, 1.2, -1, &g).unwrap();
        assert!(chk.holds && chk.lhs < chk.rhs);
    }

    #[test]
    fn smaller_shift_on_left_violates_printed_bound() {
        // with [gamma - gamma']_+ = 0 the bound reduces to b_gamma <= b_gamma',
        // which monotone decrease in gamma contradicts
        let g = grid();
        let v = RadialPotential::coulomb(0.5).unwrap();
        let pw = pointwise_gamma_bound(&v, 1.2, 1.5, &g).unwrap();
        assert!(!pw.holds);
        assert_eq!(pw.violations, pw.points);
        let chk = check_gamma_equivalence(&bump(&g), &v, 1.2, 1.5, -1, &g).unwrap();
        assert!(!chk.holds && chk.lhs > chk.rhs);
    }

    #[test]
    fn shift_below_sup_rejected() {
        let g = grid();
        let v = RadialPotential::coulomb(0.5).unwrap();
        assert!(pointwise_gamma_bound(&v, -0.1, 1.2, &g).is_err());
    }

    #[test]
    fn delta_bound_on_smooth_vector() {
        let g = grid();
        let v = RadialPotential::coulomb(0.5).unwrap();
        let c = 0.75f64.sqrt();
        let form = FormMatrix::assemble(&v, 1.4, -1, &g, Default::default()).unwrap();
        let d = delta_lower_bound(v.sup(), 1.4, c).unwrap();
        let cert = certify_delta_bound(&bump(&g), &form, d).unwrap();
        assert!(cert.holds, "{cert:?}");
    }
}
