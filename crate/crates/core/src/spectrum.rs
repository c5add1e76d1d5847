//! Bound states as zero modes of the eliminated form.
//!
//! `E` is an eigenvalue in channel `kappa` iff `mu_k(S_{1+E}) = 0` for some
//! `k`, and `mu_k` decreases strictly in `gamma`. The root is bracketed with
//! Sturm counts at zero (count `>= k` iff `mu_k < 0`), so no eigenvector is
//! needed until the end.

use std::fmt;

use crate::error::{Error, Result};
use crate::extension::{apply_h_with, pair_dot, SpinorPair};
use crate::form::{lowest_eigenpairs, FormMatrix, OriginClosure};
use crate::grid::{MeshInfo, RadialGrid};
use crate::potential::RadialPotential;
use crate::scalar::Real;

pub const DEFAULT_TOL_GAMMA: f64 = 1e-8;
pub const DEFAULT_TOL_MU: f64 = 1e-7;
/// Gap kept between the search window and `sup V` or `2`.
pub const WINDOW_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootFlag {
    /// `mu_k` changes sign inside the window.
    SignChange,
    /// Critical channel ground state; in the continuum the root sits at the
    /// window end `gamma = 1 + c(V)` and the mesh value only approaches it.
    CriticalEndpoint,
}

impl fmt::Display for RootFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootFlag::SignChange => "sign-change",
            RootFlag::CriticalEndpoint => "critical-endpoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult<T> {
    pub e: T,
    pub gamma_star: T,
    pub kappa: i32,
    pub k: usize,
    pub mu_at_root: T,
    /// Upper component, `W`-normalized together with `chi`.
    pub phi: Vec<T>,
    /// `D phi / (gamma* - V)` on cells.
    pub chi: Vec<T>,
    pub bracket: (T, T),
    pub flag: RootFlag,
    pub mesh: MeshInfo,
}

impl<T: Real> SpectralResult<T> {
    pub fn spinor(&self, grid: &RadialGrid<T>) -> Result<SpinorPair<T>> {
        SpinorPair::new(self.phi.clone(), self.chi.clone(), self.kappa, grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSearch<T> {
    pub tol_gamma: T,
    pub tol_mu: T,
    /// Search window in `gamma`; `None` uses `(sup V + 1e-6, 2 - 1e-6)`.
    pub window: Option<(T, T)>,
    pub closure: OriginClosure,
}

impl<T: Real> Default for EigenSearch<T> {
    fn default() -> Self {
        Self {
            tol_gamma: T::lit(DEFAULT_TOL_GAMMA),
            tol_mu: T::lit(DEFAULT_TOL_MU),
            window: None,
            closure: OriginClosure::Regular,
        }
    }
}

pub fn find_eigenvalue<T: Real>(
    potential: &RadialPotential<T>,
    kappa: i32,
    k: usize,
    grid: &RadialGrid<T>,
    tol_gamma: T,
    tol_mu: T,
) -> Result<SpectralResult<T>> {
    let search = EigenSearch {
        tol_gamma,
        tol_mu,
        ..EigenSearch::default()
    };
    find_eigenvalue_with(potential, kappa, k, grid, &search)
}

pub fn find_eigenvalue_with<T: Real>(
    potential: &RadialPotential<T>,
    kappa: i32,
    k: usize,
    grid: &RadialGrid<T>,
    search: &EigenSearch<T>,
) -> Result<SpectralResult<T>> {
    if kappa == 0 {
        return Err(Error::ZeroKappa);
    }
    if k == 0 || k > grid.len() / 4 {
        return Err(Error::Precondition(format!("state index {k} outside 1..={}", grid.len() / 4)));
    }
    if !(search.tol_gamma > T::zero() && search.tol_mu > T::zero()) {
        return Err(Error::Precondition("tolerances must be positive".to_string()));
    }
    let margin = T::lit(WINDOW_MARGIN);
    let (mut lo, mut hi) = search
        .window
        .unwrap_or((potential.sup() + margin, T::lit(2.0) - margin));
    let (lo0, hi0) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    if !(lo < hi) {
        return Err(Error::WindowInvalid {
            lo: lo0,
            hi: hi0,
            why: "empty window",
        });
    }
    if !(lo > potential.sup()) {
        return Err(Error::WindowInvalid {
            lo: lo0,
            hi: hi0,
            why: "lower end must exceed sup V",
        });
    }
    let form_at = |gamma: T| FormMatrix::assemble(potential, gamma, kappa, grid, search.closure);
    let below = |gamma: T| -> Result<bool> { Ok(form_at(gamma)?.count_below(T::zero()) >= k) };

    if below(lo)? {
        return Err(Error::WindowInvalid {
            lo: lo0,
            hi: hi0,
            why: "mu_k is already negative at the lower end",
        });
    }
    if !below(hi)? {
        let margin = form_at(hi)?.mu(k)?;
        return Err(Error::NoEigenvalue {
            k,
            margin: margin.to_f64_lossy(),
        });
    }

    let half = T::lit(0.5);
    let mut mu_mid;
    loop {
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            mu_mid = form_at(mid)?.mu(k)?;
            break;
        }
        if hi - lo <= search.tol_gamma {
            mu_mid = form_at(mid)?.mu(k)?;
            if mu_mid.abs() <= search.tol_mu {
                break;
            }
        }
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma_star = half * (lo + hi);
    let form = form_at(gamma_star)?;
    let pairs = lowest_eigenpairs(&form, k)?;
    let mut phi = pairs[k - 1].vector.clone();
    let mut chi: Vec<T> = form
        .operator()
        .apply(&phi)
        .into_iter()
        .zip(form.cell_gap())
        .map(|(d, &g)| d / g)
        .collect();
    let norm = pair_dot(grid, (&phi, &chi), (&phi, &chi)).sqrt();
    // fix the overall sign by the largest upper-component entry
    let peak = phi.iter().copied().fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
    let scale = if peak < T::zero() { -norm.recip() } else { norm.recip() };
    phi.iter_mut().chain(chi.iter_mut()).for_each(|v| *v = *v * scale);

    let critical = potential.origin_exponent(kappa) == T::zero();
    let flag = if critical && k == 1 {
        RootFlag::CriticalEndpoint
    } else {
        RootFlag::SignChange
    };
    Ok(SpectralResult {
        e: gamma_star - T::one(),
        gamma_star,
        kappa,
        k,
        mu_at_root: mu_mid,
        phi,
        chi,
        bracket: (lo, hi),
        flag,
        mesh: grid.summary(),
    })
}

/// `|H p - E p| / |p|` for a computed eigenpair.
pub fn eigen_residual<T: Real>(
    result: &SpectralResult<T>,
    potential: &RadialPotential<T>,
    grid: &RadialGrid<T>,
    closure: OriginClosure,
) -> Result<T> {
    let p = result.spinor(grid)?;
    let (g1, g2) = apply_h_with(&p, potential, closure)?;
    let r1: Vec<T> = g1.iter().zip(p.phi()).map(|(&a, &b)| a - result.e * b).collect();
    let r2: Vec<T> = g2.iter().zip(p.chi()).map(|(&a, &b)| a - result.e * b).collect();
    Ok((pair_dot(grid, (&r1, &r2), (&r1, &r2)) / p.norm_sq()).sqrt())
}

/// Power `s` in `phi ~ r^s`, by least squares of `ln|phi|` on `ln r` over the
/// first decade of nodes `[r_min, 10 r_min]`.
pub fn eigenfunction_exponent<T: Real>(phi: &[T], grid: &RadialGrid<T>) -> Result<T> {
    if phi.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: phi.len(),
        });
    }
    let limit = grid.r_min() * T::lit(10.0) * (T::one() + T::lit(1e-12));
    let points: Vec<(T, T)> = grid
        .nodes()
        .iter()
        .zip(phi)
        .take_while(|(&r, _)| r <= limit)
        .filter(|(_, &f)| f != T::zero())
        .map(|(&r, &f)| (r.ln(), f.abs().ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientNodes(points.len()));
    }
    let n = T::count(points.len());
    let mx = points.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = points.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = points.iter().fold((T::zero(), T::zero()), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MeshScheme;
    use crate::oracle::analytic_oracle;

    fn grid(n: usize) -> RadialGrid<f64> {
        RadialGrid::new(1e-6, 60.0, n, MeshScheme::LogUniform).unwrap()
    }

    #[test]
    fn exact_power_law_exponent() {
        let g = grid(400);
        let phi: Vec<f64> = g.nodes().to_vec();
        let s = eigenfunction_exponent(&phi, &g).unwrap();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exponent_needs_nodes_in_first_decade() {
        let g = RadialGrid::<f64>::new(1.0, 1000.0, 16, MeshScheme::Uniform).unwrap();
        let phi: Vec<f64> = g.nodes().to_vec();
        assert!(matches!(eigenfunction_exponent(&phi, &g), Err(Error::InsufficientNodes(_))));
    }

    #[test]
    fn free_channel_has_no_bound_state() {
        let g = grid(600);
        let r = find_eigenvalue(&RadialPotential::free(), -1, 1, &g, 1e-8, 1e-7);
        assert!(matches!(r, Err(Error::NoEigenvalue { k: 1, .. })));
    }

    #[test]
    fn coarse_mesh_ground_state_and_eigenpair() {
        let g = grid(1000);
        let v = RadialPotential::coulomb(0.9).unwrap();
        let r = find_eigenvalue(&v, -1, 1, &g, 1e-8, 1e-7).unwrap();
        let exact = analytic_oracle(0.9, -1, 1).unwrap();
        assert!(((r.e - exact) / exact).abs() < 1e-3, "{} vs {exact}", r.e);
        assert_eq!(r.flag, RootFlag::SignChange);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-8);
        assert!(r.bracket.0 <= r.gamma_star && r.gamma_star <= r.bracket.1);
        assert!(r.mu_at_root.abs() <= 1e-7);
        let res = eigen_residual(&r, &v, &g, OriginClosure::Regular).unwrap();
        assert!(res <= 10.0 * (r.e - exact).abs(), "residual {res}");
    }

    #[test]
    fn window_checks() {
        let g = grid(400);
        let v = RadialPotential::coulomb(0.5).unwrap();
        let s = EigenSearch {
            window: Some((1.5, 1.2)),
            ..EigenSearch::default()
        };
        assert!(matches!(find_eigenvalue_with(&v, -1, 1, &g, &s), Err(Error::WindowInvalid { .. })));
        let s = EigenSearch {
            window: Some((1.95, 1.99)),
            ..EigenSearch::default()
        };
        assert!(matches!(find_eigenvalue_with(&v, -1, 1, &g, &s), Err(Error::WindowInvalid { .. })));
    }
}
