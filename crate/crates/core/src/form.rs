//! The shifted quadratic form
//!
//! ```text
//! b_gamma(u, u) = int |D u|^2 / (gamma - V) + (2 - gamma + V) |u|^2 dr
//! ```
//!
//! in one spin-orbit channel, assembled as the tridiagonal matrix
//! `D^T diag(h / (gamma - V_cell)) D + diag(w (2 - gamma + V_node))` plus an
//! origin closure term. Eigenvalues are those of the weighted pencil
//! `A u = mu W u`; the associated operator `S_gamma` is `W^{-1} A`.

use std::ops::Range;

use crate::channel::ChannelOperator;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::potential::RadialPotential;
use crate::scalar::{ordered_sum, Real};
use crate::tridiag::{Eigenpair, SymTridiagonal};

/// How the truncation at `r_min` is closed.
///
/// `Regular` imposes the ratio `chi / phi = (s + kappa) / nu0` of the regular
/// near-origin solution `r^s`, `s = sqrt(kappa^2 - nu0^2)`, through a boundary
/// term `beta phi(r_min)^2` with `beta = (s + kappa) / nu0`. This is what keeps
/// the form-domain solution at critical coupling, whose upper component tends
/// to a nonzero constant at the origin. `Dirichlet` pins `phi(r_min) = 0`.
/// Both pin `phi(r_max) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OriginClosure {
    #[default]
    Regular,
    Dirichlet,
}

impl std::fmt::Display for OriginClosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OriginClosure::Regular => "regular",
            OriginClosure::Dirichlet => "dirichlet",
        })
    }
}

impl std::str::FromStr for OriginClosure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "regular" => Ok(OriginClosure::Regular),
            "dirichlet" => Ok(OriginClosure::Dirichlet),
            other => Err(format!("unknown origin closure `{other}` (expected regular | dirichlet)")),
        }
    }
}

/// Boundary coefficient at `r_min`, or `None` when the node is pinned.
pub fn closure_coefficient<T: Real>(
    closure: OriginClosure,
    potential: &RadialPotential<T>,
    kappa: i32,
) -> Option<T> {
    match closure {
        OriginClosure::Dirichlet => None,
        OriginClosure::Regular => {
            let nu0 = potential.origin_coupling();
            let s = potential.origin_exponent(kappa);
            let k = T::lit(f64::from(kappa));
            if kappa < 0 {
                // (s + kappa) / nu0 rewritten without the cancellation
                Some(-nu0 / (s - k))
            } else if nu0 > T::zero() {
                Some(nu0 / (k - s))
            } else {
                None
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FormMatrix<T> {
    gamma: T,
    kappa: i32,
    potential_label: String,
    potential_sup: T,
    closure: OriginClosure,
    operator: ChannelOperator<T>,
    kinetic: SymTridiagonal<T>,
    mass: Vec<T>,
    boundary: T,
    matrix: SymTridiagonal<T>,
    active: Range<usize>,
    cell_gap: Vec<T>,
    node_potential: Vec<T>,
}

impl<T: Real> FormMatrix<T> {
    pub fn assemble(
        potential: &RadialPotential<T>,
        gamma: T,
        kappa: i32,
        grid: &RadialGrid<T>,
        closure: OriginClosure,
    ) -> Result<Self> {
        if !(gamma > potential.sup()) {
            return Err(Error::GammaBelowSup {
                gamma: gamma.to_f64_lossy(),
                sup: potential.sup().to_f64_lossy(),
            });
        }
        potential.check_on(grid)?;
        let operator = ChannelOperator::new(kappa, grid)?;
        let node_potential = potential.on_nodes(grid);
        let cell_gap: Vec<T> = potential
            .on_cells(grid)
            .into_iter()
            .map(|v| gamma - v)
            .collect();

        let n = grid.len();
        let mut kinetic = SymTridiagonal::zeros(n);
        {
            let (lower, upper) = (operator.lower(), operator.upper());
            let widths = grid.cell_widths();
            for j in 0..grid.cells() {
                let c = widths[j] / cell_gap[j];
                let (a, b) = (lower[j], upper[j]);
                kinetic.diag_mut()[j] = kinetic.diag()[j] + c * a * a;
                kinetic.diag_mut()[j + 1] = kinetic.diag()[j + 1] + c * b * b;
                kinetic.off_mut()[j] = c * a * b;
            }
        }
        let two = T::lit(2.0);
        let mass: Vec<T> = grid
            .weights()
            .iter()
            .zip(&node_potential)
            .map(|(&w, &v)| w * (two - gamma + v))
            .collect();

        let beta = closure_coefficient(closure, potential, kappa);
        let first = if beta.is_some() { 0 } else { 1 };
        let boundary = beta.unwrap_or(T::zero());

        let mut matrix = kinetic.clone();
        for (d, &m) in matrix.diag_mut().iter_mut().zip(&mass) {
            *d = *d + m;
        }
        matrix.diag_mut()[0] = matrix.diag()[0] + boundary;

        Ok(Self {
            gamma,
            kappa,
            potential_label: potential.label().to_string(),
            potential_sup: potential.sup(),
            closure,
            operator,
            kinetic,
            mass,
            boundary,
            matrix,
            active: first..n - 1,
            cell_gap,
            node_potential,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn potential_label(&self) -> &str {
        &self.potential_label
    }

    /// `sup V` of the potential the form was built from.
    pub fn potential_sup(&self) -> T {
        self.potential_sup
    }

    pub fn closure(&self) -> OriginClosure {
        self.closure
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        self.operator.grid()
    }

    pub fn operator(&self) -> &ChannelOperator<T> {
        &self.operator
    }

    /// Kinetic summand `D^T diag(h / (gamma - V)) D` over all nodes.
    pub fn kinetic(&self) -> &SymTridiagonal<T> {
        &self.kinetic
    }

    /// Mass-potential summand `w (2 - gamma + V)` over all nodes.
    pub fn mass_potential(&self) -> &[T] {
        &self.mass
    }

    /// Closure term on the first node (zero when that node is pinned).
    pub fn boundary_coefficient(&self) -> T {
        self.boundary
    }

    /// Full `N x N` assembled matrix (rows of pinned nodes included).
    pub fn matrix(&self) -> &SymTridiagonal<T> {
        &self.matrix
    }

    /// Nodes carrying unknowns.
    pub fn active(&self) -> Range<usize> {
        self.active.clone()
    }

    pub fn active_block(&self) -> SymTridiagonal<T> {
        self.matrix.block(self.active.start, self.active.end)
    }

    pub fn active_weights(&self) -> &[T] {
        &self.grid().weights()[self.active.clone()]
    }

    /// `gamma - V` at cell midpoints.
    pub fn cell_gap(&self) -> &[T] {
        &self.cell_gap
    }

    pub fn node_potential(&self) -> &[T] {
        &self.node_potential
    }

    /// Copy of `u` with pinned entries set to zero.
    pub fn project(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .enumerate()
            .map(|(i, &v)| if self.active.contains(&i) { v } else { T::zero() })
            .collect()
    }

    /// `b_gamma(u, v)` on the discrete form domain; pinned entries are ignored.
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let (pu, pv) = (self.project(u), self.project(v));
        self.matrix.bilinear(&pu, &pv)
    }

    pub fn value(&self, u: &[T]) -> T {
        self.bilinear(u, u)
    }

    /// `sum_j h_j |(D u)_j|^2 / (gamma - V_j)`.
    pub fn kinetic_value(&self, u: &[T]) -> T {
        let du = self.operator.apply(&self.project(u));
        ordered_sum(
            du.iter()
                .zip(&self.cell_gap)
                .zip(self.grid().cell_widths())
                .map(|((&d, &g), &h)| h * d * d / g),
        )
    }

    /// `A u` with pinned rows zeroed; `W^{-1} A u` is `S_gamma u`.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let au = self.matrix.matvec(&self.project(u));
        self.project(&au)
    }

    /// `d b_gamma(u, u) / d gamma = -(sum h |Du|^2 / (gamma - V)^2 + |u|_w^2)`.
    pub fn gamma_derivative(&self, u: &[T]) -> T {
        let pu = self.project(u);
        let du = self.operator.apply(&pu);
        let kin = ordered_sum(
            du.iter()
                .zip(&self.cell_gap)
                .zip(self.grid().cell_widths())
                .map(|((&d, &g), &h)| h * d * d / (g * g)),
        );
        -(kin + self.grid().norm_sq(&pu))
    }

    fn embed(&self, x: Vec<T>) -> Vec<T> {
        let mut full = vec![T::zero(); self.grid().len()];
        full[self.active.clone()].copy_from_slice(&x);
        full
    }

    /// `k`-th eigenvalue (1-based) of the pencil.
    pub fn mu(&self, k: usize) -> Result<T> {
        self.active_block().eigenvalue(k, self.active_weights())
    }

    /// Number of eigenvalues of the pencil below `sigma`.
    pub fn count_below(&self, sigma: T) -> usize {
        self.active_block().count_below(sigma, self.active_weights())
    }

    /// Dense `N x N` copy, for tests on small meshes.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.grid().len();
        let mut out = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            out[i][i] = self.matrix.diag()[i];
            if i + 1 < n {
                out[i][i + 1] = self.matrix.off()[i];
                out[i + 1][i] = self.matrix.off()[i];
            }
        }
        out
    }
}

pub fn assemble_form<T: Real>(
    potential: &RadialPotential<T>,
    gamma: T,
    kappa: i32,
    grid: &RadialGrid<T>,
) -> Result<FormMatrix<T>> {
    FormMatrix::assemble(potential, gamma, kappa, grid, OriginClosure::Regular)
}

/// Lowest `k` eigenpairs of `A u = mu W u`, vectors `W`-orthonormal and
/// embedded in the full node space (zeros on pinned nodes).
pub fn lowest_eigenpairs<T: Real>(form: &FormMatrix<T>, k: usize) -> Result<Vec<Eigenpair<T>>> {
    let n = form.grid().len();
    if k == 0 || k > n / 4 {
        return Err(Error::Precondition(format!("requested {k} eigenpairs; need 1 <= k <= N/4 = {}", n / 4)));
    }
    let pairs = form
        .active_block()
        .lowest_eigenpairs(k, form.active_weights())?;
    Ok(pairs
        .into_iter()
        .map(|p| Eigenpair {
            value: p.value,
            vector: form.embed(p.vector),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{default_grid, MeshScheme};

    #[test]
    fn gamma_below_sup_rejected() {
        let g = RadialGrid::<f64>::new(1e-3, 10.0, 64, MeshScheme::LogUniform).unwrap();
        let v = RadialPotential::coulomb(0.5).unwrap();
        assert!(matches!(
            assemble_form(&v, -0.5, -1, &g),
            Err(Error::GammaBelowSup { .. })
        ));
    }

    #[test]
    fn matrix_is_symmetric_and_matches_quadrature() {
        let g = RadialGrid::<f64>::new(1e-3, 20.0, 80, MeshScheme::LogUniform).unwrap();
        let v = RadialPotential::coulomb(1.0).unwrap();
        let f = FormMatrix::assemble(&v, 1.0, -1, &g, OriginClosure::Dirichlet).unwrap();
        let dense = f.to_dense();
        for i in 0..dense.len() {
            for j in 0..dense.len() {
                assert_eq!(dense[i][j], dense[j][i]);
            }
        }
        let mut u: Vec<f64> = g.nodes().iter().map(|&r| r * (-r).exp()).collect();
        u[0] = 0.0;
        *u.last_mut().unwrap() = 0.0;
        let d = ChannelOperator::new(-1, &g).unwrap().apply(&u);
        let kin: f64 = d
            .iter()
            .zip(g.midpoints())
            .zip(g.cell_widths())
            .map(|((&x, &m), &h)| h * x * x / (1.0 + 1.0 / m))
            .sum();
        let pot: f64 = g
            .nodes()
            .iter()
            .zip(g.weights())
            .zip(&u)
            .map(|((&r, &w), &x)| w * (1.0 - 1.0 / r) * x * x)
            .sum();
        let val = f.value(&u);
        assert!((val - (kin + pot)).abs() < 1e-12 * (kin.abs() + pot.abs()));
    }

    #[test]
    fn free_form_bounded_below_by_mass() {
        let g = RadialGrid::<f64>::new(1e-3, 30.0, 400, MeshScheme::LogUniform).unwrap();
        let v = RadialPotential::free();
        let f = assemble_form(&v, 1.0, -1, &g).unwrap();
        let pairs = lowest_eigenpairs(&f, 1).unwrap();
        assert!(pairs[0].value >= 1.0);
    }

    #[test]
    fn eigenpair_request_bounds() {
        let g = RadialGrid::<f64>::new(1e-3, 10.0, 64, MeshScheme::LogUniform).unwrap();
        let v = RadialPotential::coulomb(0.5).unwrap();
        let f = assemble_form(&v, 1.5, -1, &g).unwrap();
        assert!(lowest_eigenpairs(&f, 0).is_err());
        assert!(lowest_eigenpairs(&f, 64).is_err());
        assert!(lowest_eigenpairs(&f, 16).is_ok());
    }

    #[test]
    fn closure_coefficient_matches_regular_ratio() {
        let v = RadialPotential::<f64>::coulomb(1.0).unwrap();
        assert_eq!(closure_coefficient(OriginClosure::Regular, &v, -1), Some(-1.0));
        assert_eq!(closure_coefficient(OriginClosure::Regular, &v, 1), Some(1.0));
        assert_eq!(closure_coefficient(OriginClosure::Dirichlet, &v, -1), None);
        let v = RadialPotential::<f64>::coulomb(0.6).unwrap();
        let b = closure_coefficient(OriginClosure::Regular, &v, -1).unwrap();
        assert!((b - (0.8 - 1.0) / 0.6).abs() < 1e-15);
        assert_eq!(closure_coefficient(OriginClosure::Regular, &RadialPotential::<f64>::free(), 2), None);
        assert_eq!(closure_coefficient(OriginClosure::Regular, &RadialPotential::<f64>::free(), -2), Some(0.0));
    }

    #[test]
    fn default_mesh_assembles() {
        let g = default_grid::<f64>();
        let v = RadialPotential::coulomb(0.5).unwrap();
        let f = assemble_form(&v, 1.5, -1, &g).unwrap();
        assert_eq!(f.active(), 0..3999);
    }
}
