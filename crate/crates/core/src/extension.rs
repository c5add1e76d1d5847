//! The Dirac operator on spinor pairs `(phi, chi)` in one channel.
//!
//! `phi` lives on nodes and `chi` on cells. The inner product is
//! `<p, q> = sum_i w_i phi_i phi~_i + sum_j h_j chi_j chi~_j`, and
//!
//! ```text
//! H (phi, chi) = ((V + 1) phi + D* chi,  D phi + (V - 1) chi)
//! ```
//!
//! with `D*` the weighted adjoint and the origin closure acting as a point
//! term on the first node. Eliminating `chi` from `(H + 1 - gamma) p = F`
//! leaves `S_gamma phi = F1 + D*(F2 / (gamma - V))`, which is the assembled
//! form matrix; the resolvent below is exactly that elimination.

use crate::error::{Error, Result};
use crate::form::{FormMatrix, OriginClosure};
use crate::grid::RadialGrid;
use crate::potential::RadialPotential;
use crate::scalar::{ordered_sum, Real};

/// Form eigenvalue below which the elimination is treated as singular.
pub const SINGULAR_MU: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorPair<T> {
    phi: Vec<T>,
    chi: Vec<T>,
    kappa: i32,
    grid: RadialGrid<T>,
}

impl<T: Real> SpinorPair<T> {
    /// `phi` has one entry per node and must vanish at `r_max`; `chi` has one
    /// entry per cell.
    pub fn new(phi: Vec<T>, chi: Vec<T>, kappa: i32, grid: &RadialGrid<T>) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::ZeroKappa);
        }
        if phi.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: phi.len(),
            });
        }
        if chi.len() != grid.cells() {
            return Err(Error::DimensionMismatch {
                expected: grid.cells(),
                got: chi.len(),
            });
        }
        if phi.iter().chain(&chi).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("spinor entries must be finite".to_string()));
        }
        if phi[phi.len() - 1] != T::zero() {
            return Err(Error::Precondition("phi must vanish at r_max".to_string()));
        }
        Ok(Self {
            phi,
            chi,
            kappa,
            grid: grid.clone(),
        })
    }

    pub fn zeros(kappa: i32, grid: &RadialGrid<T>) -> Result<Self> {
        Self::new(vec![T::zero(); grid.len()], vec![T::zero(); grid.cells()], kappa, grid)
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn chi(&self) -> &[T] {
        &self.chi
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.phi, self.chi)
    }

    pub fn norm_sq(&self) -> T {
        pair_dot(&self.grid, (&self.phi, &self.chi), (&self.phi, &self.chi))
    }
}

/// `sum w x1 y1 + sum h x2 y2`, with each product formed as `w (x y)` so the
/// result is exactly symmetric in its arguments.
pub fn pair_dot<T: Real>(grid: &RadialGrid<T>, x: (&[T], &[T]), y: (&[T], &[T])) -> T {
    let up = ordered_sum(grid.weights().iter().zip(x.0.iter().zip(y.0)).map(|(&w, (&a, &b))| w * (a * b)));
    let down = ordered_sum(
        grid.cell_widths()
            .iter()
            .zip(x.1.iter().zip(y.1))
            .map(|(&h, (&a, &b))| h * (a * b)),
    );
    up + down
}

/// `(H - shift) p` restricted to the active nodes, using the closure of `form`.
fn apply_shifted<T: Real>(p: &SpinorPair<T>, form: &FormMatrix<T>, shift: T) -> (Vec<T>, Vec<T>) {
    let grid = form.grid();
    let phi = form.project(&p.phi);
    let op = form.operator();
    let dstar = op.adjoint_apply(&p.chi);
    let w0 = grid.weights()[0];
    let mut g1: Vec<T> = phi
        .iter()
        .zip(form.node_potential())
        .zip(&dstar)
        .map(|((&f, &v), &d)| (v + T::one() - shift) * f + d)
        .collect();
    g1[0] = g1[0] + form.boundary_coefficient() / w0 * phi[0];
    let g2: Vec<T> = op
        .apply(&phi)
        .into_iter()
        .zip(form.cell_gap())
        .zip(&p.chi)
        .map(|((d, &gap), &c)| {
            // V - 1 - shift = (gamma - 1 - shift) - (gamma - V)
            d + (form.gamma() - T::one() - shift - gap) * c
        })
        .collect();
    (form.project(&g1), g2)
}

fn reference_form<T: Real>(
    potential: &RadialPotential<T>,
    gamma: T,
    kappa: i32,
    grid: &RadialGrid<T>,
    closure: OriginClosure,
) -> Result<FormMatrix<T>> {
    FormMatrix::assemble(potential, gamma, kappa, grid, closure)
}

/// `(H_0 + V)(phi, chi)` as node and cell vectors.
pub fn apply_h<T: Real>(p: &SpinorPair<T>, potential: &RadialPotential<T>) -> Result<(Vec<T>, Vec<T>)> {
    apply_h_with(p, potential, OriginClosure::Regular)
}

pub fn apply_h_with<T: Real>(
    p: &SpinorPair<T>,
    potential: &RadialPotential<T>,
    closure: OriginClosure,
) -> Result<(Vec<T>, Vec<T>)> {
    // any admissible gamma gives the same operator; it only enters the form
    let gamma = potential.sup() + T::one();
    let form = reference_form(potential, gamma, p.kappa, &p.grid, closure)?;
    Ok(apply_shifted(p, &form, T::zero()))
}

/// Solves `(H + 1 - gamma)(phi, chi) = (F1, F2)` by eliminating `chi`.
///
/// `F1` is read on the active nodes only. Fails with
/// [`Error::SolverSingular`] when `S_gamma` is not safely positive on this
/// mesh (`mu_1 < SINGULAR_MU`).
pub fn solve_resolvent<T: Real>(
    f1: &[T],
    f2: &[T],
    potential: &RadialPotential<T>,
    gamma: T,
    kappa: i32,
    grid: &RadialGrid<T>,
) -> Result<SpinorPair<T>> {
    let form = FormMatrix::assemble(potential, gamma, kappa, grid, OriginClosure::Regular)?;
    solve_with_form(f1, f2, &form)
}

pub fn solve_with_form<T: Real>(f1: &[T], f2: &[T], form: &FormMatrix<T>) -> Result<SpinorPair<T>> {
    let grid = form.grid();
    if f1.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: f1.len(),
        });
    }
    if f2.len() != grid.cells() {
        return Err(Error::DimensionMismatch {
            expected: grid.cells(),
            got: f2.len(),
        });
    }
    if form.count_below(T::lit(SINGULAR_MU)) > 0 {
        return Err(Error::SolverSingular {
            mu1: form.mu(1)?.to_f64_lossy(),
        });
    }
    let op = form.operator();
    let scaled: Vec<T> = f2.iter().zip(form.cell_gap()).map(|(&f, &g)| f / g).collect();
    let lifted = op.adjoint_apply(&scaled);
    // right-hand side of A phi = W (F1 + D*(F2 / (gamma - V)))
    let rhs: Vec<T> = f1
        .iter()
        .zip(&lifted)
        .zip(grid.weights())
        .map(|((&a, &b), &w)| w * (a + b))
        .collect();
    let active = form.active();
    let block = form.active_block();
    let x = block.solve_spd(&rhs[active.clone()]).ok_or(Error::SolverSingular {
        mu1: form.mu(1)?.to_f64_lossy(),
    })?;
    let mut phi = vec![T::zero(); grid.len()];
    phi[active].copy_from_slice(&x);
    let chi: Vec<T> = op
        .apply(&phi)
        .into_iter()
        .zip(f2)
        .zip(form.cell_gap())
        .map(|((d, &f), &g)| (d - f) / g)
        .collect();
    SpinorPair::new(phi, chi, form.kappa(), grid)
}

/// `|(H + 1 - gamma) p - F| / |F|` in the pair norm, `F1` read on active nodes.
pub fn roundtrip_residual<T: Real>(p: &SpinorPair<T>, f1: &[T], f2: &[T], form: &FormMatrix<T>) -> T {
    let (g1, g2) = apply_shifted(p, form, form.gamma() - T::one());
    let pf1 = form.project(f1);
    let r1: Vec<T> = g1.iter().zip(&pf1).map(|(&a, &b)| a - b).collect();
    let r2: Vec<T> = g2.iter().zip(f2).map(|(&a, &b)| a - b).collect();
    let grid = form.grid();
    let num = pair_dot(grid, (&r1, &r2), (&r1, &r2)).sqrt();
    let den = pair_dot(grid, (&pf1, f2), (&pf1, f2)).sqrt();
    if den > T::zero() {
        num / den
    } else {
        num
    }
}

/// Both sides of the symmetry check and of the eliminated representation
/// `<(H + 1 - gamma) p, q> = b_gamma(phi, phi~) - sum h (gamma - V) e e~`,
/// `e = chi - D phi / (gamma - V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport<T> {
    /// `|<Lp, q> - <p, Lq>| / (|Lp| |q| + |p| |Lq|)`.
    pub defect: T,
    pub lp_q: T,
    pub p_lq: T,
    pub form_part: T,
    /// `sum h (gamma - V) e e~`, which is nonnegative for `p = q`.
    pub schur_part: T,
    /// `form_part - schur_part`, the representation with `gamma - V > 0`.
    pub representation: T,
    /// `form_part + schur_part`, the opposite sign convention, for reference.
    pub representation_flipped: T,
}

pub fn symmetry_defect<T: Real>(
    p: &SpinorPair<T>,
    q: &SpinorPair<T>,
    potential: &RadialPotential<T>,
    gamma: T,
) -> Result<SymmetryReport<T>> {
    if p.kappa != q.kappa || p.grid != q.grid {
        return Err(Error::Precondition("spinors live in different channels or meshes".to_string()));
    }
    let form = FormMatrix::assemble(potential, gamma, p.kappa, &p.grid, OriginClosure::Regular)?;
    Ok(symmetry_with_form(p, q, &form))
}

pub fn symmetry_with_form<T: Real>(p: &SpinorPair<T>, q: &SpinorPair<T>, form: &FormMatrix<T>) -> SymmetryReport<T> {
    let grid = form.grid();
    let shift = form.gamma() - T::one();
    let lp = apply_shifted(p, form, shift);
    let lq = apply_shifted(q, form, shift);
    let pp = (form.project(&p.phi), p.chi.clone());
    let qq = (form.project(&q.phi), q.chi.clone());
    let lp_q = pair_dot(grid, (&lp.0, &lp.1), (&qq.0, &qq.1));
    let p_lq = pair_dot(grid, (&pp.0, &pp.1), (&lq.0, &lq.1));
    let norm = |x: &(Vec<T>, Vec<T>)| pair_dot(grid, (&x.0, &x.1), (&x.0, &x.1)).sqrt();
    let scale = norm(&lp) * norm(&qq) + norm(&pp) * norm(&lq);
    let defect = if scale > T::zero() {
        (lp_q - p_lq).abs() / scale
    } else {
        T::zero()
    };

    let ep = schur_error(&pp.0, &pp.1, form);
    let eq = schur_error(&qq.0, &qq.1, form);
    let schur_part = ordered_sum(
        grid.cell_widths()
            .iter()
            .zip(form.cell_gap())
            .zip(ep.iter().zip(&eq))
            .map(|((&h, &g), (&a, &b))| h * g * (a * b)),
    );
    let form_part = form.bilinear(&pp.0, &qq.0);
    SymmetryReport {
        defect,
        lp_q,
        p_lq,
        form_part,
        schur_part,
        representation: form_part - schur_part,
        representation_flipped: form_part + schur_part,
    }
}

/// `chi - D phi / (gamma - V)` on cells.
fn schur_error<T: Real>(phi: &[T], chi: &[T], form: &FormMatrix<T>) -> Vec<T> {
    form.operator()
        .apply(phi)
        .into_iter()
        .zip(chi)
        .zip(form.cell_gap())
        .map(|((d, &c), &g)| c - d / g)
        .collect()
}

/// Least-squares slopes of the truncated `int phi^2 / r` against `ln(1/r')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSlope<T> {
    pub overall: T,
    /// Fit over the decade of smallest cutoffs.
    pub last_decade: T,
    pub previous_decade: T,
}

impl<T: Real> LogSlope<T> {
    /// Relative change of the slope between the last two decades.
    pub fn drift(&self) -> T {
        if self.previous_decade == T::zero() {
            return T::zero();
        }
        ((self.last_decade - self.previous_decade) / self.previous_decade).abs()
    }
}

/// The inequality `(1 - nu^2) int phi^2/r <= nu b_gamma + (1 + nu (gamma - 2)) |phi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainDiagnostics<T> {
    pub b_gamma_value: T,
    pub r_inv_integral: T,
    /// Truncated integrals keep growing by a constant amount per decade.
    pub r_inv_diverges: bool,
    pub r_inv_truncated: Vec<(T, T)>,
    pub log_slope: Option<LogSlope<T>>,
    pub schur_defect: T,
    pub residual_norms: [T; 2],
    /// Present for nonpositive potentials with `nu < 1`.
    pub chain: Option<ChainCheck<T>>,
}

/// Ratio of successive decade slopes above which growth counts as logarithmic.
const DIVERGENCE_RATIO: f64 = 0.8;

pub fn domain_diagnostics<T: Real>(
    p: &SpinorPair<T>,
    potential: &RadialPotential<T>,
    gamma: T,
    cutoffs: &[T],
) -> Result<DomainDiagnostics<T>> {
    let form = FormMatrix::assemble(potential, gamma, p.kappa, &p.grid, OriginClosure::Regular)?;
    Ok(diagnostics_with_form(p, potential, &form, cutoffs))
}

pub fn diagnostics_with_form<T: Real>(
    p: &SpinorPair<T>,
    potential: &RadialPotential<T>,
    form: &FormMatrix<T>,
    cutoffs: &[T],
) -> DomainDiagnostics<T> {
    let grid = form.grid();
    let phi = form.project(&p.phi);
    let gamma = form.gamma();

    let b_gamma_value = form.value(&phi);
    let density: Vec<T> = phi.iter().zip(grid.nodes()).map(|(&f, &r)| f * f / r).collect();
    let r_inv_integral = grid.integrate(&density);
    let mut r_inv_truncated: Vec<(T, T)> = cutoffs
        .iter()
        .map(|&rc| (rc, truncated_integral(grid, &density, rc)))
        .collect();
    r_inv_truncated.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let log_slope = fit_log_slope(&r_inv_truncated);
    let r_inv_diverges = log_slope.is_some_and(|s| {
        s.last_decade > T::zero() && s.last_decade >= T::lit(DIVERGENCE_RATIO) * s.previous_decade
    });

    let e = schur_error(&phi, &p.chi, form);
    let schur_defect = ordered_sum(
        grid.cell_widths()
            .iter()
            .zip(form.cell_gap())
            .zip(&e)
            .map(|((&h, &g), &x)| h * g * x * x),
    );
    let (r1, r2) = apply_shifted(p, form, gamma - T::one());
    let residual_norms = [grid.norm_sq(&r1).sqrt(), grid.cell_norm_sq(&r2).sqrt()];

    let nu = potential.nu();
    let chain = (nu < T::one() && potential.sup() <= T::zero()).then(|| {
        let lhs = (T::one() - nu * nu) * r_inv_integral;
        let rhs = nu * b_gamma_value + (T::one() + nu * (gamma - T::lit(2.0))) * grid.norm_sq(&phi);
        ChainCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + T::lit(1e-12) * rhs.abs(),
        }
    });

    DomainDiagnostics {
        b_gamma_value,
        r_inv_integral,
        r_inv_diverges,
        r_inv_truncated,
        log_slope,
        schur_defect,
        residual_norms,
        chain,
    }
}

/// Trapezoidal `int_{r'}^{r_max} f dr` over the cells lying above `r'`.
fn truncated_integral<T: Real>(grid: &RadialGrid<T>, f: &[T], cutoff: T) -> T {
    let nodes = grid.nodes();
    let half = T::lit(0.5);
    ordered_sum(
        grid.cell_widths()
            .iter()
            .enumerate()
            .filter(|&(j, _)| nodes[j] >= cutoff)
            .map(|(j, &h)| half * h * (f[j] + f[j + 1])),
    )
}

fn slope<T: Real>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let n = T::count(points.len());
    let xs: Vec<T> = points.iter().map(|&(r, _)| -r.ln()).collect();
    let mx = ordered_sum(xs.iter().copied()) / n;
    let my = ordered_sum(points.iter().map(|&(_, v)| v)) / n;
    let sxy = ordered_sum(xs.iter().zip(points).map(|(&x, &(_, v))| (x - mx) * (v - my)));
    let sxx = ordered_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    (sxx > T::zero()).then(|| sxy / sxx)
}

/// Cutoffs sorted from largest to smallest.
fn fit_log_slope<T: Real>(points: &[(T, T)]) -> Option<LogSlope<T>> {
    let overall = slope(points)?;
    let smallest = points.last()?.0;
    let ten = T::lit(10.0);
    let eps = T::lit(1e-9);
    let within = |lo: T, hi: T| -> Vec<(T, T)> {
        points
            .iter()
            .copied()
            .filter(|&(r, _)| r >= lo * (T::one() - eps) && r <= hi * (T::one() + eps))
            .collect()
    };
    let last_decade = slope(&within(smallest, smallest * ten))?;
    let previous_decade = slope(&within(smallest * ten, smallest * ten * ten))?;
    Some(LogSlope {
        overall,
        last_decade,
        previous_decade,
    })
}

/// Cutoffs `r_max' = 10^{-1}, ...` down to `smallest`, `per_decade` per decade.
pub fn log_cutoffs<T: Real>(largest: T, smallest: T, per_decade: usize) -> Vec<T> {
    let decades = (largest / smallest).log10();
    let steps = (decades * T::count(per_decade)).round().to_usize().unwrap_or(0);
    (0..=steps)
        .map(|i| largest * T::lit(10.0).powf(-T::count(i) / T::count(per_decade)))
        .collect()
}
