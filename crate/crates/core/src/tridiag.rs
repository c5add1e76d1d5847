//! Symmetric tridiagonal pencils `A - sigma W` with `W` a positive diagonal.
//!
//! Everything here works on the unscaled pencil: Sturm counts for inertia,
//! bisection for individual eigenvalues, inverse iteration for eigenvectors and
//! an `LDL^T` solve for the positive definite case. Working on `A` directly
//! (instead of `W^{-1/2} A W^{-1/2}`) keeps small eigenvalues accurate on
//! strongly graded meshes, where the scaled matrix has entries near `1e11`.

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Real};

const MAX_BISECTION_STEPS: usize = 600;
const INVERSE_ITERATIONS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

/// One eigenpair of a pencil; the vector is `W`-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair<T> {
    pub value: T,
    pub vector: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal must be one shorter than the diagonal"
        );
        Self { diag, off }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![T::zero(); n], vec![T::zero(); n.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub(crate) fn diag_mut(&mut self) -> &mut [T] {
        &mut self.diag
    }

    pub(crate) fn off_mut(&mut self) -> &mut [T] {
        &mut self.off
    }

    /// Contiguous principal block `[start, end)`.
    pub fn block(&self, start: usize, end: usize) -> Self {
        Self::new(
            self.diag[start..end].to_vec(),
            self.off[start..end.saturating_sub(1).max(start)].to_vec(),
        )
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc = acc + self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        ordered_sum(x.iter().zip(self.matvec(y)).map(|(&a, b)| a * b))
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s = s + self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s = s + self.off[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    fn pivot_floor(&self) -> T {
        let max_off = self.off.iter().fold(T::zero(), |m, &b| m.max(b.abs()));
        T::min_positive_value() * (max_off * max_off).max(T::one())
    }

    /// Number of eigenvalues of the pencil strictly below `sigma`
    /// (negative pivots of `A - sigma W`).
    pub fn count_below(&self, sigma: T, w: &[T]) -> usize {
        let floor = self.pivot_floor();
        let mut count = 0;
        let mut d = T::one();
        for i in 0..self.len() {
            let mut piv = self.diag[i] - sigma * w[i];
            if i > 0 {
                piv = piv - self.off[i - 1] * self.off[i - 1] / d;
            }
            if piv.abs() < floor {
                piv = -floor;
            }
            if piv < T::zero() {
                count += 1;
            }
            d = piv;
        }
        count
    }

    /// Gershgorin enclosure of the pencil spectrum.
    pub fn gershgorin(&self, w: &[T]) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut radius = T::zero();
            if i > 0 {
                radius = radius + self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius = radius + self.off[i].abs();
            }
            lo = lo.min((self.diag[i] - radius) / w[i]);
            hi = hi.max((self.diag[i] + radius) / w[i]);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (1-based) of `A u = mu W u`, by bisection
    /// on Sturm counts to full working precision.
    pub fn eigenvalue(&self, k: usize, w: &[T]) -> Result<T> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::Precondition(format!("eigenvalue index {k} outside 1..={n}")));
        }
        let (g_lo, g_hi) = self.gershgorin(w);
        let pad = T::lit(2.0) * T::epsilon() * g_lo.abs().max(g_hi.abs()) + T::min_positive_value();
        let mut lo = g_lo - pad;
        let mut hi = g_hi + pad;
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = T::lit(0.5) * (lo + hi);
            let width = hi - lo;
            let tol = T::lit(2.0) * T::epsilon() * lo.abs().max(hi.abs()) + T::min_positive_value();
            if width <= tol || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.count_below(mid, w) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NoConvergence(format!("bisection for eigenvalue {k} exceeded {MAX_BISECTION_STEPS} steps")))
    }

    /// `LDL^T` factorization of `A - sigma W`. Pivots smaller than the floor
    /// are nudged, which is what inverse iteration wants.
    fn factor_shifted(&self, sigma: T, w: &[T]) -> Ldl<T> {
        let n = self.len();
        let floor = T::epsilon() * self.norm_inf().max(T::min_positive_value());
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut piv = self.diag[i] - sigma * w[i];
            if i > 0 {
                let l = self.off[i - 1] / pivots[i - 1];
                mult.push(l);
                piv = piv - l * self.off[i - 1];
            }
            if piv.abs() < floor {
                piv = if piv < T::zero() { -floor } else { floor };
            }
            pivots.push(piv);
        }
        Ldl { pivots, mult }
    }

    /// Solves `A x = b` when `A` is positive definite; `None` when a
    /// nonpositive pivot shows it is not.
    pub fn solve_spd(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.len();
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut piv = self.diag[i];
            if i > 0 {
                let l = self.off[i - 1] / pivots[i - 1];
                mult.push(l);
                piv = piv - l * self.off[i - 1];
            }
            if !(piv > T::zero()) {
                return None;
            }
            pivots.push(piv);
        }
        Some(Ldl { pivots, mult }.solve(b))
    }

    /// Lowest `k` eigenpairs of `A u = mu W u`, vectors `W`-orthonormal.
    pub fn lowest_eigenpairs(&self, k: usize, w: &[T]) -> Result<Vec<Eigenpair<T>>> {
        let mut pairs: Vec<Eigenpair<T>> = Vec::with_capacity(k);
        let norm_a = self.norm_inf();
        for idx in 1..=k {
            let value = self.eigenvalue(idx, w)?;
            let vector = self.inverse_iteration(value, w, &pairs, norm_a)?;
            pairs.push(Eigenpair { value, vector });
        }
        Ok(pairs)
    }

    fn inverse_iteration(&self, mu: T, w: &[T], previous: &[Eigenpair<T>], norm_a: T) -> Result<Vec<T>> {
        let n = self.len();
        let ldl = self.factor_shifted(mu, w);
        // deterministic, non-symmetric start so no eigenvector is missed by symmetry
        let mut x: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.5) * (T::count(i) * T::lit(0.618_033_988_75)).sin())
            .collect();
        w_normalize(&mut x, w);
        let tol = T::lit(1e-10) * norm_a;
        let mut last_residual = T::infinity();
        for _ in 0..INVERSE_ITERATIONS {
            let rhs: Vec<T> = x.iter().zip(w).map(|(&v, &wi)| v * wi).collect();
            x = ldl.solve(&rhs);
            for p in previous {
                let proj = w_dot(&x, &p.vector, w);
                for (xi, &pi) in x.iter_mut().zip(&p.vector) {
                    *xi = *xi - proj * pi;
                }
            }
            w_normalize(&mut x, w);
            last_residual = self.residual_norm(mu, &x, w);
            let xnorm = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
            if last_residual <= tol * xnorm {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence(format!(
            "inverse iteration at mu = {mu}: residual {last_residual} above {tol}"
        )))
    }

    /// `|A x - mu W x|_inf`.
    pub fn residual_norm(&self, mu: T, x: &[T], w: &[T]) -> T {
        self.matvec(x)
            .iter()
            .zip(x.iter().zip(w))
            .map(|(&ax, (&xi, &wi))| (ax - mu * wi * xi).abs())
            .fold(T::zero(), T::max)
    }
}

struct Ldl<T> {
    pivots: Vec<T>,
    mult: Vec<T>,
}

impl<T: Real> Ldl<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.pivots.len();
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] = y[i] - self.mult[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] = y[i] / self.pivots[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] = y[i] - self.mult[i] * y[i + 1];
        }
        y
    }
}

pub(crate) fn w_dot<T: Real>(a: &[T], b: &[T], w: &[T]) -> T {
    ordered_sum(a.iter().zip(b).zip(w).map(|((&x, &y), &wi)| wi * x * y))
}

fn w_normalize<T: Real>(x: &mut [T], w: &[T]) {
    let nrm = w_dot(x, x, w).sqrt();
    if nrm > T::zero() {
        for v in x.iter_mut() {
            *v = *v / nrm;
        }
    }
}
