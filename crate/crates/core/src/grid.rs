//! Radial meshes on a truncated half-line `[r_min, r_max]`.
//!
//! The upper spinor component lives on the nodes; the lower component lives
//! on the cells between consecutive nodes. Node weights are trapezoidal and
//! cell weights are the cell widths, so both quadratures sum to
//! `r_max - r_min`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Real};

pub const MIN_NODES: usize = 16;

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshScheme {
    Uniform,
    LogUniform,
}

impl fmt::Display for MeshScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshScheme::Uniform => "uniform",
            MeshScheme::LogUniform => "log-uniform",
        })
    }
}

impl FromStr for MeshScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(MeshScheme::Uniform),
            "log-uniform" | "log" => Ok(MeshScheme::LogUniform),
            other => Err(format!("unknown mesh scheme `{other}` (expected uniform | log-uniform)")),
        }
    }
}

#[derive(Debug, PartialEq)]
struct GridData<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    widths: Vec<T>,
    midpoints: Vec<T>,
    r_min: T,
    r_max: T,
    scheme: MeshScheme,
}

/// Immutable radial mesh. Cloning is cheap (shared storage).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    data: Arc<GridData<T>>,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(r_min: T, r_max: T, n: usize, scheme: MeshScheme) -> Result<Self> {
        if !(r_min > T::zero()) || !(r_min < r_max) || !r_max.is_finite() {
            return Err(Error::InvalidRange {
                r_min: r_min.to_f64_lossy(),
                r_max: r_max.to_f64_lossy(),
            });
        }
        if n < MIN_NODES {
            return Err(Error::TooFewNodes { n, min: MIN_NODES });
        }
        let last = T::count(n - 1);
        let mut nodes: Vec<T> = match scheme {
            MeshScheme::Uniform => {
                let h = (r_max - r_min) / last;
                (0..n).map(|i| r_min + T::count(i) * h).collect()
            }
            MeshScheme::LogUniform => {
                let (lo, hi) = (r_min.ln(), r_max.ln());
                let step = (hi - lo) / last;
                (0..n).map(|i| (lo + T::count(i) * step).exp()).collect()
            }
        };
        nodes[0] = r_min;
        nodes[n - 1] = r_max;

        let widths: Vec<T> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let half = T::lit(0.5);
        let midpoints: Vec<T> = nodes.windows(2).map(|w| half * (w[0] + w[1])).collect();
        let mut weights = vec![T::zero(); n];
        for (j, &h) in widths.iter().enumerate() {
            weights[j] = weights[j] + half * h;
            weights[j + 1] = weights[j + 1] + half * h;
        }

        Ok(Self {
            data: Arc::new(GridData {
                nodes,
                weights,
                widths,
                midpoints,
                r_min,
                r_max,
                scheme,
            }),
        })
    }

    /// Number of nodes `N`.
    pub fn len(&self) -> usize {
        self.data.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nodes.is_empty()
    }

    /// Number of cells, `N - 1`.
    pub fn cells(&self) -> usize {
        self.data.widths.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.data.nodes
    }

    /// Trapezoidal node weights.
    pub fn weights(&self) -> &[T] {
        &self.data.weights
    }

    /// Cell widths `r_{j+1} - r_j`, the quadrature weights of the cell space.
    pub fn cell_widths(&self) -> &[T] {
        &self.data.widths
    }

    pub fn midpoints(&self) -> &[T] {
        &self.data.midpoints
    }

    pub fn r_min(&self) -> T {
        self.data.r_min
    }

    pub fn r_max(&self) -> T {
        self.data.r_max
    }

    pub fn scheme(&self) -> MeshScheme {
        self.data.scheme
    }

    /// Trapezoidal integral of a node function.
    pub fn integrate(&self, f: &[T]) -> T {
        ordered_sum(self.weights().iter().zip(f).map(|(&w, &v)| w * v))
    }

    /// Weighted inner product of two node functions.
    pub fn dot(&self, a: &[T], b: &[T]) -> T {
        ordered_sum(
            self.weights()
                .iter()
                .zip(a.iter().zip(b))
                .map(|(&w, (&x, &y))| w * x * y),
        )
    }

    pub fn norm_sq(&self, a: &[T]) -> T {
        self.dot(a, a)
    }

    /// Inner product of two cell functions.
    pub fn cell_dot(&self, a: &[T], b: &[T]) -> T {
        ordered_sum(
            self.cell_widths()
                .iter()
                .zip(a.iter().zip(b))
                .map(|(&h, (&x, &y))| h * x * y),
        )
    }

    pub fn cell_norm_sq(&self, a: &[T]) -> T {
        self.cell_dot(a, a)
    }

    pub fn summary(&self) -> MeshInfo {
        MeshInfo {
            r_min: self.r_min().to_f64_lossy(),
            r_max: self.r_max().to_f64_lossy(),
            n: self.len(),
            scheme: self.scheme(),
        }
    }
}

/// Default mesh: log-uniform, `r_min = 1e-6`, `r_max = 60`, 4000 nodes.
pub fn default_grid<T: Real>() -> RadialGrid<T> {
    RadialGrid::new(T::lit(1e-6), T::lit(60.0), 4000, MeshScheme::LogUniform)
        .expect("default mesh parameters are valid")
}

pub fn build_grid<T: Real>(r_min: T, r_max: T, n: usize, scheme: MeshScheme) -> Result<RadialGrid<T>> {
    RadialGrid::new(r_min, r_max, n, scheme)
}

/// Mesh metadata carried by reports so every verdict names the mesh it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshInfo {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub scheme: MeshScheme,
}

impl fmt::Display for MeshInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} N={} [{:e}, {}]", self.scheme, self.n, self.r_min, self.r_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_ranges() {
        assert!(matches!(
            RadialGrid::<f64>::new(0.0, 1.0, 100, MeshScheme::Uniform),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            RadialGrid::<f64>::new(2.0, 1.0, 100, MeshScheme::Uniform),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            RadialGrid::<f64>::new(1.0, 3.0, 3, MeshScheme::Uniform),
            Err(Error::TooFewNodes { n: 3, .. })
        ));
    }

    #[test]
    fn uniform_spacing_is_constant() {
        let g = RadialGrid::<f64>::new(1e-4, 10.0, 1001, MeshScheme::Uniform).unwrap();
        let h = (10.0 - 1e-4) / 1000.0;
        for w in g.cell_widths() {
            assert!((w - h).abs() < 1e-12 * h.max(1.0));
        }
    }

    #[test]
    fn log_step_is_constant_and_weights_sum_to_length() {
        let g = RadialGrid::<f64>::new(1e-6, 60.0, 4000, MeshScheme::LogUniform).unwrap();
        let step = (6e7f64).ln() / 3999.0;
        for w in g.nodes().windows(2) {
            let d = w[1].ln() - w[0].ln();
            assert!(((d - step) / step).abs() < 1e-12, "{d} vs {step}");
        }
        let total: f64 = g.weights().iter().sum();
        assert!(((total - (60.0 - 1e-6)) / 60.0).abs() < 1e-6);
        let cells: f64 = g.cell_widths().iter().sum();
        assert!(((cells - (60.0 - 1e-6)) / 60.0).abs() < 1e-6);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn scheme_parses() {
        assert_eq!("log-uniform".parse::<MeshScheme>().unwrap(), MeshScheme::LogUniform);
        assert_eq!(MeshScheme::Uniform.to_string(), "uniform");
        assert!("chebyshev".parse::<MeshScheme>().is_err());
    }

    #[test]
    fn single_precision_grid_builds() {
        let g = RadialGrid::<f32>::new(1e-3, 10.0, 64, MeshScheme::LogUniform).unwrap();
        assert_eq!(g.len(), 64);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }
}
