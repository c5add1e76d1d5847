//! Seeded random test functions on a radial mesh.
//!
//! Profiles are sums of smooth compactly supported bumps in `ln r`, each with
//! an oscillating factor, so they vanish identically near both ends of the
//! mesh. The same seed always yields the same vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::RadialGrid;
use crate::scalar::Real;

pub struct ProfileSampler {
    rng: ChaCha8Rng,
    max_bumps: usize,
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    centre: f64,
    half_width: f64,
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

impl Bump {
    fn eval(&self, x: f64) -> f64 {
        let t = (x - self.centre) / self.half_width;
        if t.abs() >= 1.0 {
            return 0.0;
        }
        let envelope = (1.0 - 1.0 / (1.0 - t * t)).exp();
        self.amplitude * envelope * (self.frequency * t + self.phase).cos()
    }
}

impl ProfileSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_bumps: 4,
        }
    }

    fn bumps(&mut self, lo: f64, hi: f64) -> Vec<Bump> {
        let span = hi - lo;
        let count = self.rng.gen_range(1..=self.max_bumps);
        (0..count)
            .map(|_| {
                let half_width = self.rng.gen_range(0.05..0.3) * span;
                let centre = self.rng.gen_range(lo + half_width..hi - half_width);
                Bump {
                    centre,
                    half_width,
                    amplitude: self.rng.gen_range(-1.0..1.0),
                    frequency: self.rng.gen_range(0.0..8.0),
                    phase: self.rng.gen_range(0.0..std::f64::consts::TAU),
                }
            })
            .collect()
    }

    fn sample_at<T: Real>(&mut self, grid: &RadialGrid<T>, points: &[T]) -> Vec<T> {
        // keep a little room at both ends so the profile is zero there
        let lo = grid.r_min().to_f64_lossy().ln();
        let hi = grid.r_max().to_f64_lossy().ln();
        let pad = 0.02 * (hi - lo);
        let bumps = self.bumps(lo + pad, hi - pad);
        points
            .iter()
            .map(|r| {
                let x = r.to_f64_lossy().ln();
                T::lit(bumps.iter().map(|b| b.eval(x)).sum())
            })
            .collect()
    }

    /// Node vector, zero at both ends.
    pub fn node_profile<T: Real>(&mut self, grid: &RadialGrid<T>) -> Vec<T> {
        let mut v = self.sample_at(grid, grid.nodes());
        let n = v.len();
        v[0] = T::zero();
        v[n - 1] = T::zero();
        v
    }

    /// Cell vector sampled at midpoints.
    pub fn cell_profile<T: Real>(&mut self, grid: &RadialGrid<T>) -> Vec<T> {
        self.sample_at(grid, grid.midpoints())
    }

    /// Independent uniform entries in `[-1, 1)` on the nodes, zero at both ends.
    pub fn node_noise<T: Real>(&mut self, grid: &RadialGrid<T>) -> Vec<T> {
        let n = grid.len();
        (0..n)
            .map(|i| {
                let x: f64 = self.rng.gen_range(-1.0..1.0);
                if i == 0 || i + 1 == n {
                    T::zero()
                } else {
                    T::lit(x)
                }
            })
            .collect()
    }

    pub fn cell_noise<T: Real>(&mut self, grid: &RadialGrid<T>) -> Vec<T> {
        (0..grid.cells())
            .map(|_| T::lit(self.rng.gen_range(-1.0..1.0)))
            .collect()
    }
}
