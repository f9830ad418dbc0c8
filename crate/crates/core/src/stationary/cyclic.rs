//! Stationary Markov sequences of order `n - 1` from the cyclic
//! symmetrisation `g` of a positive density `h` on `S^n`.
//!
//! Conditionals are ratios of the marginals
//! `G_j(x_1..x_j) = ∫ g(x, v) λ^{n-j}(dv)` with `G_0 = 1`.

use crate::error::{Error, Result};
use crate::finite::{FiniteStrategy, Scalar};
use crate::measure::{Density, Measure, Observation, Space, Tabulated};
use crate::strategy::Strategy;
use std::sync::Arc;

/// `g(x) = (1/n) Σ_r h(rot^r x)` on a table indexed with the first coordinate most significant.
pub fn cyclic_symmetrize<T: Scalar>(h: &[T], k: usize, n: usize) -> Vec<T> {
    let nn = <T as Scalar>::from_usize(n);
    let index = |x: &[usize]| x.iter().fold(0, |acc, v| acc * k + v);
    (0..h.len())
        .map(|idx| {
            let x = digits(idx, k, n);
            let mut acc = T::zero();
            for r in 0..n {
                let rot: Vec<usize> = (0..n).map(|i| x[(i + r) % n]).collect();
                acc = acc + h[index(&rot)].clone();
            }
            acc / nn.clone()
        })
        .collect()
}

fn digits(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    out
}

/// `G_0..G_n` from `g` with reference weights `w` on each coordinate.
fn marginals<T: Scalar>(g: &[T], w: &[T], n: usize) -> Vec<Vec<T>> {
    let k = w.len();
    let mut out = vec![g.to_vec()];
    for _ in 0..n {
        let last = out.last().unwrap();
        let next: Vec<T> = last
            .chunks(k)
            .map(|c| c.iter().zip(w).fold(T::zero(), |a, (v, wi)| a + v.clone() * wi.clone()))
            .collect();
        out.push(next);
    }
    out.reverse();
    out
}

/// Cyclic Markov sequence on `{0, .., k-1}`.
#[derive(Debug, Clone)]
pub struct CyclicMarkov<T> {
    k: usize,
    n: usize,
    g: Vec<T>,
    /// `marg[j]` is `G_j` on `k^j` entries.
    marg: Vec<Vec<T>>,
}

impl<T: Scalar> CyclicMarkov<T> {
    /// `h` has `k^n` positive entries summing to one.
    pub fn new(h: Vec<T>, k: usize, n: usize) -> Result<Self> {
        if n < 2 || k == 0 {
            return Err(Error::Param("cyclic Markov needs n >= 2 and a non-empty alphabet".into()));
        }
        if h.len() != k.pow(n as u32) {
            return Err(Error::Param(format!("h must have {} entries, found {}", k.pow(n as u32), h.len())));
        }
        if h.iter().any(|v| !(*v > T::zero())) {
            return Err(Error::Support("h must be strictly positive".into()));
        }
        let total = h.iter().fold(T::zero(), |a, b| a + b.clone());
        if (total.to_f64_lossy() - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization {
                total: total.to_f64_lossy(),
            });
        }
        let g = cyclic_symmetrize(&h, k, n);
        let marg = marginals(&g, &vec![T::one(); k], n);
        Ok(Self { k, n, g, marg })
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    /// `G_j`, `0 <= j <= n`.
    pub fn marginal(&self, j: usize) -> &[T] {
        &self.marg[j]
    }

    pub fn order(&self) -> usize {
        self.n - 1
    }
}

impl<T: Scalar> FiniteStrategy<T> for CyclicMarkov<T> {
    fn alphabet_size(&self) -> usize {
        self.k
    }

    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>> {
        let x = &history[history.len().saturating_sub(self.n - 1)..];
        if let Some(bad) = x.iter().find(|v| **v >= self.k) {
            return Err(Error::Observation(format!("symbol {bad} outside alphabet of size {}", self.k)));
        }
        let j = x.len();
        let base = x.iter().fold(0, |acc, v| acc * self.k + v);
        let denom = self.marg[j][base].clone();
        if !(denom > T::zero()) {
            return Err(Error::Support(format!("zero marginal at {x:?}")));
        }
        Ok((0..self.k)
            .map(|y| self.marg[j + 1][base * self.k + y].clone() / denom.clone())
            .collect())
    }
}

/// Cyclic Markov sequence on the real line from `h` tabulated on `grid^n`.
/// Marginals use trapezoid weights and are interpolated multilinearly off the grid.
#[derive(Debug, Clone)]
pub struct CyclicMarkovGrid {
    grid: Vec<f64>,
    n: usize,
    marg: Vec<Vec<f64>>,
}

impl CyclicMarkovGrid {
    pub fn new(grid: Vec<f64>, h: Vec<f64>, n: usize) -> Result<Self> {
        let k = grid.len();
        if n < 2 || k < 2 {
            return Err(Error::Param("cyclic Markov grid needs n >= 2 and at least two grid points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Param("grid must be strictly increasing".into()));
        }
        if h.len() != k.pow(n as u32) {
            return Err(Error::Param(format!("h must have {} entries, found {}", k.pow(n as u32), h.len())));
        }
        if h.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Support("h must be strictly positive".into()));
        }
        let w = trapezoid_weights(&grid);
        let g = cyclic_symmetrize(&h, k, n);
        let marg = marginals(&g, &w, n);
        if (marg[0][0] - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization { total: marg[0][0] });
        }
        Ok(Self { grid, n, marg })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `G_j` at an arbitrary point of the grid box by multilinear interpolation.
    fn marginal_at(&self, x: &[f64]) -> Result<f64> {
        let k = self.grid.len();
        let mut corners: Vec<(usize, f64)> = vec![(0, 1.0)];
        for v in x {
            if !(*v >= self.grid[0] && *v <= self.grid[k - 1]) {
                return Err(Error::Support(format!("{v} lies outside the tabulated grid")));
            }
            let i = self.grid.partition_point(|g| g <= v).clamp(1, k - 1) - 1;
            let t = (v - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
            corners = corners
                .into_iter()
                .flat_map(|(idx, w)| [(idx * k + i, w * (1.0 - t)), (idx * k + i + 1, w * t)])
                .filter(|(_, w)| *w != 0.0)
                .collect();
        }
        let table = &self.marg[x.len()];
        Ok(corners.iter().map(|(idx, w)| w * table[*idx]).sum())
    }
}

/// Trapezoid quadrature weights on a strictly increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let k = grid.len();
    (0..k)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < k { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

impl Strategy for CyclicMarkovGrid {
    fn family(&self) -> &str {
        "cyclic_markov"
    }

    fn space(&self) -> Space {
        Space::Real
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let tail = &history[history.len().saturating_sub(self.n - 1)..];
        let mut x: Vec<f64> = tail
            .iter()
            .map(|o| o.as_real().ok_or_else(|| Error::Observation(format!("expected a real observation, found {o}"))))
            .collect::<Result<_>>()?;
        let denom = self.marginal_at(&x)?;
        if !(denom > 0.0) {
            return Err(Error::Support(format!("zero marginal at {x:?}")));
        }
        let mut ys = Vec::with_capacity(self.grid.len());
        for z in &self.grid {
            x.push(*z);
            ys.push(self.marginal_at(&x)? / denom);
            x.pop();
        }
        Measure::from_density(Space::Real, Density::Tabulated(Arc::new(Tabulated::new(self.grid.clone(), ys)?)))
    }
}
