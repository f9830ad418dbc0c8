//! Covariates: `σ_n(y)` is the law of `(U + V, V)` with independent
//! `U ~ N(x_n - z_n, b_{n+1} - b_n)` and `V ~ N(0, 1 - b_{n+1})`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::measure::{Density, Measure, Observation, Space};
use crate::strategy::Strategy;

#[derive(Debug, Clone)]
pub struct Covariate {
    /// `b_0 = 0, b_1, .., b_N`.
    b: Vec<f64>,
}

impl Covariate {
    /// `b` lists `b_1 < b_2 < .. < b_N`, all in `(0, 1)`.
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::Param("b sequence must have at least one term".into()));
        }
        let mut full = Vec::with_capacity(b.len() + 1);
        full.push(0.0);
        for v in b {
            let prev = *full.last().unwrap();
            if !(v > prev && v < 1.0) {
                return Err(Error::Param(format!("b must be strictly increasing in (0, 1), got {v} after {prev}")));
            }
            full.push(v);
        }
        Ok(Self { b: full })
    }

    /// `b_j = 1 - 2^{-j}` for `j = 1..=n`.
    pub fn geometric(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect())
    }

    /// `b_j`, `0 <= j <= N`.
    pub fn b(&self, j: usize) -> Result<f64> {
        self.b.get(j).copied().ok_or(Error::Horizon(j))
    }

    /// Largest `n` for which `σ_n` is defined.
    pub fn max_history(&self) -> usize {
        self.b.len() - 2
    }

    fn check_history(&self, history: &[Observation]) -> Result<(f64, f64)> {
        let n = history.len();
        let mean = match history.last() {
            None => 0.0,
            Some(last) => {
                let (x, z) = last
                    .as_pair()
                    .ok_or_else(|| Error::Observation(format!("covariate history needs (x, z) pairs, found {last}")))?;
                x - z
            }
        };
        Ok((mean, self.b(n + 1)? - self.b(n)?))
    }

    /// Draws `X_{n+k}` given the history from the representation
    /// `X_m = Σ_{j<=m} √(b_j - b_{j-1}) T_j + √(1 - b_m) W_m`, `Z_m = √(1 - b_m) W_m`.
    pub fn sample_future_x<R: Rng + ?Sized>(&self, history: &[Observation], k: usize, rng: &mut R) -> Result<f64> {
        if k == 0 {
            return Err(Error::Param("k must be at least 1".into()));
        }
        let (mean, _) = self.check_history(history)?;
        let n = history.len();
        let mut x = mean;
        for j in n + 1..=n + k {
            let t: f64 = StandardNormal.sample(rng);
            x += (self.b(j)? - self.b(j - 1)?).sqrt() * t;
        }
        let w: f64 = StandardNormal.sample(rng);
        Ok(x + (1.0 - self.b(n + k)?).sqrt() * w)
    }

    /// Draws `(X_1, Z_1, .., X_n, Z_n)` from the same representation.
    pub fn sample_representation<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Observation>> {
        let mut sum = 0.0;
        let mut out = Vec::with_capacity(n);
        for j in 1..=n {
            let t: f64 = StandardNormal.sample(rng);
            let w: f64 = StandardNormal.sample(rng);
            sum += (self.b(j)? - self.b(j - 1)?).sqrt() * t;
            let z = (1.0 - self.b(j)?).sqrt() * w;
            out.push(Observation::Pair(sum + z, z));
        }
        Ok(out)
    }
}

impl Strategy for Covariate {
    fn family(&self) -> &str {
        "covariate"
    }

    fn space(&self) -> Space {
        Space::RealPair
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let (mean, delta) = self.check_history(history)?;
        let s = 1.0 - self.b(history.len() + 1)?;
        Measure::from_density(
            Space::RealPair,
            Density::BivariateGaussian {
                mean: [mean, 0.0],
                cov: [[delta + s, s], [s, s]],
            },
        )
    }
}
