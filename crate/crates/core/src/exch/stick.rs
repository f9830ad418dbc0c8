//! Truncated stick-breaking draw `μ = Σ_{j<=J} V_j α(· | Z_j)` from the prior of a
//! kernel-based Dirichlet sequence.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::measure::{Kernel, Measure};

#[derive(Debug, Clone)]
pub struct StickBreaking {
    c: f64,
    kernel: Kernel,
    truncation: usize,
}

/// A sampled measure with its stick weights and raw truncation deficit `1 - Σ V_j`.
#[derive(Debug, Clone)]
pub struct StickDraw {
    pub measure: Measure,
    pub weights: Vec<f64>,
    pub deficit: f64,
}

impl StickBreaking {
    pub fn new(c: f64, kernel: Kernel, truncation: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Param(format!("concentration must be positive, got {c}")));
        }
        if truncation == 0 {
            return Err(Error::Param("truncation must be at least 1".into()));
        }
        Ok(Self { c, kernel, truncation })
    }

    /// `E[1 - Σ V_j] = (c / (1 + c))^J`.
    pub fn expected_deficit(&self) -> f64 {
        (self.c / (1.0 + self.c)).powi(self.truncation as i32)
    }

    /// Renormalised draw; the deficit is reported, not reassigned.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StickDraw> {
        let beta = Beta::new(1.0, self.c).map_err(|e| Error::Param(e.to_string()))?;
        let mut weights = Vec::with_capacity(self.truncation);
        let mut atoms = Vec::with_capacity(self.truncation);
        let mut remaining = 1.0;
        for _ in 0..self.truncation {
            let z = self.kernel.base().sample(rng)?;
            let u: f64 = beta.sample(rng);
            weights.push(u * remaining);
            remaining *= 1.0 - u;
            atoms.push(self.kernel.apply(&z)?);
        }
        let kept: f64 = weights.iter().sum();
        let comps: Vec<(f64, &Measure)> = if kept > 0.0 {
            weights.iter().zip(&atoms).map(|(v, m)| (v / kept, m)).collect()
        } else {
            // Every U_j underflowed to 0; fall back to equal weights.
            atoms.iter().map(|m| (1.0 / atoms.len() as f64, m)).collect()
        };
        let measure = Measure::mix(&renormalised(comps))?;
        Ok(StickDraw {
            measure,
            weights,
            deficit: remaining,
        })
    }
}

/// Absorbs rounding so the weights sum to one within the measure tolerance.
fn renormalised(mut comps: Vec<(f64, &Measure)>) -> Vec<(f64, &Measure)> {
    let total: f64 = comps.iter().map(|(w, _)| w).sum();
    for (w, _) in comps.iter_mut() {
        *w /= total;
    }
    comps
}
