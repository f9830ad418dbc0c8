//! Symmetric stable autoregression: errors `μ = S(a, b)`, `f(x) = -a + c x`,
//! stationary marginal `ν = S(0, b / (1 - |c|^γ))`.

use num::BigRational;
use rand::Rng;

use super::stable::StableLaw;
use crate::error::{Error, Result};
use crate::measure::{Density, Measure, Observation, Space};
use crate::strategy::Strategy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableAr {
    errors: StableLaw,
    c: f64,
}

impl StableAr {
    pub fn new(gamma: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        let errors = StableLaw::new(gamma, a, b)?;
        if !(c.abs() < 1.0) {
            return Err(Error::Param(format!("autoregression coefficient must satisfy |c| < 1, got {c}")));
        }
        Ok(Self { errors, c })
    }

    pub fn errors(&self) -> StableLaw {
        self.errors
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `ν = S(0, b / (1 - |c|^γ))`.
    pub fn stationary(&self) -> StableLaw {
        let e = self.errors;
        StableLaw {
            gamma: e.gamma,
            a: 0.0,
            b: e.b / (1.0 - self.c.abs().powf(e.gamma)),
        }
    }

    /// `σ_1(x) = S(c x, b)`, the law of `f(x) + U`.
    pub fn transition(&self, x: f64) -> StableLaw {
        StableLaw {
            gamma: self.errors.gamma,
            a: self.c * x,
            b: self.errors.b,
        }
    }

    /// One step `f(x) + U` with `U ~ μ`.
    pub fn step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        -self.errors.a + self.c * x + self.errors.sample(rng)
    }

    /// `|c|^γ s + b - s` with `s = b / (1 - |c|^γ)`, evaluated exactly in
    /// rationals at the binary64 values of `|c|^γ` and `b`.
    pub fn cf_identity_deviation(&self) -> BigRational {
        let r = BigRational::from_float(self.c.abs().powf(self.errors.gamma)).expect("finite");
        let b = BigRational::from_float(self.errors.b).expect("finite");
        let one = BigRational::from_integer(1.into());
        let s = b.clone() / (one - r.clone());
        r * s.clone() + b - s
    }
}

impl Strategy for StableAr {
    fn family(&self) -> &str {
        "stable_ar"
    }

    fn space(&self) -> Space {
        Space::Real
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let law = match history.last() {
            None => self.stationary(),
            Some(x) => {
                let x = x
                    .as_real()
                    .ok_or_else(|| Error::Observation(format!("stable AR needs real observations, found {x}")))?;
                self.transition(x)
            }
        };
        Measure::from_density(Space::Real, Density::Stable(law))
    }
}
