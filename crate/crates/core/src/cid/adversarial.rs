//! A strategy that is not c.i.d.: `σ_0 = ν`, `σ_1(x) = δ_x`, `σ_n = ν` for `n >= 2`.

use crate::error::Result;
use crate::measure::{Measure, Observation, Space};
use crate::strategy::Strategy;

#[derive(Debug, Clone)]
pub struct Adversarial {
    base: Measure,
}

impl Adversarial {
    pub fn new(base: Measure) -> Self {
        Self { base }
    }
}

impl Strategy for Adversarial {
    fn family(&self) -> &str {
        "adversarial"
    }

    fn space(&self) -> Space {
        self.base.space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        match history {
            [x] => Measure::dirac(*x, self.base.space()),
            _ => Ok(self.base.clone()),
        }
    }
}
