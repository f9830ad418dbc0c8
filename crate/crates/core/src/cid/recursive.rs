//! Recursive update `σ_{n+1}(x, y) = q_n(x) σ_n(x) + (1 - q_n(x)) α_n(· | y)`
//! with a refining sequence of kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Kernel, Measure, Observation, Space};
use crate::strategy::Strategy;

/// The weights `q_n(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum QSchedule {
    Constant { q: f64 },
    /// `q_n = (n + c) / (n + 1 + c)`.
    Dirichlet { c: f64 },
    /// `q_n` by time; the last entry repeats.
    ByTime { q: Vec<f64> },
    /// `q_n(x)` looked up by categorical history, `default` elsewhere.
    ByHistory { table: Vec<(Vec<usize>, f64)>, default: f64 },
}

impl QSchedule {
    pub fn validate(&self) -> Result<()> {
        let check = |q: f64| {
            if (0.0..=1.0).contains(&q) {
                Ok(())
            } else {
                Err(Error::Param(format!("q must lie in [0, 1], got {q}")))
            }
        };
        match self {
            QSchedule::Constant { q } => check(*q),
            QSchedule::Dirichlet { c } => {
                if *c > 0.0 && c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Param(format!("c must be positive, got {c}")))
                }
            }
            QSchedule::ByTime { q } => {
                if q.is_empty() {
                    return Err(Error::Param("empty q schedule".into()));
                }
                q.iter().try_for_each(|v| check(*v))
            }
            QSchedule::ByHistory { table, default } => {
                check(*default)?;
                table.iter().try_for_each(|(_, v)| check(*v))
            }
        }
    }

    /// `q_n(x)` with `n = x.len()`.
    pub fn at(&self, x: &[Observation]) -> f64 {
        let n = x.len();
        match self {
            QSchedule::Constant { q } => *q,
            QSchedule::Dirichlet { c } => (n as f64 + c) / (n as f64 + 1.0 + c),
            QSchedule::ByTime { q } => q[n.min(q.len() - 1)],
            QSchedule::ByHistory { table, default } => table
                .iter()
                .find(|(h, _)| h.len() == n && h.iter().zip(x).all(|(a, b)| b.as_cat() == Some(*a)))
                .map_or(*default, |(_, q)| *q),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecursiveUpdate {
    base: Measure,
    q: QSchedule,
    /// `α_0, α_1, ..`; the last kernel repeats.
    kernels: Vec<Kernel>,
}

impl RecursiveUpdate {
    /// Every kernel must be built on `base`, and each must refine its predecessor.
    pub fn new(base: Measure, q: QSchedule, kernels: Vec<Kernel>) -> Result<Self> {
        q.validate()?;
        if kernels.is_empty() {
            return Err(Error::Param("at least one kernel is required".into()));
        }
        for k in &kernels {
            if !k.base().same_as(&base) {
                return Err(Error::KernelBase);
            }
        }
        for (i, w) in kernels.windows(2).enumerate() {
            if !w[1].refines(&w[0]) {
                return Err(Error::Partition(format!("kernel {} does not refine kernel {i}", i + 1)));
            }
        }
        Ok(Self { base, q, kernels })
    }

    pub fn kernel(&self, n: usize) -> &Kernel {
        &self.kernels[n.min(self.kernels.len() - 1)]
    }

    pub fn schedule(&self) -> &QSchedule {
        &self.q
    }
}

impl Strategy for RecursiveUpdate {
    fn family(&self) -> &str {
        "recursive_update"
    }

    fn space(&self) -> Space {
        self.base.space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let mut sigma = self.base.clone();
        for (n, y) in history.iter().enumerate() {
            let q = self.q.at(&history[..n]);
            let alpha = self.kernel(n).apply(y)?;
            sigma = Measure::mix(&[(q, &sigma), (1.0 - q, &alpha)])?;
        }
        Ok(sigma)
    }
}
