//! Exponential smoothing: `σ_n(x) = q^n ν + (1 - q) Σ_i q^{n-i} δ_{x_i}`.

use crate::error::{Error, Result};
use crate::measure::{Measure, Observation, Space};
use crate::strategy::Strategy;

#[derive(Debug, Clone)]
pub struct ExpSmoothing {
    q: f64,
    base: Measure,
}

impl ExpSmoothing {
    pub fn new(q: f64, base: Measure) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Param(format!("smoothing weight must lie in (0, 1), got {q}")));
        }
        Ok(Self { q, base })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }
}

impl Strategy for ExpSmoothing {
    fn family(&self) -> &str {
        "exp_smoothing"
    }

    fn space(&self) -> Space {
        self.base.space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let n = history.len();
        let diracs: Vec<Measure> = history
            .iter()
            .map(|x| Measure::dirac(*x, self.base.space()))
            .collect::<Result<_>>()?;
        let mut comps: Vec<(f64, &Measure)> = Vec::with_capacity(n + 1);
        comps.push((self.q.powi(n as i32), &self.base));
        for (i, d) in diracs.iter().enumerate() {
            comps.push(((1.0 - self.q) * self.q.powi((n - 1 - i) as i32), d));
        }
        Measure::mix(&comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{finite_dim_law, Categorical, DEFAULT_BUDGET};

    fn cats(xs: &[usize]) -> Vec<Observation> {
        xs.iter().map(|i| Observation::Cat(*i)).collect()
    }

    #[test]
    fn predictive_fixtures() {
        let s = ExpSmoothing::new(0.5, Measure::uniform(2).unwrap()).unwrap();
        assert!(s.predictive(&[]).unwrap().same_as(&Measure::uniform(2).unwrap()));
        assert_eq!(s.predictive(&cats(&[0, 1])).unwrap().mass_at(&Observation::Cat(0)).unwrap(), 0.375);
        assert!(ExpSmoothing::new(1.0, Measure::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn one_step_recursion() {
        let s = ExpSmoothing::new(0.5, Measure::pmf(vec![0.25, 0.25, 0.5]).unwrap()).unwrap();
        let h = cats(&[2, 0, 0, 1, 2, 1]);
        for n in 0..h.len() {
            let prev = s.predictive(&h[..n]).unwrap().symbol_masses().unwrap();
            let next = s.predictive(&h[..=n]).unwrap().symbol_masses().unwrap();
            for j in 0..3 {
                let y = if h[n] == Observation::Cat(j) { 1.0 } else { 0.0 };
                assert_eq!(next[j], 0.5 * prev[j] + 0.5 * y);
            }
        }
    }

    #[test]
    fn enumerated_witness_paths() {
        let s = ExpSmoothing::new(0.5, Measure::uniform(2).unwrap()).unwrap();
        let law = finite_dim_law(&Categorical(&s), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(law.prob(&[0, 0, 1]), 0.046875);
        assert_eq!(law.prob(&[1, 0, 0]), 0.078125);
        for n in 1..=3 {
            assert_eq!(law.coordinate_marginal(3, n), vec![0.5, 0.5]);
        }
    }
}
