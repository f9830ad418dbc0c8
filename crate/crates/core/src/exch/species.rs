//! Species sampling sequences:
//! `σ_n(x) = Σ_j p_{j,n}(x) δ_{x_j*} + q_n(x) ν` with a non-atomic base `ν`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::Scalar;
use crate::measure::{Measure, Observation, Space};
use crate::strategy::Strategy;

/// Weight rule `(p_{j,n}, q_n)` as a function of the species counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SpeciesRule<T> {
    /// Two-parameter Poisson-Dirichlet: `p_j = (N_j - b)/(n + c)`, `q = (b k + c)/(n + c)`.
    PoissonDirichlet { b: T, c: T },
    /// Gnedin: `p_j = (N_j + 1)(n - k + b)/(n² + b n + c)`, `q = (k² - b k + c)/(n² + b n + c)`.
    Gnedin { b: T, c: T },
}

impl<T: Scalar> SpeciesRule<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpeciesRule::PoissonDirichlet { b, c } => {
                let ok = if *b >= T::zero() {
                    *b < T::one() && *c > -b.clone()
                } else {
                    self.pd_cap().is_some()
                };
                if !ok {
                    return Err(Error::Param(format!(
                        "Poisson-Dirichlet needs 0 <= b < 1 and c > -b, or b < 0 and c = -m b with integer m >= 2; got b={b:?}, c={c:?}"
                    )));
                }
            }
            SpeciesRule::Gnedin { b, c } => {
                // k² + b k + c is increasing in k once b > 0, so k = 1 is the binding case.
                if !(*b > T::zero()) || !(T::one() + b.clone() + c.clone() > T::zero()) {
                    return Err(Error::Param(format!("Gnedin needs b > 0 and k² + b k + c > 0 for k >= 1; got b={b:?}, c={c:?}")));
                }
            }
        }
        Ok(())
    }

    /// Number of species `m` under Poisson-Dirichlet case (ii).
    fn pd_cap(&self) -> Option<usize> {
        let SpeciesRule::PoissonDirichlet { b, c } = self else {
            return None;
        };
        if *b >= T::zero() {
            return None;
        }
        let ratio = (c.clone() / -b.clone()).to_f64_lossy();
        let m = ratio.round();
        let exact = c.clone() - <T as Scalar>::from_usize(m.max(0.0) as usize) * -b.clone();
        let tol = 1e-12 * c.to_f64_lossy().abs().max(1.0);
        (m >= 2.0 && exact.to_f64_lossy().abs() <= tol).then_some(m as usize)
    }
}

/// `(p_1..p_k, q)` for species counts `counts` (in order of appearance).
pub fn species_weights<T: Scalar>(rule: &SpeciesRule<T>, counts: &[usize]) -> Result<(Vec<T>, T)> {
    rule.validate()?;
    if counts.contains(&0) {
        return Err(Error::Param("species counts must be positive".into()));
    }
    let n = <T as Scalar>::from_usize(counts.iter().sum());
    let k = <T as Scalar>::from_usize(counts.len());
    let (p, q) = match rule {
        SpeciesRule::PoissonDirichlet { b, c } => {
            let denom = n + c.clone();
            let p: Vec<T> = counts
                .iter()
                .map(|nj| (<T as Scalar>::from_usize(*nj) - b.clone()) / denom.clone())
                .collect();
            let q = match rule.pd_cap() {
                Some(m) if counts.len() >= m => T::zero(),
                _ => (b.clone() * k + c.clone()) / denom,
            };
            (p, q)
        }
        SpeciesRule::Gnedin { b, c } => {
            let denom = n.clone() * n.clone() + b.clone() * n.clone() + c.clone();
            let spread = n - k.clone() + b.clone();
            let p: Vec<T> = counts
                .iter()
                .map(|nj| (<T as Scalar>::from_usize(*nj) + T::one()) * spread.clone() / denom.clone())
                .collect();
            let q = (k.clone() * k.clone() - b.clone() * k + c.clone()) / denom;
            (p, q)
        }
    };
    if q < T::zero() || p.iter().any(|x| *x < T::zero()) {
        return Err(Error::Param(format!("negative species weight at counts {counts:?}")));
    }
    Ok((p, q))
}

/// Law of the random partition of `{1..n}`, keyed by restricted-growth label
/// strings (label `j` is the `j`-th species to appear).
pub fn partition_law<T: Scalar>(rule: &SpeciesRule<T>, n: usize) -> Result<BTreeMap<Vec<usize>, T>> {
    let mut level: BTreeMap<Vec<usize>, T> = BTreeMap::new();
    level.insert(vec![], T::one());
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (labels, g) in level {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let mut counts = vec![0; k];
            for l in &labels {
                counts[*l] += 1;
            }
            let (p, q) = if k == 0 { (vec![], T::one()) } else { species_weights(rule, &counts)? };
            for (j, pj) in p.into_iter().enumerate() {
                let mut l = labels.clone();
                l.push(j);
                next.insert(l, g.clone() * pj);
            }
            if q > T::zero() {
                let mut l = labels.clone();
                l.push(k);
                next.insert(l, g.clone() * q);
            }
        }
        level = next;
    }
    Ok(level)
}

/// Species sampling strategy on the real line.
#[derive(Debug, Clone)]
pub struct Species {
    rule: SpeciesRule<f64>,
    base: Measure,
}

impl Species {
    pub fn new(rule: SpeciesRule<f64>, base: Measure) -> Result<Self> {
        rule.validate()?;
        if !base.is_atomless() {
            return Err(Error::NonAtomicity);
        }
        Ok(Self { rule, base })
    }

    pub fn rule(&self) -> &SpeciesRule<f64> {
        &self.rule
    }
}

/// Distinct values in order of appearance with their multiplicities.
pub fn distinct_values(history: &[Observation]) -> (Vec<Observation>, Vec<usize>) {
    let mut values: Vec<Observation> = Vec::new();
    let mut counts = Vec::new();
    for x in history {
        match values.iter().position(|v| v.same_point(x)) {
            Some(j) => counts[j] += 1,
            None => {
                values.push(*x);
                counts.push(1);
            }
        }
    }
    (values, counts)
}

impl Strategy for Species {
    fn family(&self) -> &str {
        match self.rule {
            SpeciesRule::PoissonDirichlet { .. } => "species_pd",
            SpeciesRule::Gnedin { .. } => "species_gnedin",
        }
    }

    fn space(&self) -> Space {
        self.base.space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        if history.is_empty() {
            return Ok(self.base.clone());
        }
        let (values, counts) = distinct_values(history);
        let (p, q) = species_weights(&self.rule, &counts)?;
        let atoms: Vec<(Observation, f64)> = values.into_iter().zip(p).collect();
        let densities = self.base.densities().iter().map(|(w, d)| (w * q, d.clone())).collect();
        Measure::new(self.base.space(), atoms, densities)
    }
}
