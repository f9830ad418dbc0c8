//! Strategies on a finite alphabet with exact arithmetic, and their
//! finite-dimensional laws.
//!
//! Every generic family here runs over `f64` or `BigRational`. A measure-based
//! [`Strategy`] on a categorical space enters through [`Categorical`].

use std::fmt::Debug;
use std::sync::Arc;

use num::{BigRational, FromPrimitive, Num, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{Measure, Observation, Space};
use crate::strategy::Strategy;

/// Default cap on the size of the largest enumerated table.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Field of probabilities: `f64`, or `BigRational` for exact verdicts.
pub trait Scalar: Num + Signed + Clone + PartialOrd + ToPrimitive + FromPrimitive + Debug + Send + Sync + 'static {
    /// Exact conversion; every finite binary64 value is a rational.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits every scalar")
    }

    /// Exact textual form, for fields whose binary64 value would round.
    fn exact_repr(&self) -> Option<String> {
        None
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn exact_repr(&self) -> Option<String> {
        Some(self.to_string())
    }
}

/// Parses `"p/q"`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: num::BigInt = p.trim().parse().map_err(|_| Error::Param(format!("bad rational {s}")))?;
        let q: num::BigInt = q.trim().parse().map_err(|_| Error::Param(format!("bad rational {s}")))?;
        if q == num::BigInt::from(0) {
            return Err(Error::Param(format!("zero denominator in {s}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = format!("{int}{frac}");
    let p: num::BigInt = digits.parse().map_err(|_| Error::Param(format!("bad rational {s}")))?;
    let q = num::BigInt::from(10).pow(frac.len() as u32);
    Ok(BigRational::new(p, q))
}

/// A strategy on `{0, .., k-1}` given by its predictive masses.
pub trait FiniteStrategy<T: Scalar>: Send + Sync {
    fn alphabet_size(&self) -> usize;
    /// Masses of `σ_n(history)` on each symbol.
    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>>;
}

impl<T: Scalar, F: FiniteStrategy<T> + ?Sized> FiniteStrategy<T> for &F {
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }
    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>> {
        (**self).predictive_pmf(history)
    }
}

impl<T: Scalar, F: FiniteStrategy<T> + ?Sized> FiniteStrategy<T> for Arc<F> {
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }
    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>> {
        (**self).predictive_pmf(history)
    }
}

/// View of a categorical [`Strategy`] as a finite `f64` strategy.
pub struct Categorical<S>(pub S);

impl<S: Strategy> FiniteStrategy<f64> for Categorical<S> {
    fn alphabet_size(&self) -> usize {
        match self.0.space() {
            Space::Categorical(k) => k,
            _ => 0,
        }
    }

    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<f64>> {
        let Space::Categorical(_) = self.0.space() else {
            return Err(Error::SpaceMismatch {
                expected: "categorical".into(),
                found: self.0.space().to_string(),
            });
        };
        let h: Vec<Observation> = history.iter().map(|i| Observation::Cat(*i)).collect();
        crate::strategy::predictive(&self.0, &h)?.symbol_masses()
    }
}

/// View of a finite `f64` strategy as a measure-valued [`Strategy`].
pub struct AsStrategy<F> {
    inner: F,
    family: String,
}

impl<F> AsStrategy<F> {
    pub fn new(inner: F, family: impl Into<String>) -> Self {
        Self {
            inner,
            family: family.into(),
        }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: FiniteStrategy<f64>> Strategy for AsStrategy<F> {
    fn family(&self) -> &str {
        &self.family
    }

    fn space(&self) -> Space {
        Space::Categorical(self.inner.alphabet_size())
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let h = cat_indices(history, self.inner.alphabet_size())?;
        Measure::pmf(self.inner.predictive_pmf(&h)?)
    }
}

/// Symbol indices of a categorical history.
pub fn cat_indices(history: &[Observation], k: usize) -> Result<Vec<usize>> {
    history
        .iter()
        .map(|x| {
            x.check(Space::Categorical(k))?;
            Ok(x.as_cat().unwrap())
        })
        .collect()
}

/// Exact table of `g_n` for every `n` up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw<T> {
    alphabet: usize,
    /// `tables[n - 1][index(x)] = g_n(x)`, first coordinate most significant.
    tables: Vec<Vec<T>>,
}

impl<T: Scalar> FiniteLaw<T> {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.tables.len()
    }

    /// Table of `g_n`, `1 <= n <= horizon`.
    pub fn table(&self, n: usize) -> &[T] {
        &self.tables[n - 1]
    }

    pub fn index(&self, path: &[usize]) -> usize {
        path.iter().fold(0, |acc, x| acc * self.alphabet + x)
    }

    pub fn path(&self, n: usize, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for slot in out.iter_mut().rev() {
            *slot = index % self.alphabet;
            index /= self.alphabet;
        }
        out
    }

    pub fn prob(&self, path: &[usize]) -> T {
        if path.is_empty() {
            return T::one();
        }
        self.tables[path.len() - 1][self.index(path)].clone()
    }

    /// `Σ_y g_n(x, y)` for every `x` of length `n - 1`.
    pub fn marginalize_last(&self, n: usize) -> Vec<T> {
        self.table(n)
            .chunks(self.alphabet)
            .map(|c| c.iter().fold(T::zero(), |a, b| a + b.clone()))
            .collect()
    }

    /// `Σ_u g_n(u, x)` for every `x` of length `n - 1`: the law of `(X_2, .., X_n)`.
    pub fn shift_marginal(&self, n: usize) -> Vec<T> {
        let t = self.table(n);
        let block = t.len() / self.alphabet;
        (0..block)
            .map(|i| (0..self.alphabet).fold(T::zero(), |a, u| a + t[u * block + i].clone()))
            .collect()
    }

    /// Law of the single coordinate `X_i` (1-based) under `g_n`.
    pub fn coordinate_marginal(&self, n: usize, i: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.alphabet];
        for (idx, p) in self.table(n).iter().enumerate() {
            let x = self.path(n, idx)[i - 1];
            out[x] = out[x].clone() + p.clone();
        }
        out
    }

    pub fn total(&self, n: usize) -> T {
        self.table(n).iter().fold(T::zero(), |a, b| a + b.clone())
    }
}

/// Enumerates `g_n` for `n = 1..=horizon` by the chain rule. Prefixes of
/// probability zero are not expanded.
pub fn finite_dim_law<T: Scalar, F: FiniteStrategy<T> + ?Sized>(
    s: &F,
    horizon: usize,
    budget: u128,
) -> Result<FiniteLaw<T>> {
    let k = s.alphabet_size();
    if k == 0 {
        return Err(Error::Param("empty alphabet".into()));
    }
    let entries = (k as u128).checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if entries > budget {
        return Err(Error::EnumerationBudget { entries, budget });
    }
    let mut tables: Vec<Vec<T>> = Vec::with_capacity(horizon);
    let mut prev: Vec<T> = vec![T::one()];
    for n in 0..horizon {
        let blocks: Vec<Vec<T>> = prev
            .par_iter()
            .enumerate()
            .map(|(idx, g)| {
                if g.is_zero() {
                    return Ok(vec![T::zero(); k]);
                }
                let mut h = vec![0; n];
                let mut rest = idx;
                for slot in h.iter_mut().rev() {
                    *slot = rest % k;
                    rest /= k;
                }
                let pmf = s.predictive_pmf(&h)?;
                if pmf.len() != k {
                    return Err(Error::SpaceMismatch {
                        expected: format!("{k} symbols"),
                        found: format!("{} masses", pmf.len()),
                    });
                }
                Ok(pmf.into_iter().map(|p| g.clone() * p).collect())
            })
            .collect::<Result<_>>()?;
        let next: Vec<T> = blocks.into_iter().flatten().collect();
        tables.push(next.clone());
        prev = next;
    }
    Ok(FiniteLaw { alphabet: k, tables })
}
