//! Exact checkers on finite alphabets, by enumeration of `g_n`.
//!
//! Every checker runs over any [`Scalar`]: with `BigRational` inputs the
//! residual is exact and recorded as a fraction.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::report::{CheckKind, Method, VerificationReport, Witness};
use crate::error::{Error, Result};
use crate::finite::{finite_dim_law, FiniteLaw, FiniteStrategy, Scalar, DEFAULT_BUDGET};
use crate::measure::Observation;

/// Events tested by the c.i.d. checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventScope {
    /// `A = {y}`; enough by additivity.
    #[default]
    Singletons,
    /// Every `A ⊆ S`.
    Powerset,
}

fn cats(path: &[usize]) -> Vec<Observation> {
    path.iter().map(|x| Observation::Cat(*x)).collect()
}

fn sorted(path: &[usize]) -> Vec<usize> {
    let mut s = path.to_vec();
    s.sort_unstable();
    s
}

/// Running maximum that keeps the first strict improvement.
struct Best<T> {
    value: T,
    witness: Option<Witness>,
}

impl<T: Scalar> Best<T> {
    fn new() -> Self {
        Self {
            value: T::zero(),
            witness: None,
        }
    }

    fn offer(&mut self, value: T, witness: impl FnOnce() -> Witness) {
        if value > self.value {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn report(self, kind: CheckKind, family: &str, horizon: usize, tol: f64) -> VerificationReport {
        VerificationReport::new(kind, family, horizon, self.value.to_f64_lossy(), tol, Method::Exact)
            .with_exact(self.value.exact_repr())
            .with_witness(self.witness)
    }
}

/// Largest gap between two rearrangements of one path, among weights `w(n, x)`
/// over `n = 2..=horizon`. Within a class the first maximiser and first
/// minimiser in lexicographic order are reported.
fn permutation_residual<T: Scalar>(
    law: &FiniteLaw<T>,
    ns: impl Iterator<Item = usize>,
    mut weight: impl FnMut(usize, usize) -> Option<T>,
) -> Best<T> {
    let mut best = Best::new();
    for n in ns {
        let len = law.table(n).len();
        let mut classes: BTreeMap<Vec<usize>, (usize, T, usize, T)> = BTreeMap::new();
        for idx in 0..len {
            let Some(w) = weight(n, idx) else { continue };
            let key = sorted(&law.path(n, idx));
            match classes.get_mut(&key) {
                None => {
                    classes.insert(key, (idx, w.clone(), idx, w));
                }
                Some((imax, max, imin, min)) => {
                    if w > *max {
                        *imax = idx;
                        *max = w.clone();
                    }
                    if w < *min {
                        *imin = idx;
                        *min = w;
                    }
                }
            }
        }
        for (imax, max, imin, min) in classes.into_values() {
            let gap = max.clone() - min.clone();
            best.offer(gap, || Witness {
                n,
                paths: vec![cats(&law.path(n, imax)), cats(&law.path(n, imin))],
                values: vec![max.to_f64_lossy(), min.to_f64_lossy()],
                ..Witness::default()
            });
        }
    }
    best
}

/// `max |g_n(x) - g_n(φ(x))|` over `n <= horizon` of the law.
pub fn exchangeability_report<T: Scalar>(law: &FiniteLaw<T>, family: &str, tol: f64) -> VerificationReport {
    let h = law.horizon();
    permutation_residual(law, 2..=h, |n, idx| Some(law.table(n)[idx].clone())).report(
        CheckKind::Exchangeability,
        family,
        h,
        tol,
    )
}

pub fn check_exchangeability<T: Scalar, F: FiniteStrategy<T> + ?Sized>(
    s: &F,
    family: &str,
    horizon: usize,
    tol: f64,
) -> Result<VerificationReport> {
    Ok(exchangeability_report(&finite_dim_law(s, horizon, DEFAULT_BUDGET)?, family, tol))
}

/// `max |g_n(x) - Σ_u g_{n+1}(u, x)|` over `1 <= n < horizon`.
pub fn stationarity_report<T: Scalar>(law: &FiniteLaw<T>, family: &str, tol: f64) -> VerificationReport {
    let h = law.horizon();
    let mut best = Best::new();
    for n in 1..h {
        let shifted = law.shift_marginal(n + 1);
        for (idx, (g, s)) in law.table(n).iter().zip(&shifted).enumerate() {
            best.offer((g.clone() - s.clone()).abs(), || Witness {
                n,
                paths: vec![cats(&law.path(n, idx))],
                values: vec![g.to_f64_lossy(), s.to_f64_lossy()],
                ..Witness::default()
            });
        }
    }
    best.report(CheckKind::Stationarity, family, h, tol)
}

pub fn check_stationarity<T: Scalar, F: FiniteStrategy<T> + ?Sized>(
    s: &F,
    family: &str,
    horizon: usize,
    tol: f64,
) -> Result<VerificationReport> {
    Ok(stationarity_report(&finite_dim_law(s, horizon, DEFAULT_BUDGET)?, family, tol))
}

/// `max |σ_n(x, A) - Σ_y σ_{n+1}(x, y, A) σ_n(x, {y})|` over `n < horizon`
/// and histories with `g_n(x) > 0`.
pub fn check_cid<T: Scalar, F: FiniteStrategy<T> + ?Sized>(
    s: &F,
    family: &str,
    horizon: usize,
    scope: EventScope,
    tol: f64,
) -> Result<VerificationReport> {
    let k = s.alphabet_size();
    let entries = (k as u128).checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if entries > DEFAULT_BUDGET {
        return Err(Error::EnumerationBudget {
            entries,
            budget: DEFAULT_BUDGET,
        });
    }
    let law = finite_dim_law(s, horizon.saturating_sub(1), DEFAULT_BUDGET)?;
    let events: Vec<Vec<usize>> = match scope {
        EventScope::Singletons => (0..k).map(|y| vec![y]).collect(),
        EventScope::Powerset => (1..1usize << k)
            .map(|mask| (0..k).filter(|y| mask >> y & 1 == 1).collect())
            .collect(),
    };
    let mut best = Best::new();
    for n in 0..horizon {
        let count = if n == 0 { 1 } else { law.table(n).len() };
        let rows: Vec<Option<(T, Witness)>> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let x = if n == 0 { vec![] } else { law.path(n, idx) };
                if law.prob(&x).is_zero() {
                    return Ok(None);
                }
                let now = s.predictive_pmf(&x)?;
                let mut mix = vec![T::zero(); k];
                let mut ext = x.clone();
                ext.push(0);
                for (y, p) in now.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    ext[n] = y;
                    for (m, q) in mix.iter_mut().zip(s.predictive_pmf(&ext)?) {
                        *m = m.clone() + p.clone() * q;
                    }
                }
                let mut local: Option<(T, Witness)> = None;
                for a in &events {
                    let lhs = a.iter().fold(T::zero(), |acc, y| acc + now[*y].clone());
                    let rhs = a.iter().fold(T::zero(), |acc, y| acc + mix[*y].clone());
                    let gap = (lhs.clone() - rhs.clone()).abs();
                    if local.as_ref().map_or(gap > T::zero(), |(v, _)| gap > *v) {
                        local = Some((
                            gap,
                            Witness {
                                n,
                                paths: vec![cats(&x)],
                                event: Some(a.clone()),
                                z: None,
                                values: vec![lhs.to_f64_lossy(), rhs.to_f64_lossy()],
                            },
                        ));
                    }
                }
                Ok(local)
            })
            .collect::<Result<_>>()?;
        for (gap, w) in rows.into_iter().flatten() {
            best.offer(gap, || w);
        }
    }
    Ok(best.report(CheckKind::Cid, family, horizon, tol))
}

/// Permutation residual of the law of `(X_1..X_n)` given `T > n`, for
/// `n <= horizon` with `P(T > n) > 0`. `stop_index(x)` is `T - 1` when it is
/// at most `x.len()`.
pub fn conditional_exchangeability_report<T: Scalar>(
    law: &FiniteLaw<T>,
    stop_index: impl Fn(&[usize]) -> Option<usize>,
    family: &str,
    tol: f64,
) -> VerificationReport {
    let h = law.horizon();
    let survives = |n: usize, idx: usize| stop_index(&law.path(n, idx)[..n - 1]).is_none();
    let mass: Vec<T> = (1..=h)
        .map(|n| {
            (0..law.table(n).len())
                .filter(|idx| survives(n, *idx))
                .fold(T::zero(), |acc, idx| acc + law.table(n)[idx].clone())
        })
        .collect();
    permutation_residual(law, 2..=h, |n, idx| {
        let m = &mass[n - 1];
        if m.is_zero() {
            return None;
        }
        Some(if survives(n, idx) {
            law.table(n)[idx].clone() / m.clone()
        } else {
            T::zero()
        })
    })
    .report(CheckKind::ConditionalExchangeability, family, h, tol)
}

/// Permutation residual of `x ↦ P(T = j + 1, (X_1..X_n) = x)` over
/// `2 <= n <= j < horizon`: the events that make up `{T > n}` inside the horizon.
pub fn stop_block_report<T: Scalar>(
    law: &FiniteLaw<T>,
    stop_index: impl Fn(&[usize]) -> Option<usize>,
    family: &str,
    tol: f64,
) -> VerificationReport {
    let h = law.horizon();
    let k = law.alphabet();
    let mut best = Best::new();
    for j in 2..h {
        // Law of X_{1:j} on {T = j + 1}, then its marginals on shorter prefixes.
        let on_block: Vec<T> = law
            .table(j)
            .iter()
            .enumerate()
            .map(|(idx, g)| {
                if stop_index(&law.path(j, idx)) == Some(j) {
                    g.clone()
                } else {
                    T::zero()
                }
            })
            .collect();
        let mut marg = on_block;
        for n in (2..=j).rev() {
            if n < j {
                marg = marg
                    .chunks(k)
                    .map(|c| c.iter().fold(T::zero(), |a, b| a + b.clone()))
                    .collect();
            }
            let sub = permutation_residual(law, std::iter::once(n), |_, idx| Some(marg[idx].clone()));
            if let Some(mut w) = sub.witness {
                w.event = Some(vec![j + 1]);
                best.offer(sub.value, || w);
            }
        }
    }
    best.report(CheckKind::ConditionalExchangeability, family, h, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cid::{Adversarial, ExpSmoothing};
    use crate::exch::FiniteDirichlet;
    use crate::finite::Categorical;
    use crate::measure::{KernelRule, Measure};
    use num::BigRational;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn smoothing() -> ExpSmoothing {
        ExpSmoothing::new(0.5, Measure::uniform(2).unwrap()).unwrap()
    }

    #[test]
    fn dirichlet_passes_everything_exactly() {
        let d = FiniteDirichlet::new(r(1, 1), vec![r(1, 3), r(1, 3), r(1, 3)], KernelRule::Identity).unwrap();
        let law = finite_dim_law(&d, 4, DEFAULT_BUDGET).unwrap();
        let ex = exchangeability_report(&law, "dirichlet", 0.0);
        assert!(ex.passed());
        assert_eq!(ex.exact_residual.as_deref(), Some("0"));
        assert!(ex.witness.is_none());
        assert!(stationarity_report(&law, "dirichlet", 0.0).passed());
        assert!(check_cid(&d, "dirichlet", 4, EventScope::Singletons, 0.0).unwrap().passed());
    }

    #[test]
    fn smoothing_witnesses() {
        let s = Categorical(smoothing());
        let ex = check_exchangeability(&s, "exp_smoothing", 3, 1e-12).unwrap();
        assert_eq!(ex.residual, 0.03125);
        let w = ex.witness.unwrap();
        assert_eq!(w.paths, vec![cats(&[1, 0, 0]), cats(&[0, 0, 1])]);
        assert_eq!(w.values, vec![0.078125, 0.046875]);
        let st = check_stationarity(&s, "exp_smoothing", 3, 1e-12).unwrap();
        assert_eq!(st.residual, 0.03125);
        assert!(!st.passed());
        assert!(check_cid(&s, "exp_smoothing", 4, EventScope::Singletons, 1e-12).unwrap().passed());
    }

    #[test]
    fn adversarial_fails_cid_by_one_half() {
        let s = Categorical(Adversarial::new(Measure::uniform(2).unwrap()));
        let rep = check_cid(&s, "adversarial", 3, EventScope::Singletons, 1e-12).unwrap();
        assert_eq!(rep.residual, 0.5);
        let w = rep.witness.unwrap();
        assert_eq!(w.n, 1);
        assert_eq!(w.paths, vec![cats(&[0])]);
        assert_eq!(w.values, vec![1.0, 0.5]);
    }

    #[test]
    fn horizon_one_is_trivial() {
        let s = Categorical(smoothing());
        assert_eq!(check_exchangeability(&s, "exp_smoothing", 1, 0.0).unwrap().residual, 0.0);
        assert_eq!(check_stationarity(&s, "exp_smoothing", 1, 0.0).unwrap().residual, 0.0);
        assert_eq!(check_cid(&s, "exp_smoothing", 0, EventScope::Singletons, 0.0).unwrap().residual, 0.0);
    }

    #[test]
    fn budget_is_reported() {
        let s = Categorical(smoothing());
        assert!(matches!(
            check_cid(&s, "exp_smoothing", 21, EventScope::Singletons, 0.0),
            Err(Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn conditional_check_on_always_surviving_paths_is_plain_exchangeability() {
        let d = FiniteDirichlet::new(r(2, 1), vec![r(1, 2), r(1, 2)], KernelRule::Identity).unwrap();
        let law = finite_dim_law(&d, 4, DEFAULT_BUDGET).unwrap();
        assert!(conditional_exchangeability_report(&law, |_| None, "d", 0.0).passed());
        assert!(stop_block_report(&law, |_| None, "d", 0.0).passed());
        // Stopping on a repeated first pair leaves x_1 != x_2 on {T > 3}.
        let stop = |x: &[usize]| (x.len() >= 2 && x[0] == x[1]).then_some(2);
        let rep = conditional_exchangeability_report(&law, stop, "d", 0.0);
        assert!(!rep.passed());
        assert_eq!(rep.witness.unwrap().n, 3);
        assert!(stop_block_report(&law, stop, "d", 0.0).passed());
    }

    proptest! {
        #[test]
        fn singletons_match_powerset(q in 0.05f64..0.95, w0 in 0.05f64..0.9, w1 in 0.05f64..0.9) {
            prop_assume!(w0 + w1 < 0.95);
            let s = Categorical(ExpSmoothing::new(q, Measure::pmf(vec![w0, w1, 1.0 - w0 - w1]).unwrap()).unwrap());
            let adv = Categorical(Adversarial::new(Measure::pmf(vec![w0, w1, 1.0 - w0 - w1]).unwrap()));
            for (single, power) in [
                (check_cid(&s, "s", 3, EventScope::Singletons, 0.0).unwrap(), check_cid(&s, "s", 3, EventScope::Powerset, 0.0).unwrap()),
                (check_cid(&adv, "a", 3, EventScope::Singletons, 0.0).unwrap(), check_cid(&adv, "a", 3, EventScope::Powerset, 0.0).unwrap()),
            ] {
                // With three symbols one sign class of the deviations is a singleton.
                prop_assert!((power.residual - single.residual).abs() <= 1e-15);
            }
        }

        #[test]
        fn residuals_are_monotone_in_horizon(q in 0.05f64..0.95, w in 0.05f64..0.95) {
            let s = Categorical(ExpSmoothing::new(q, Measure::pmf(vec![w, 1.0 - w]).unwrap()).unwrap());
            for h in 1..5 {
                let ex = |h| check_exchangeability(&s, "s", h, 0.0).unwrap().residual;
                let st = |h| check_stationarity(&s, "s", h, 0.0).unwrap().residual;
                let ci = |h| check_cid(&s, "s", h, EventScope::Singletons, 0.0).unwrap().residual;
                prop_assert!(ex(h) <= ex(h + 1) + 1e-12);
                prop_assert!(st(h) <= st(h + 1) + 1e-12);
                prop_assert!(ci(h) <= ci(h + 1) + 1e-12);
            }
        }
    }
}
