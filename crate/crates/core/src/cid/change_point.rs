//! Exchangeable until a predictable stopping time `T`, then smoothed:
//! `σ_{n+1}(x, y) = β_{n+1}(x, y)` while `T > n + 1`, otherwise
//! `q_n(x) σ_n(x) + (1 - q_n(x)) δ_y`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::recursive::QSchedule;
use crate::error::{Error, Result};
use crate::measure::{Event, Measure, Observation, Partition, Space};
use crate::strategy::Strategy;

/// The sets `A_n` with `{T = n + 1} = {(X_1..X_n) ∈ A_n}`. Only the first
/// `n` at which the prefix falls in `A_n` counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StopRule {
    Never,
    /// `T - 1` is the first `n` with `count` points of `set` among `x_1..x_n`.
    FirstCount { set: Event, count: usize },
    /// `T = horizon + 1` iff the number of points of `set` in `x_1..x_horizon` is in `counts`.
    AtHorizon { horizon: usize, set: Event, counts: Vec<usize> },
    /// `sets[n - 1]` lists the paths of `A_n` over a finite alphabet.
    Table { sets: Vec<Vec<Vec<usize>>> },
}

impl StopRule {
    pub fn validate(&self, space: Space) -> Result<()> {
        match self {
            StopRule::Never => Ok(()),
            StopRule::FirstCount { set, count } => {
                set.check_space(space)?;
                if *count == 0 {
                    return Err(Error::Param("stopping count must be at least 1".into()));
                }
                Ok(())
            }
            StopRule::AtHorizon { horizon, set, .. } => {
                set.check_space(space)?;
                if *horizon == 0 {
                    return Err(Error::Param("stopping horizon must be at least 1".into()));
                }
                Ok(())
            }
            StopRule::Table { sets } => {
                let Space::Categorical(k) = space else {
                    return Err(Error::SpaceMismatch {
                        expected: "categorical".into(),
                        found: space.to_string(),
                    });
                };
                for (i, paths) in sets.iter().enumerate() {
                    for p in paths {
                        if p.len() != i + 1 || p.iter().any(|x| *x >= k) {
                            return Err(Error::Param(format!("path {p:?} does not belong to A_{}", i + 1)));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether `prefix ∈ A_n` with `n = prefix.len()`.
    pub fn in_stop_set(&self, prefix: &[Observation]) -> bool {
        let n = prefix.len();
        match self {
            StopRule::Never => false,
            StopRule::FirstCount { set, count } => {
                n > 0 && set.contains(&prefix[n - 1]) && prefix.iter().filter(|x| set.contains(x)).count() == *count
            }
            StopRule::AtHorizon { horizon, set, counts } => {
                n == *horizon && counts.contains(&prefix.iter().filter(|x| set.contains(x)).count())
            }
            StopRule::Table { sets } => sets
                .get(n.wrapping_sub(1))
                .is_some_and(|paths| paths.iter().any(|p| p.iter().zip(prefix).all(|(a, b)| b.as_cat() == Some(*a)))),
        }
    }

    /// `T - 1` if it is at most `history.len()`.
    pub fn stop_index(&self, history: &[Observation]) -> Option<usize> {
        (1..=history.len()).find(|n| self.in_stop_set(&history[..*n]))
    }

    /// Whether every `A_n` is invariant under coordinate permutations.
    pub fn is_permutation_invariant(&self) -> bool {
        match self {
            StopRule::Never | StopRule::AtHorizon { .. } => true,
            StopRule::FirstCount { .. } => false,
            StopRule::Table { sets } => sets.iter().all(|paths| {
                let mut sorted: Vec<Vec<usize>> = paths
                    .iter()
                    .map(|p| {
                        let mut s = p.clone();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                sorted.sort();
                sorted.dedup();
                // Invariant iff every rearrangement of each member is listed.
                let listed: std::collections::BTreeSet<&Vec<usize>> = paths.iter().collect();
                sorted.iter().all(|s| permutations(s).iter().all(|p| listed.contains(p)))
            }),
        }
    }
}

fn permutations(s: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![s.to_vec()];
    let mut cur = s.to_vec();
    // Lexicographic successors of the sorted multiset.
    loop {
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|i| cur[*i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|j| cur[*j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// What happens after the change point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PostMode {
    /// `(1 - q) δ_y`.
    Delta,
    /// `(1 - q) σ_n(x, · | H_y)`.
    Conditional { partition: Partition },
}

#[derive(Clone)]
pub struct ChangePoint {
    beta: Arc<dyn Strategy>,
    stop: StopRule,
    q: QSchedule,
    post: PostMode,
}

impl std::fmt::Debug for ChangePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChangePoint")
            .field("beta", &self.beta.family())
            .field("stop", &self.stop)
            .field("q", &self.q)
            .field("post", &self.post)
            .finish()
    }
}

impl ChangePoint {
    pub fn new(beta: Arc<dyn Strategy>, stop: StopRule, q: QSchedule, post: PostMode) -> Result<Self> {
        let space = beta.space();
        stop.validate(space)?;
        q.validate()?;
        if let PostMode::Conditional { partition } = &post {
            partition.validate(space)?;
        }
        Ok(Self { beta, stop, q, post })
    }

    pub fn stop_rule(&self) -> &StopRule {
        &self.stop
    }

    pub fn beta(&self) -> &dyn Strategy {
        self.beta.as_ref()
    }
}

impl Strategy for ChangePoint {
    fn family(&self) -> &str {
        "change_point"
    }

    fn space(&self) -> Space {
        self.beta.space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let m = history.len();
        let tau = match m {
            0 | 1 => None,
            _ => self.stop.stop_index(&history[..m - 1]),
        };
        let Some(tau) = tau else {
            return self.beta.predictive(history);
        };
        let space = self.beta.space();
        let mut sigma = self.beta.predictive(&history[..tau])?;
        for j in tau..m {
            let q = self.q.at(&history[..j]);
            let y = &history[j];
            let post = match &self.post {
                PostMode::Delta => Measure::dirac(*y, space)?,
                PostMode::Conditional { partition } => sigma.condition(&partition.cell_of(y)?)?,
            };
            sigma = Measure::mix(&[(q, &sigma), (1.0 - q, &post)])?;
        }
        Ok(sigma)
    }
}
