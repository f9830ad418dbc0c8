use serde::{Deserialize, Serialize};

use super::{Event, Interval, Measure, Observation, Space};
use crate::error::{Error, Result};

/// A countable measurable partition of the sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Disjoint symbol sets covering a finite alphabet.
    Cells(Vec<Vec<usize>>),
    /// Sorted breakpoints `b_1 < .. < b_k` giving `(-∞, b_1], (b_1, b_2], .., (b_k, ∞)`.
    Breaks(Vec<f64>),
}

impl Partition {
    pub fn whole(space: Space) -> Partition {
        match space {
            Space::Categorical(k) => Partition::Cells(vec![(0..k).collect()]),
            _ => Partition::Breaks(vec![]),
        }
    }

    pub fn validate(&self, space: Space) -> Result<()> {
        match (self, space) {
            (Partition::Cells(cells), Space::Categorical(k)) => {
                let mut seen = vec![false; k];
                for cell in cells {
                    if cell.is_empty() {
                        return Err(Error::Partition("empty cell".into()));
                    }
                    for &i in cell {
                        if i >= k {
                            return Err(Error::Partition(format!("symbol {i} outside alphabet of size {k}")));
                        }
                        if seen[i] {
                            return Err(Error::Partition(format!("symbol {i} in two cells")));
                        }
                        seen[i] = true;
                    }
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(Error::Partition(format!("symbol {i} is in no cell")));
                }
                Ok(())
            }
            (Partition::Breaks(b), Space::Real) => {
                if b.iter().any(|x| !x.is_finite()) || b.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Partition("breakpoints must be finite and strictly increasing".into()));
                }
                Ok(())
            }
            _ => Err(Error::SpaceMismatch {
                expected: space.to_string(),
                found: format!("{self:?}"),
            }),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Partition::Cells(c) => c.len(),
            Partition::Breaks(b) => b.len() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell(&self, i: usize) -> Event {
        match self {
            Partition::Cells(c) => Event::symbols(c[i].iter().copied()),
            Partition::Breaks(b) => {
                let lo = if i == 0 { f64::NEG_INFINITY } else { b[i - 1] };
                let hi = b.get(i).copied().unwrap_or(f64::INFINITY);
                Event::interval(Interval {
                    lo,
                    hi,
                    lo_closed: false,
                    hi_closed: hi.is_finite(),
                })
            }
        }
    }

    pub fn cell_index(&self, x: &Observation) -> Result<usize> {
        match (self, x) {
            (Partition::Cells(cells), Observation::Cat(i)) => cells
                .iter()
                .position(|c| c.contains(i))
                .ok_or_else(|| Error::PartitionCoverage(x.to_string())),
            (Partition::Breaks(b), Observation::Real(v)) if v.is_finite() => Ok(b.partition_point(|t| t < v)),
            _ => Err(Error::PartitionCoverage(x.to_string())),
        }
    }

    pub fn cell_of(&self, x: &Observation) -> Result<Event> {
        Ok(self.cell(self.cell_index(x)?))
    }

    /// Every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        match (self, coarser) {
            (Partition::Cells(fine), Partition::Cells(_)) => fine.iter().all(|cell| {
                let owners: Vec<_> = cell
                    .iter()
                    .map(|i| coarser.cell_index(&Observation::Cat(*i)).ok())
                    .collect();
                owners[0].is_some() && owners.iter().all(|o| *o == owners[0])
            }),
            (Partition::Breaks(fine), Partition::Breaks(coarse)) => {
                coarse.iter().all(|b| fine.iter().any(|f| f.to_bits() == b.to_bits()))
            }
            _ => false,
        }
    }

    fn is_singletons(&self) -> bool {
        matches!(self, Partition::Cells(c) if c.iter().all(|cell| cell.len() == 1))
    }
}

/// How a kernel maps a point to a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRule {
    /// `α_x = δ_x`.
    Identity,
    /// `α_x = ν`.
    Constant,
    /// `α_x = ν(· | H_x)`.
    Partition(Partition),
    /// `δ_x` on `set`, otherwise `ν(· | set^c ∩ H_x)`.
    SetAugmented { partition: Partition, set: Event },
}

/// A kernel `α(· | x)` together with its base measure `ν`.
#[derive(Debug, Clone)]
pub struct Kernel {
    rule: KernelRule,
    base: Measure,
}

impl Kernel {
    pub fn new(rule: KernelRule, base: Measure) -> Result<Self> {
        let space = base.space();
        match &rule {
            KernelRule::Identity | KernelRule::Constant => {}
            KernelRule::Partition(p) | KernelRule::SetAugmented { partition: p, .. } => {
                p.validate(space)?;
                for i in 0..p.len() {
                    let mass = base.prob(&p.cell(i))?;
                    if !(mass > 0.0) {
                        return Err(Error::Partition(format!("cell {i} has base mass {mass}")));
                    }
                }
                if let KernelRule::SetAugmented { set, .. } = &rule {
                    set.check_space(space)?;
                }
            }
        }
        Ok(Self { rule, base })
    }

    pub fn identity(base: Measure) -> Self {
        Self {
            rule: KernelRule::Identity,
            base,
        }
    }

    pub fn rule(&self) -> &KernelRule {
        &self.rule
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    pub fn apply(&self, x: &Observation) -> Result<Measure> {
        x.check(self.base.space())?;
        match &self.rule {
            KernelRule::Identity => Measure::dirac(*x, self.base.space()),
            KernelRule::Constant => Ok(self.base.clone()),
            KernelRule::Partition(p) => self.base.condition(&p.cell_of(x)?),
            KernelRule::SetAugmented { partition, set } => {
                if set.contains(x) {
                    Measure::dirac(*x, self.base.space())
                } else {
                    let outside = set.complement(self.base.space())?;
                    self.base.condition(&outside.intersect(&partition.cell_of(x)?)?)
                }
            }
        }
    }

    /// True when `self` is at least as fine as `coarser`, as needed for a
    /// refining sequence of update kernels.
    pub fn refines(&self, coarser: &Kernel) -> bool {
        match (&self.rule, &coarser.rule) {
            (_, KernelRule::Constant) => true,
            (KernelRule::Identity, _) => true,
            (KernelRule::Partition(p), KernelRule::Identity) => p.is_singletons(),
            (KernelRule::Partition(p), KernelRule::Partition(q)) => p.refines(q),
            (KernelRule::Constant, KernelRule::Partition(q)) => q.len() == 1,
            _ => false,
        }
    }
}
