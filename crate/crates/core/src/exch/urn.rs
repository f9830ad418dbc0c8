//! Generalised Pólya urn: drawing a colour in cell `H` adds `m_j* = m ν({j} | H)`
//! balls of every colour `j ∈ H`.

use crate::error::{Error, Result};
use crate::finite::{FiniteStrategy, Scalar};
use crate::measure::{Partition, Space};

/// Ball counts after some draws. Counts are real because `m_j*` usually is.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnState<T> {
    counts: Vec<T>,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    /// Reinforcement `m_j*` of each colour.
    reinforcement: Vec<T>,
}

impl<T: Scalar> UrnState<T> {
    pub fn new(counts: Vec<T>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let k = counts.len();
        Partition::Cells(cells.clone()).validate(Space::Categorical(k))?;
        if counts.iter().any(|m| *m < T::zero()) {
            return Err(Error::Param("ball counts must be non-negative".into()));
        }
        let m = counts.iter().fold(T::zero(), |a, b| a + b.clone());
        if !(m > T::zero()) {
            return Err(Error::Param("urn must hold at least one ball".into()));
        }
        let mut cell_of = vec![0; k];
        let mut reinforcement = vec![T::zero(); k];
        for (ci, cell) in cells.iter().enumerate() {
            let mass = cell.iter().fold(T::zero(), |a, j| a + counts[*j].clone());
            if !(mass > T::zero()) {
                return Err(Error::Partition(format!("cell {ci} holds no balls")));
            }
            for &j in cell {
                cell_of[j] = ci;
                reinforcement[j] = m.clone() * counts[j].clone() / mass.clone();
            }
        }
        Ok(Self {
            counts,
            cells,
            cell_of,
            reinforcement,
        })
    }

    pub fn counts(&self) -> &[T] {
        &self.counts
    }

    pub fn total(&self) -> T {
        self.counts.iter().fold(T::zero(), |a, b| a + b.clone())
    }

    pub fn reinforcement(&self) -> &[T] {
        &self.reinforcement
    }

    /// `P{j} = m_j / m` for the current counts.
    pub fn predictive(&self) -> Vec<T> {
        let m = self.total();
        self.counts.iter().map(|c| c.clone() / m.clone()).collect()
    }

    /// State after drawing `color`.
    pub fn update(&self, color: usize) -> Result<Self> {
        if color >= self.counts.len() {
            return Err(Error::Observation(format!("colour {color} outside alphabet of size {}", self.counts.len())));
        }
        let mut next = self.clone();
        for &j in &self.cells[self.cell_of[color]] {
            next.counts[j] = next.counts[j].clone() + self.reinforcement[j].clone();
        }
        Ok(next)
    }
}

/// The urn as a strategy: the history is replayed from the initial state.
#[derive(Debug, Clone)]
pub struct Urn<T> {
    initial: UrnState<T>,
}

impl<T: Scalar> Urn<T> {
    pub fn new(counts: Vec<T>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Ok(Self {
            initial: UrnState::new(counts, cells)?,
        })
    }

    pub fn initial(&self) -> &UrnState<T> {
        &self.initial
    }

    pub fn state_after(&self, history: &[usize]) -> Result<UrnState<T>> {
        history.iter().try_fold(self.initial.clone(), |s, x| s.update(*x))
    }

    /// `ν{j} = m_j / m`, the base of the equivalent kernel Dirichlet sequence.
    pub fn base(&self) -> Vec<T> {
        self.initial.predictive()
    }
}

impl<T: Scalar> FiniteStrategy<T> for Urn<T> {
    fn alphabet_size(&self) -> usize {
        self.initial.counts.len()
    }

    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>> {
        Ok(self.state_after(history)?.predictive())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exch::FiniteDirichlet;
    use crate::finite::parse_rational;
    use crate::measure::KernelRule;
    use num::BigRational;
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn cells() -> Vec<Vec<usize>> {
        vec![vec![0, 1], vec![2]]
    }

    #[test]
    fn reinforcement_fixture() {
        let u = Urn::new(vec![q("1"), q("1"), q("2")], cells()).unwrap();
        assert_eq!(u.initial().reinforcement(), &[q("2"), q("2"), q("4")]);
        assert_eq!(u.predictive_pmf(&[0]).unwrap()[0], q("3/8"));
        let after = u.state_after(&[2]).unwrap();
        assert_eq!(after.counts(), &[q("1"), q("1"), q("6")]);
        assert_eq!(after.total(), q("8"));
    }

    #[test]
    fn matches_partition_kernel_dirichlet() {
        let u = Urn::new(vec![q("1"), q("1"), q("2")], cells()).unwrap();
        let d = FiniteDirichlet::new(q("1"), u.base(), KernelRule::Partition(Partition::Cells(cells()))).unwrap();
        assert_eq!(d.predictive_pmf(&[0]).unwrap()[0], q("3/8"));
        for h in [vec![], vec![0], vec![2, 1], vec![1, 1, 2, 0]] {
            assert_eq!(u.predictive_pmf(&h).unwrap(), d.predictive_pmf(&h).unwrap());
        }
    }

    #[test]
    fn rejects_bad_states() {
        assert!(Urn::<f64>::new(vec![0.0, 0.0], vec![vec![0, 1]]).is_err());
        assert!(Urn::<f64>::new(vec![1.0, 0.0], vec![vec![0], vec![1]]).is_err());
        assert!(Urn::<f64>::new(vec![1.0, 1.0], vec![vec![0]]).is_err());
        assert!(Urn::new(vec![1.0], vec![vec![0]]).unwrap().predictive_pmf(&[3]).is_err());
    }

    proptest! {
        #[test]
        fn equivalence_in_floating_point(
            counts in proptest::collection::vec(0.1f64..5.0, 4),
            history in proptest::collection::vec(0usize..4, 0..8),
        ) {
            let cells = vec![vec![0, 2], vec![1], vec![3]];
            let u = Urn::new(counts, cells.clone()).unwrap();
            let d = FiniteDirichlet::new(1.0, u.base(), KernelRule::Partition(Partition::Cells(cells))).unwrap();
            let a = u.predictive_pmf(&history).unwrap();
            let b = d.predictive_pmf(&history).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let m = u.initial().total();
            prop_assert!((u.state_after(&history).unwrap().total() - m * (1.0 + history.len() as f64)).abs() < 1e-9 * m);
        }
    }
}
