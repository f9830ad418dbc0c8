//! Classical and kernel-based Dirichlet sequences:
//! `σ_n(x) = (c ν + Σ_i α(· | x_i)) / (n + c)`.

use crate::error::{Error, Result};
use crate::finite::{FiniteStrategy, Scalar};
use crate::measure::{Kernel, KernelRule, Measure, Observation, Partition, Space};
use crate::strategy::Strategy;

/// Dirichlet strategy over any space; the identity kernel gives the classical case.
#[derive(Debug, Clone)]
pub struct Dirichlet {
    c: f64,
    kernel: Kernel,
}

impl Dirichlet {
    pub fn new(c: f64, kernel: Kernel) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Param(format!("concentration must be positive, got {c}")));
        }
        Ok(Self { c, kernel })
    }

    pub fn classical(c: f64, base: Measure) -> Result<Self> {
        Self::new(c, Kernel::identity(base))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn base(&self) -> &Measure {
        self.kernel.base()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

impl Strategy for Dirichlet {
    fn family(&self) -> &str {
        match self.kernel.rule() {
            KernelRule::Identity => "dirichlet",
            _ => "kernel_dirichlet",
        }
    }

    fn space(&self) -> Space {
        self.kernel.base().space()
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let denom = history.len() as f64 + self.c;
        let parts: Vec<Measure> = history.iter().map(|x| self.kernel.apply(x)).collect::<Result<_>>()?;
        let mut comps: Vec<(f64, &Measure)> = Vec::with_capacity(parts.len() + 1);
        comps.push((self.c / denom, self.kernel.base()));
        comps.extend(parts.iter().map(|m| (1.0 / denom, m)));
        Measure::mix(&comps)
    }
}

/// Kernel-based Dirichlet sequence on `{0, .., k-1}` in any [`Scalar`].
#[derive(Debug, Clone)]
pub struct FiniteDirichlet<T> {
    c: T,
    base: Vec<T>,
    /// `alpha[x][j] = α({j} | x)`.
    alpha: Vec<Vec<T>>,
}

impl<T: Scalar> FiniteDirichlet<T> {
    /// `rule` partitions must be given as symbol cells.
    pub fn new(c: T, base: Vec<T>, rule: KernelRule) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::Param(format!("concentration must be positive, got {c:?}")));
        }
        let k = base.len();
        if k == 0 || base.iter().any(|p| *p < T::zero()) {
            return Err(Error::Param("base must be a non-negative vector over a non-empty alphabet".into()));
        }
        let total = base.iter().fold(T::zero(), |a, b| a + b.clone());
        if (total.to_f64_lossy() - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization {
                total: total.to_f64_lossy(),
            });
        }
        let conditional = |cell: &[usize]| -> Result<Vec<T>> {
            let mass = cell.iter().fold(T::zero(), |a, j| a + base[*j].clone());
            if !(mass > T::zero()) {
                return Err(Error::Partition(format!("cell {cell:?} has zero base mass")));
            }
            let mut row = vec![T::zero(); k];
            for &j in cell {
                row[j] = base[j].clone() / mass.clone();
            }
            Ok(row)
        };
        let cells_of = |p: &Partition| -> Result<Vec<Vec<usize>>> {
            p.validate(Space::Categorical(k))?;
            match p {
                Partition::Cells(c) => Ok(c.clone()),
                Partition::Breaks(_) => Err(Error::Partition("finite kernels need symbol cells".into())),
            }
        };
        let cell_index = |cells: &[Vec<usize>], x: usize| cells.iter().position(|c| c.contains(&x)).expect("validated cover");
        let mut alpha = Vec::with_capacity(k);
        for x in 0..k {
            let row = match &rule {
                KernelRule::Identity => {
                    let mut r = vec![T::zero(); k];
                    r[x] = T::one();
                    r
                }
                KernelRule::Constant => base.clone(),
                KernelRule::Partition(p) => {
                    let cells = cells_of(p)?;
                    conditional(&cells[cell_index(&cells, x)])?
                }
                KernelRule::SetAugmented { partition, set } => {
                    let cells = cells_of(partition)?;
                    set.check_space(Space::Categorical(k))?;
                    if set.contains(&Observation::Cat(x)) {
                        let mut r = vec![T::zero(); k];
                        r[x] = T::one();
                        r
                    } else {
                        let cell: Vec<usize> = cells[cell_index(&cells, x)]
                            .iter()
                            .copied()
                            .filter(|j| !set.contains(&Observation::Cat(*j)))
                            .collect();
                        conditional(&cell)?
                    }
                }
            };
            alpha.push(row);
        }
        Ok(Self { c, base, alpha })
    }

    pub fn kernel_row(&self, x: usize) -> &[T] {
        &self.alpha[x]
    }
}

impl<T: Scalar> FiniteStrategy<T> for FiniteDirichlet<T> {
    fn alphabet_size(&self) -> usize {
        self.base.len()
    }

    fn predictive_pmf(&self, history: &[usize]) -> Result<Vec<T>> {
        let k = self.base.len();
        let mut acc: Vec<T> = self.base.iter().map(|p| self.c.clone() * p.clone()).collect();
        for &x in history {
            if x >= k {
                return Err(Error::Observation(format!("symbol {x} outside alphabet of size {k}")));
            }
            for (a, r) in acc.iter_mut().zip(&self.alpha[x]) {
                *a = a.clone() + r.clone();
            }
        }
        let denom = self.c.clone() + <T as Scalar>::from_usize(history.len());
        Ok(acc.into_iter().map(|a| a / denom.clone()).collect())
    }
}
