//! Probability measures on a finite alphabet, the real line, or the real plane.
//!
//! A [`Measure`] is a finite list of weighted atoms plus a finite list of
//! weighted density components. Densities are taken with respect to counting
//! measure on a categorical space and Lebesgue measure otherwise.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod density;
mod event;
pub mod json;
mod kernel;
pub mod quadrature;
pub mod special;

pub use density::{Density, Tabulated};
pub use event::{Event, Interval};
pub use kernel::{Kernel, KernelRule, Partition};

/// Tolerance on total mass for every constructed measure.
pub const MASS_TOL: f64 = 1e-12;

/// Which sample space a measure or observation lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Alphabet `{0, .., k-1}`.
    Categorical(usize),
    Real,
    /// Pairs `(x, z)`.
    RealPair,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Categorical(k) => write!(f, "categorical({k})"),
            Space::Real => f.write_str("real"),
            Space::RealPair => f.write_str("real_pair"),
        }
    }
}

/// A point of the sample space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Cat(usize),
    Real(f64),
    Pair(f64, f64),
}

impl Observation {
    /// Bit-level identity, so that `-0.0` and `0.0` are distinct and NaN equals itself.
    pub fn same_point(&self, other: &Observation) -> bool {
        match (self, other) {
            (Observation::Cat(a), Observation::Cat(b)) => a == b,
            (Observation::Real(a), Observation::Real(b)) => a.to_bits() == b.to_bits(),
            (Observation::Pair(a, b), Observation::Pair(c, d)) => {
                a.to_bits() == c.to_bits() && b.to_bits() == d.to_bits()
            }
            _ => false,
        }
    }

    pub fn check(&self, space: Space) -> Result<()> {
        let ok = match (self, space) {
            (Observation::Cat(i), Space::Categorical(k)) => *i < k,
            (Observation::Real(x), Space::Real) => x.is_finite(),
            (Observation::Pair(x, z), Space::RealPair) => x.is_finite() && z.is_finite(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Observation(format!("{self} is not a point of {space}")))
        }
    }

    pub fn as_cat(&self) -> Option<usize> {
        match self {
            Observation::Cat(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Observation::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(f64, f64)> {
        match self {
            Observation::Pair(x, z) => Some((*x, *z)),
            _ => None,
        }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Cat(i) => write!(f, "{i}"),
            Observation::Real(x) => write!(f, "{x}"),
            Observation::Pair(x, z) => write!(f, "({x}, {z})"),
        }
    }
}

/// Weighted atoms plus weighted density components. Immutable once built.
#[derive(Debug, Clone)]
pub struct Measure {
    space: Space,
    atoms: Vec<(Observation, f64)>,
    densities: Vec<(f64, Density)>,
}

impl Measure {
    /// Validates weights, space membership and density parameters.
    pub fn new(space: Space, atoms: Vec<(Observation, f64)>, densities: Vec<(f64, Density)>) -> Result<Self> {
        for (x, w) in &atoms {
            x.check(space)?;
            check_weight(*w)?;
        }
        for (w, d) in &densities {
            check_weight(*w)?;
            d.validate(space)?;
        }
        let m = Self {
            space,
            atoms: atoms.into_iter().filter(|(_, w)| *w > 0.0).collect(),
            densities: densities.into_iter().filter(|(w, _)| *w > 0.0).collect(),
        };
        let total = m.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization { total });
        }
        Ok(m)
    }

    pub fn dirac(x: Observation, space: Space) -> Result<Self> {
        Self::new(space, vec![(x, 1.0)], vec![])
    }

    pub fn from_density(space: Space, density: Density) -> Result<Self> {
        Self::new(space, vec![], vec![(1.0, density)])
    }

    /// Probability mass function on `{0, .., k-1}` stored as one density component.
    pub fn pmf(weights: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        Self::from_density(Space::Categorical(k), Density::Pmf(weights))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Param("empty alphabet".into()));
        }
        Self::pmf(vec![1.0 / k as f64; k])
    }

    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        Self::from_density(Space::Real, Density::Gaussian { mean, var })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn atoms(&self) -> &[(Observation, f64)] {
        &self.atoms
    }

    pub fn densities(&self) -> &[(f64, Density)] {
        &self.densities
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum::<f64>() + self.densities.iter().map(|(w, _)| w).sum::<f64>()
    }

    /// Component-wise equality: same atoms and structurally identical densities, in order.
    pub fn same_as(&self, other: &Measure) -> bool {
        self.space == other.space
            && self.atoms.len() == other.atoms.len()
            && self.densities.len() == other.densities.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|((x, a), (y, b))| x.same_point(y) && a.to_bits() == b.to_bits())
            && self
                .densities
                .iter()
                .zip(&other.densities)
                .all(|((a, d), (b, e))| a.to_bits() == b.to_bits() && d.same_as(e))
    }

    /// True when no positive mass sits on a single point.
    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty() && self.densities.iter().all(|(_, d)| !d.is_discrete())
    }

    /// Convex combination. Bit-identical atoms and identical densities are merged.
    pub fn mix(components: &[(f64, &Measure)]) -> Result<Measure> {
        let Some((_, first)) = components.first() else {
            return Err(Error::Normalization { total: 0.0 });
        };
        let space = first.space;
        let mut total = 0.0;
        for (w, m) in components {
            check_weight(*w)?;
            total += w;
            if m.space != space {
                return Err(Error::SpaceMismatch {
                    expected: space.to_string(),
                    found: m.space.to_string(),
                });
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization { total });
        }
        let mut atoms: Vec<(Observation, f64)> = Vec::new();
        let mut densities: Vec<(f64, Density)> = Vec::new();
        for (w, m) in components {
            if *w == 0.0 {
                continue;
            }
            for (x, a) in &m.atoms {
                match atoms.iter_mut().find(|(y, _)| y.same_point(x)) {
                    Some((_, acc)) => *acc += w * a,
                    None => atoms.push((*x, w * a)),
                }
            }
            for (a, d) in &m.densities {
                match densities.iter_mut().find(|(_, e)| e.same_as(d)) {
                    Some((acc, _)) => *acc += w * a,
                    None => densities.push((w * a, d.clone())),
                }
            }
        }
        Measure::new(space, atoms, densities)
    }

    /// Probability of an event. Atoms contribute indicator mass, densities their integral.
    pub fn prob(&self, event: &Event) -> Result<f64> {
        event.check_space(self.space)?;
        let mut p = 0.0;
        for (x, w) in &self.atoms {
            if event.contains(x) {
                p += w;
            }
        }
        for (w, d) in &self.densities {
            p += w * d.prob(event)?;
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Mass of the single point `x`.
    pub fn mass_at(&self, x: &Observation) -> Result<f64> {
        self.prob(&Event::Points(vec![*x]))
    }

    /// Masses of every symbol of a categorical space.
    pub fn symbol_masses(&self) -> Result<Vec<f64>> {
        let Space::Categorical(k) = self.space else {
            return Err(Error::SpaceMismatch {
                expected: "categorical".into(),
                found: self.space.to_string(),
            });
        };
        let mut out = vec![0.0; k];
        for (x, w) in &self.atoms {
            if let Observation::Cat(i) = x {
                out[*i] += w;
            }
        }
        for (w, d) in &self.densities {
            for (i, o) in out.iter_mut().enumerate() {
                *o += w * d.pdf(&Observation::Cat(i))?;
            }
        }
        Ok(out)
    }

    /// Radon-Nikodym derivative at `x` with respect to the reference measure
    /// (counting or Lebesgue) plus counting measure on this measure's atoms:
    /// atom mass if `x` is an atom, combined density otherwise.
    pub fn density_at(&self, x: &Observation) -> Result<f64> {
        x.check(self.space)?;
        if let Space::Categorical(_) = self.space {
            return self.mass_at(x);
        }
        let atom: f64 = self
            .atoms
            .iter()
            .filter(|(y, _)| y.same_point(x))
            .map(|(_, w)| w)
            .sum();
        if atom > 0.0 {
            return Ok(atom);
        }
        let mut f = 0.0;
        for (w, d) in &self.densities {
            f += w * d.pdf(x)?;
        }
        Ok(f)
    }

    /// Distribution function on the real line.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.prob(&Event::interval(Interval::at_most(x)))
    }

    /// Restriction to `event`, renormalised.
    pub fn condition(&self, event: &Event) -> Result<Measure> {
        event.check_space(self.space)?;
        if event.is_whole(self.space) {
            return Ok(self.clone());
        }
        let mass = self.prob(event)?;
        if !(mass > 0.0) {
            return Err(Error::Conditioning { mass });
        }
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| event.contains(x))
            .map(|(x, w)| (*x, w / mass))
            .collect();
        let mut densities = Vec::new();
        for (w, d) in &self.densities {
            let dm = d.prob(event)?;
            if dm > 0.0 {
                densities.push((w * dm / mass, d.restrict(event, dm)?));
            }
        }
        let mut m = Measure {
            space: self.space,
            atoms,
            densities,
        };
        m.renormalise()?;
        Ok(m)
    }

    // Removes rounding drift left by division, then re-checks the invariant.
    fn renormalise(&mut self) -> Result<()> {
        let total = self.total_mass();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization { total });
        }
        for (_, w) in &mut self.atoms {
            *w /= total;
        }
        for (w, _) in &mut self.densities {
            *w /= total;
        }
        Ok(())
    }

    /// One draw. Components are chosen by inverse CDF on cumulative weights,
    /// atoms first, ties going to the lowest index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Observation> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, w) in &self.atoms {
            acc += w;
            if u < acc {
                return Ok(*x);
            }
        }
        for (w, d) in &self.densities {
            acc += w;
            if u < acc {
                return d.sample(rng);
            }
        }
        // u landed in the rounding gap above the cumulative total.
        match (self.densities.last(), self.atoms.last()) {
            (Some((_, d)), _) => d.sample(rng),
            (None, Some((x, _))) => Ok(*x),
            (None, None) => Err(Error::Normalization { total: 0.0 }),
        }
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::Normalization { total: w })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a() -> Observation {
        Observation::Cat(0)
    }

    #[test]
    fn mix_fixtures() {
        let da = Measure::dirac(a(), Space::Categorical(2)).unwrap();
        let db = Measure::dirac(Observation::Cat(1), Space::Categorical(2)).unwrap();
        let u = Measure::uniform(2).unwrap();
        let m = Measure::mix(&[(0.5, &da), (0.5, &u)]).unwrap();
        assert_eq!(m.mass_at(&a()).unwrap(), 0.75);
        let m = Measure::mix(&[(0.25, &u), (0.25, &da), (0.5, &db)]).unwrap();
        assert_eq!(m.mass_at(&a()).unwrap(), 0.375);
        let same = Measure::mix(&[(1.0, &u)]).unwrap();
        assert_eq!(same.symbol_masses().unwrap(), u.symbol_masses().unwrap());
    }

    #[test]
    fn mix_rejects_bad_inputs() {
        let u = Measure::uniform(2).unwrap();
        let g = Measure::gaussian(0.0, 1.0).unwrap();
        assert!(matches!(Measure::mix(&[(0.5, &u), (0.4, &u)]), Err(Error::Normalization { .. })));
        assert!(matches!(Measure::mix(&[(0.5, &u), (0.5, &g)]), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn prob_fixtures() {
        let u3 = Measure::uniform(3).unwrap();
        assert!((u3.prob(&Event::symbols([0, 1])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let g = Measure::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.prob(&Event::interval(Interval::at_most(0.0))).unwrap(), 0.5);
    }

    #[test]
    fn condition_fixtures() {
        let u3 = Measure::uniform(3).unwrap();
        let c = u3.condition(&Event::symbols([0, 1])).unwrap();
        assert_eq!(c.symbol_masses().unwrap(), vec![0.5, 0.5, 0.0]);
        let da = Measure::dirac(a(), Space::Categorical(2)).unwrap();
        assert_eq!(da.condition(&Event::symbols([0])).unwrap().mass_at(&a()).unwrap(), 1.0);
        assert!(matches!(
            da.condition(&Event::symbols([1])),
            Err(Error::Conditioning { .. })
        ));

        let half = Measure::gaussian(0.0, 1.0)
            .unwrap()
            .condition(&Event::interval(Interval::at_least(0.0)))
            .unwrap();
        let p = half.prob(&Event::interval(Interval::at_least(1.0))).unwrap();
        let oracle = 2.0 * (1.0 - special::std_normal_cdf(1.0));
        assert!((p - oracle).abs() < 1e-14);
        assert!((p - 0.3173).abs() < 1e-4);
    }

    #[test]
    fn condition_on_whole_space_is_identity() {
        let g = Measure::gaussian(1.0, 2.0).unwrap();
        let c = g.condition(&Event::whole(Space::Real)).unwrap();
        assert_eq!(c.densities().len(), 1);
        assert!(c.densities()[0].1.same_as(&g.densities()[0].1));
    }

    #[test]
    fn density_at_uses_atom_mass_on_atoms() {
        let g = Measure::gaussian(0.0, 1.0).unwrap();
        let d = Measure::dirac(Observation::Real(0.5), Space::Real).unwrap();
        let m = Measure::mix(&[(0.25, &d), (0.75, &g)]).unwrap();
        assert_eq!(m.density_at(&Observation::Real(0.5)).unwrap(), 0.25);
        let f = m.density_at(&Observation::Real(0.0)).unwrap();
        assert!((f - 0.75 * special::std_normal_pdf(0.0)).abs() < 1e-16);
    }

    #[test]
    fn sampling_is_seeded_and_calibrated() {
        let d = Measure::dirac(a(), Space::Categorical(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(d.sample(&mut rng).unwrap(), a());

        let u = Measure::uniform(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| u.sample(&mut rng).unwrap() == Observation::Cat(1)).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.002);

        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let g = Measure::gaussian(0.0, 1.0).unwrap();
        for _ in 0..50 {
            assert_eq!(g.sample(&mut r1).unwrap(), g.sample(&mut r2).unwrap());
        }
    }

    #[test]
    fn observations_are_validated() {
        assert!(Observation::Cat(2).check(Space::Categorical(2)).is_err());
        assert!(Observation::Real(f64::NAN).check(Space::Real).is_err());
        assert!(Measure::dirac(Observation::Real(f64::INFINITY), Space::Real).is_err());
        assert!(Measure::gaussian(0.0, 0.0).is_err());
    }
}
