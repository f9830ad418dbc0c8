use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::event::disjoint_union;
use super::quadrature::{integrate, QuadratureOptions};
use super::{special, Event, Interval, Observation, Space};
use crate::cid::hmw::CopulaChain;
use crate::error::{Error, Result};
use crate::stationary::stable::StableLaw;

/// Density component of a [`super::Measure`].
#[derive(Debug, Clone)]
pub enum Density {
    /// Masses on `{0, .., k-1}`.
    Pmf(Vec<f64>),
    Gaussian { mean: f64, var: f64 },
    Stable(StableLaw),
    /// Piecewise-linear density on a grid, zero outside it.
    Tabulated(Arc<Tabulated>),
    /// Gaussian law of a pair `(x, z)`.
    BivariateGaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
    /// Density produced by a chain of copula updates.
    Copula(Arc<CopulaChain>),
    /// `inner` restricted to `event`, which has `inner`-probability `mass`.
    Conditioned {
        inner: Box<Density>,
        event: Event,
        mass: f64,
    },
}

const REJECTION_LIMIT: usize = 10_000_000;

impl Density {
    pub fn validate(&self, space: Space) -> Result<()> {
        let mismatch = || Error::SpaceMismatch {
            expected: space.to_string(),
            found: self.family().into(),
        };
        match self {
            Density::Pmf(p) => {
                if space != Space::Categorical(p.len()) {
                    return Err(mismatch());
                }
                if p.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::Param("pmf entries must be non-negative".into()));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > super::MASS_TOL {
                    return Err(Error::Normalization { total });
                }
            }
            Density::Gaussian { mean, var } => {
                if space != Space::Real {
                    return Err(mismatch());
                }
                if !(mean.is_finite() && *var > 0.0 && var.is_finite()) {
                    return Err(Error::Param(format!("gaussian needs finite mean and positive variance, got ({mean}, {var})")));
                }
            }
            Density::Stable(law) => {
                if space != Space::Real {
                    return Err(mismatch());
                }
                law.validate()?;
            }
            Density::Tabulated(_) | Density::Copula(_) => {
                if space != Space::Real {
                    return Err(mismatch());
                }
            }
            Density::BivariateGaussian { mean, cov } => {
                if space != Space::RealPair {
                    return Err(mismatch());
                }
                let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                let finite = mean.iter().chain(cov.iter().flatten()).all(|v| v.is_finite());
                if !(finite && cov[0][0] > 0.0 && det > 0.0 && cov[0][1] == cov[1][0]) {
                    return Err(Error::Param("bivariate covariance must be symmetric positive definite".into()));
                }
            }
            Density::Conditioned { inner, event, mass } => {
                inner.validate(space)?;
                event.check_space(space)?;
                if !(*mass > 0.0 && *mass <= 1.0 + 1e-12) {
                    return Err(Error::Conditioning { mass: *mass });
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            Density::Pmf(_) => "pmf",
            Density::Gaussian { .. } => "gaussian",
            Density::Stable(_) => "stable",
            Density::Tabulated(_) => "tabulated",
            Density::BivariateGaussian { .. } => "bivariate_gaussian",
            Density::Copula(_) => "copula_chain",
            Density::Conditioned { .. } => "conditioned",
        }
    }

    /// Densities with respect to counting measure.
    pub fn is_discrete(&self) -> bool {
        match self {
            Density::Pmf(_) => true,
            Density::Conditioned { inner, .. } => inner.is_discrete(),
            _ => false,
        }
    }

    /// Structural equality used when merging mixture components.
    pub fn same_as(&self, other: &Density) -> bool {
        match (self, other) {
            (Density::Pmf(a), Density::Pmf(b)) => a == b,
            (Density::Gaussian { mean: m1, var: v1 }, Density::Gaussian { mean: m2, var: v2 }) => {
                m1.to_bits() == m2.to_bits() && v1.to_bits() == v2.to_bits()
            }
            (Density::Stable(a), Density::Stable(b)) => a == b,
            (Density::Tabulated(a), Density::Tabulated(b)) => Arc::ptr_eq(a, b) || a == b,
            (
                Density::BivariateGaussian { mean: m1, cov: c1 },
                Density::BivariateGaussian { mean: m2, cov: c2 },
            ) => m1 == m2 && c1 == c2,
            (Density::Copula(a), Density::Copula(b)) => Arc::ptr_eq(a, b),
            (
                Density::Conditioned { inner: i1, event: e1, mass: m1 },
                Density::Conditioned { inner: i2, event: e2, mass: m2 },
            ) => i1.same_as(i2) && e1 == e2 && m1 == m2,
            _ => false,
        }
    }

    pub fn pdf(&self, x: &Observation) -> Result<f64> {
        Ok(match (self, x) {
            (Density::Pmf(p), Observation::Cat(i)) => p.get(*i).copied().unwrap_or(0.0),
            (Density::Gaussian { mean, var }, Observation::Real(v)) => special::normal_pdf(*v, *mean, *var),
            (Density::Stable(law), Observation::Real(v)) => law.pdf(*v)?,
            (Density::Tabulated(t), Observation::Real(v)) => t.pdf(*v),
            (Density::Copula(c), Observation::Real(v)) => c.pdf(*v)?,
            (Density::BivariateGaussian { mean, cov }, Observation::Pair(a, b)) => bivariate_pdf(mean, cov, *a, *b),
            (Density::Conditioned { inner, event, mass }, _) => {
                if event.contains(x) {
                    inner.pdf(x)? / mass
                } else {
                    0.0
                }
            }
            _ => {
                return Err(Error::SpaceMismatch {
                    expected: self.family().into(),
                    found: x.to_string(),
                })
            }
        })
    }

    /// Distribution function of a univariate real density.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            Density::Gaussian { mean, var } => Ok(special::normal_cdf(x, *mean, *var)),
            Density::Stable(law) => law.cdf(x),
            Density::Tabulated(t) => Ok(t.cdf(x)),
            Density::Copula(c) => c.cdf(x),
            Density::Conditioned { inner, event, mass } => {
                let below = Event::interval(Interval::at_most(x)).intersect(event)?;
                Ok((inner.prob(&below)? / mass).clamp(0.0, 1.0))
            }
            _ => Err(Error::SpaceMismatch {
                expected: "real".into(),
                found: self.family().into(),
            }),
        }
    }

    /// Inverse distribution function of a univariate real density.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            Density::Gaussian { mean, var } => Ok(mean + var.sqrt() * special::std_normal_quantile(p)),
            Density::Tabulated(t) => Ok(t.quantile(p)),
            Density::Copula(c) => c.quantile(p),
            Density::Stable(law) if law.gamma == 1.0 => {
                Ok(law.a + law.standard_scale() * (std::f64::consts::PI * (p - 0.5)).tan())
            }
            _ => bisect_quantile(|x| self.cdf(x), p),
        }
    }

    pub fn prob(&self, event: &Event) -> Result<f64> {
        match (self, event) {
            (Density::Pmf(p), Event::Symbols(s)) => Ok(s.iter().filter_map(|i| p.get(*i)).sum()),
            (Density::Pmf(p), Event::Points(pts)) => Ok(pts
                .iter()
                .filter_map(|x| x.as_cat().and_then(|i| p.get(i)))
                .sum()),
            (Density::Conditioned { inner, event: own, mass }, e) => {
                Ok((inner.prob(&e.intersect(own)?)? / mass).clamp(0.0, 1.0))
            }
            (Density::BivariateGaussian { mean, cov }, Event::Rect(a, b)) => bivariate_rect(mean, cov, a, b),
            (Density::BivariateGaussian { .. }, Event::Points(_)) => Ok(0.0),
            (Density::Gaussian { .. } | Density::Stable(_) | Density::Tabulated(_) | Density::Copula(_), e) => match e {
                Event::Points(_) => Ok(0.0),
                Event::Intervals(ivs) => {
                    let mut p = 0.0;
                    for iv in disjoint_union(ivs) {
                        p += self.cdf(iv.hi)? - self.cdf(iv.lo)?;
                    }
                    Ok(p.clamp(0.0, 1.0))
                }
                _ => Err(Error::SpaceMismatch {
                    expected: "real interval".into(),
                    found: format!("{e:?}"),
                }),
            },
            _ => Err(Error::SpaceMismatch {
                expected: self.family().into(),
                found: format!("{event:?}"),
            }),
        }
    }

    /// This density restricted to `event`, where `mass` is its probability.
    pub fn restrict(&self, event: &Event, mass: f64) -> Result<Density> {
        Ok(match self {
            Density::Pmf(p) => Density::Pmf(
                p.iter()
                    .enumerate()
                    .map(|(i, w)| if event.contains(&Observation::Cat(i)) { w / mass } else { 0.0 })
                    .collect(),
            ),
            Density::Conditioned { inner, event: own, mass: m0 } => Density::Conditioned {
                inner: inner.clone(),
                event: own.intersect(event)?,
                mass: m0 * mass,
            },
            _ => Density::Conditioned {
                inner: Box::new(self.clone()),
                event: event.clone(),
                mass,
            },
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Observation> {
        Ok(match self {
            Density::Pmf(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut last = 0;
                for (i, w) in p.iter().enumerate() {
                    if *w > 0.0 {
                        last = i;
                    }
                    acc += w;
                    if u < acc {
                        return Ok(Observation::Cat(i));
                    }
                }
                Observation::Cat(last)
            }
            Density::Gaussian { mean, var } => {
                let z: f64 = StandardNormal.sample(rng);
                Observation::Real(mean + var.sqrt() * z)
            }
            Density::Stable(law) => Observation::Real(law.sample(rng)),
            Density::Tabulated(t) => Observation::Real(t.quantile(rng.random())),
            Density::Copula(c) => Observation::Real(c.quantile(rng.random())?),
            Density::BivariateGaussian { mean, cov } => {
                let l11 = cov[0][0].sqrt();
                let l21 = cov[1][0] / l11;
                let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
                let e1: f64 = StandardNormal.sample(rng);
                let e2: f64 = StandardNormal.sample(rng);
                Observation::Pair(mean[0] + l11 * e1, mean[1] + l21 * e1 + l22 * e2)
            }
            Density::Conditioned { inner, event, .. } => return sample_conditioned(inner, event, rng),
        })
    }
}

fn sample_conditioned<R: Rng + ?Sized>(inner: &Density, event: &Event, rng: &mut R) -> Result<Observation> {
    if let (Event::Intervals(ivs), false) = (event, matches!(inner, Density::Conditioned { .. } | Density::Pmf(_))) {
        // Inverse CDF inside the chosen interval.
        let pieces = disjoint_union(ivs);
        let mut bounds = Vec::with_capacity(pieces.len());
        let mut total = 0.0;
        for iv in &pieces {
            let (lo, hi) = (inner.cdf(iv.lo)?, inner.cdf(iv.hi)?);
            total += hi - lo;
            bounds.push((lo, hi));
        }
        if !(total > 0.0) {
            return Err(Error::Conditioning { mass: total });
        }
        let mut u = rng.random::<f64>() * total;
        for (iv, (lo, hi)) in pieces.iter().zip(&bounds) {
            let w = hi - lo;
            if u < w || std::ptr::eq(iv, pieces.last().unwrap()) {
                let x = inner.quantile(lo + u.min(w))?;
                return Ok(Observation::Real(x.clamp(iv.lo, iv.hi)));
            }
            u -= w;
        }
    }
    for _ in 0..REJECTION_LIMIT {
        let x = inner.sample(rng)?;
        if event.contains(&x) {
            return Ok(x);
        }
    }
    Err(Error::Conditioning { mass: 0.0 })
}

fn bisect_quantile<F: Fn(f64) -> Result<f64>>(cdf: F, p: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while cdf(lo)? > p {
        lo *= 2.0;
        if lo < -1e300 {
            return Ok(lo);
        }
    }
    while cdf(hi)? < p {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(hi);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn bivariate_pdf(mean: &[f64; 2], cov: &[[f64; 2]; 2], x: f64, z: f64) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let (dx, dz) = (x - mean[0], z - mean[1]);
    let q = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dz + cov[0][0] * dz * dz) / det;
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}

// P(X in a, Z in b) = ∫_a f_X(x) P(Z in b | X = x) dx with a Gaussian conditional.
fn bivariate_rect(mean: &[f64; 2], cov: &[[f64; 2]; 2], a: &Interval, b: &Interval) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let slope = cov[0][1] / cov[0][0];
    let cvar = cov[1][1] - slope * cov[0][1];
    if b.is_reals() {
        return Ok(special::normal_cdf(a.hi, mean[0], cov[0][0]) - special::normal_cdf(a.lo, mean[0], cov[0][0]));
    }
    let est = integrate(
        |x| {
            let m = mean[1] + slope * (x - mean[0]);
            let pz = special::normal_cdf(b.hi, m, cvar) - special::normal_cdf(b.lo, m, cvar);
            special::normal_pdf(x, mean[0], cov[0][0]) * pz
        },
        a.lo,
        a.hi,
        QuadratureOptions::with_abs_tol(1e-11),
    )?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// Piecewise-linear density through `(xs[i], ys[i])`, normalised by the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    cum: Vec<f64>,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Param("tabulated density needs at least two matching grid points".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Param("tabulated grid must be finite and strictly increasing".into()));
        }
        if ys.iter().any(|y| !(y.is_finite() && *y >= 0.0)) {
            return Err(Error::Param("tabulated density values must be non-negative".into()));
        }
        let mut cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cum[i] = cum[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        }
        let total = cum[xs.len() - 1];
        if !(total > 0.0) {
            return Err(Error::Normalization { total });
        }
        if (total - 1.0).abs() <= super::MASS_TOL {
            // Already normalised: keep the values bit-for-bit.
            return Ok(Self { xs, ys, cum });
        }
        Ok(Self {
            ys: ys.iter().map(|y| y / total).collect(),
            cum: cum.iter().map(|c| c / total).collect(),
            xs,
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        Some(self.xs.partition_point(|v| *v <= x).clamp(1, n - 1) - 1)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        match self.segment(x) {
            None => 1.0,
            Some(i) => {
                let dx = x - self.xs[i];
                let s = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
                (self.cum[i] + dx * (self.ys[i] + 0.5 * s * dx)).min(1.0)
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.xs.len();
        if p <= 0.0 {
            return self.xs[0];
        }
        if p >= 1.0 {
            return self.xs[n - 1];
        }
        let i = (self.cum.partition_point(|c| *c <= p).clamp(1, n - 1)) - 1;
        let r = p - self.cum[i];
        let h = self.xs[i + 1] - self.xs[i];
        let y0 = self.ys[i];
        let s = (self.ys[i + 1] - y0) / h;
        // Solve y0 t + s t^2 / 2 = r in a cancellation-free form.
        let disc = (y0 * y0 + 2.0 * s * r).max(0.0);
        let denom = y0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (self.xs[i] + t.clamp(0.0, h)).min(self.xs[i + 1])
    }
}
