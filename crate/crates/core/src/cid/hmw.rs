//! Copula-driven recursive density updates.
//!
//! Given `f_0` and copula densities `c_1, c_2, ..`, the predictive density after
//! observing `y_1..y_n` is
//! `f_n(z) = c_n(F_{n-1}(z), F_{n-1}(y_n)) f_{n-1}(z)`.
//! Its distribution function satisfies `F_n(z) = h_n(F_{n-1}(z) | F_{n-1}(y_n))`
//! where `h(u | v) = ∫_0^u c(s, v) ds`, so every `F_n` and its inverse are
//! evaluated exactly through the chain of `h` functions rather than on a grid.
//!
//! Values are carried as Gaussian scores `Φ⁻¹(F)`, which keeps Gaussian-copula
//! steps free of tail cancellation.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::special::{std_normal_cdf, std_normal_quantile};
use crate::measure::{Density, Measure, Observation, Space};
use crate::strategy::Strategy;

/// Tolerance on a tabulated copula's conditional marginals.
pub const COPULA_MARGINAL_TOL: f64 = 1e-6;
/// Largest admissible normalisation drift of an updated density.
pub const DRIFT_TOL: f64 = 1e-4;

/// Bivariate copula density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Copula {
    Independence,
    Gaussian { rho: f64 },
    Tabulated(Arc<TabulatedCopula>),
}

impl Copula {
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::Param(format!("gaussian copula needs rho in (-1, 1), got {rho}")));
        }
        Ok(Copula::Gaussian { rho })
    }

    /// Copula density at scores `a = Φ⁻¹(u)`, `b = Φ⁻¹(v)`.
    fn density_scores(&self, a: f64, b: f64) -> f64 {
        match self {
            Copula::Independence => 1.0,
            Copula::Gaussian { rho } => {
                if *rho == 0.0 {
                    return 1.0;
                }
                let r2 = 1.0 - rho * rho;
                let q = rho * a * (rho * a - 2.0 * b) + rho * rho * b * b;
                let e = (-q / (2.0 * r2)).exp();
                if e.is_nan() {
                    0.0
                } else {
                    e / r2.sqrt()
                }
            }
            Copula::Tabulated(t) => t.density(std_normal_cdf(a), std_normal_cdf(b)),
        }
    }

    /// Copula density `c(u, v)` on the unit square.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        match self {
            Copula::Tabulated(t) => t.density(u, v),
            _ => self.density_scores(std_normal_quantile(u), std_normal_quantile(v)),
        }
    }

    /// `h` in score form: `Φ⁻¹(h(Φ(a) | Φ(b)))`.
    fn h_scores(&self, a: f64, b: f64) -> f64 {
        match self {
            Copula::Independence => a,
            Copula::Gaussian { rho } => (a - rho * b) / (1.0 - rho * rho).sqrt(),
            Copula::Tabulated(t) => std_normal_quantile(t.h(std_normal_cdf(a), std_normal_cdf(b))),
        }
    }

    fn h_inv_scores(&self, a: f64, b: f64) -> f64 {
        match self {
            Copula::Independence => a,
            Copula::Gaussian { rho } => a * (1.0 - rho * rho).sqrt() + rho * b,
            Copula::Tabulated(t) => std_normal_quantile(t.h_inv(std_normal_cdf(a), std_normal_cdf(b))),
        }
    }

    /// Conditional distribution function `h(u | v)`.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        match self {
            Copula::Tabulated(t) => t.h(u, v),
            _ => std_normal_cdf(self.h_scores(std_normal_quantile(u), std_normal_quantile(v))),
        }
    }

    /// `∫_0^1 c(s, v) ds` before normalisation; 1 for the closed-form families.
    fn column_mass(&self, v: f64) -> f64 {
        match self {
            Copula::Tabulated(t) => t.column_mass(v),
            _ => 1.0,
        }
    }
}

/// Copula density tabulated on a grid of the unit square, bilinear in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCopula {
    us: Vec<f64>,
    vs: Vec<f64>,
    /// `values[j][i]` is the density at `(us[i], vs[j])`.
    values: Vec<Vec<f64>>,
}

impl TabulatedCopula {
    /// Grids must run from 0 to 1; every column must integrate to 1 within [`COPULA_MARGINAL_TOL`].
    pub fn new(us: Vec<f64>, vs: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        for g in [&us, &vs] {
            if g.len() < 2 || g[0] != 0.0 || *g.last().unwrap() != 1.0 || g.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Param("copula grid must increase strictly from 0 to 1".into()));
            }
        }
        if values.len() != vs.len() || values.iter().any(|row| row.len() != us.len()) {
            return Err(Error::Param("copula table shape does not match its grids".into()));
        }
        if values.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Param("copula density must be non-negative".into()));
        }
        let t = Self { us, vs, values };
        for (j, row) in t.values.iter().enumerate() {
            let mass = trapezoid(&t.us, row);
            if (mass - 1.0).abs() > COPULA_MARGINAL_TOL {
                return Err(Error::Param(format!(
                    "copula column at v = {} integrates to {mass}, not 1",
                    t.vs[j]
                )));
            }
        }
        Ok(t)
    }

    /// Reads `u,v,density` rows. A header line is allowed.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parsed: Option<Vec<f64>> = rec.iter().map(|s| s.parse().ok()).collect();
            match parsed {
                Some(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                _ if rows.is_empty() => continue,
                _ => return Err(Error::Config(format!("bad copula row {rec:?}"))),
            }
        }
        let mut us: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut vs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for g in [&mut us, &mut vs] {
            g.sort_by(f64::total_cmp);
            g.dedup();
        }
        let mut values = vec![vec![f64::NAN; us.len()]; vs.len()];
        for (u, v, c) in rows {
            let i = us.partition_point(|x| *x < u);
            let j = vs.partition_point(|x| *x < v);
            values[j][i] = c;
        }
        if values.iter().flatten().any(|c| c.is_nan()) {
            return Err(Error::Config("copula grid is incomplete".into()));
        }
        Self::new(us, vs, values)
    }

    fn locate(grid: &[f64], x: f64) -> (usize, f64) {
        let x = x.clamp(0.0, 1.0);
        let i = grid.partition_point(|g| *g <= x).clamp(1, grid.len() - 1) - 1;
        (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
    }

    /// Unnormalised column `c(·, v)` at the u-grid nodes.
    fn column(&self, v: f64) -> Vec<f64> {
        let (j, t) = Self::locate(&self.vs, v);
        self.values[j]
            .iter()
            .zip(&self.values[j + 1])
            .map(|(a, b)| a + t * (b - a))
            .collect()
    }

    fn column_mass(&self, v: f64) -> f64 {
        trapezoid(&self.us, &self.column(v))
    }

    pub fn density(&self, u: f64, v: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        let col = self.column(v);
        let (i, t) = Self::locate(&self.us, u);
        (col[i] + t * (col[i + 1] - col[i])) / trapezoid(&self.us, &col)
    }

    pub fn h(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let col = self.column(v);
        let (i, t) = Self::locate(&self.us, u);
        let mut acc = 0.0;
        for k in 0..i {
            acc += 0.5 * (self.us[k + 1] - self.us[k]) * (col[k] + col[k + 1]);
        }
        let h = self.us[i + 1] - self.us[i];
        let dx = t * h;
        let s = (col[i + 1] - col[i]) / h;
        acc += dx * (col[i] + 0.5 * s * dx);
        (acc / trapezoid(&self.us, &col)).clamp(0.0, 1.0)
    }

    pub fn h_inv(&self, p: f64, v: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let col = self.column(v);
        let target = p * trapezoid(&self.us, &col);
        let mut acc = 0.0;
        for k in 0..self.us.len() - 1 {
            let h = self.us[k + 1] - self.us[k];
            let seg = 0.5 * h * (col[k] + col[k + 1]);
            if acc + seg >= target || k == self.us.len() - 2 {
                let r = target - acc;
                let s = (col[k + 1] - col[k]) / h;
                let disc = (col[k] * col[k] + 2.0 * s * r).max(0.0);
                let denom = col[k] + disc.sqrt();
                let dx = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
                return (self.us[k] + dx.clamp(0.0, h)).min(1.0);
            }
            acc += seg;
        }
        1.0
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// One update: the copula used and the score `Φ⁻¹(F_{n-1}(y_n))` of the observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaStep {
    pub copula: Copula,
    pub b: f64,
}

/// The density `f_n` produced by a sequence of copula updates of `f_0`.
#[derive(Debug, Clone)]
pub struct CopulaChain {
    base: Density,
    steps: Vec<CopulaStep>,
}

impl CopulaChain {
    pub fn new(base: Density) -> Result<Self> {
        base.validate(Space::Real)?;
        if matches!(base, Density::Pmf(_) | Density::Conditioned { .. }) {
            return Err(Error::Param(format!("copula base must be a real density, not {}", base.family())));
        }
        Ok(Self { base, steps: vec![] })
    }

    pub fn from_parts(base: Density, steps: Vec<CopulaStep>) -> Result<Self> {
        let mut c = Self::new(base)?;
        c.steps = steps;
        Ok(c)
    }

    pub fn base(&self) -> &Density {
        &self.base
    }

    pub fn steps(&self) -> &[CopulaStep] {
        &self.steps
    }

    fn base_score(&self, z: f64) -> Result<f64> {
        Ok(match &self.base {
            Density::Gaussian { mean, var } => (z - mean) / var.sqrt(),
            d => std_normal_quantile(d.cdf(z)?),
        })
    }

    /// Scores `Φ⁻¹(F_j(z))` for `j = 0..n`.
    fn scores(&self, z: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut a = self.base_score(z)?;
        out.push(a);
        for s in &self.steps {
            a = s.copula.h_scores(a, s.b);
            out.push(a);
        }
        Ok(out)
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        let mut f = self.base.pdf(&Observation::Real(z))?;
        if f == 0.0 {
            return Ok(0.0);
        }
        let mut a = self.base_score(z)?;
        for s in &self.steps {
            f *= s.copula.density_scores(a, s.b);
            a = s.copula.h_scores(a, s.b);
        }
        Ok(f)
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        if z == f64::INFINITY {
            return Ok(1.0);
        }
        if z == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok(std_normal_cdf(*self.scores(z)?.last().unwrap()))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let mut a = std_normal_quantile(p);
        for s in self.steps.iter().rev() {
            a = s.copula.h_inv_scores(a, s.b);
        }
        match &self.base {
            Density::Gaussian { mean, var } => Ok(mean + var.sqrt() * a),
            d => d.quantile(std_normal_cdf(a)),
        }
    }

    /// The chain after one more observation `y` updated with `copula`.
    pub fn extend(&self, y: f64, copula: Copula) -> Result<CopulaChain> {
        let fy = self.pdf(y)?;
        if !(fy > 0.0) {
            return Err(Error::Support(format!("{y} (density {fy})")));
        }
        let b = *self.scores(y)?.last().unwrap();
        let mass = copula.column_mass(std_normal_cdf(b));
        if (mass - 1.0).abs() > DRIFT_TOL {
            return Err(Error::NumericalDrift { mass, tolerance: DRIFT_TOL });
        }
        let mut next = self.clone();
        next.steps.push(CopulaStep { copula, b });
        Ok(next)
    }
}

/// Picks `c_n` given `n` (1-based) and the observations before `y_n`.
pub type CopulaRule = Arc<dyn Fn(usize, &[f64]) -> Result<Copula> + Send + Sync>;

/// Copula sequence of an [`Hmw`] strategy.
#[derive(Clone)]
pub enum CopulaSchedule {
    /// `c_n = copulas[n - 1]`, the last entry repeating.
    Fixed(Vec<Copula>),
    /// History-dependent copulas.
    Conditional(CopulaRule),
}

impl fmt::Debug for CopulaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaSchedule::Fixed(c) => f.debug_tuple("Fixed").field(c).finish(),
            CopulaSchedule::Conditional(_) => f.write_str("Conditional(..)"),
        }
    }
}

impl CopulaSchedule {
    fn get(&self, n: usize, before: &[f64]) -> Result<Copula> {
        match self {
            CopulaSchedule::Fixed(c) => c
                .get(n - 1)
                .or(c.last())
                .cloned()
                .ok_or_else(|| Error::Param("empty copula sequence".into())),
            CopulaSchedule::Conditional(rule) => rule(n, before),
        }
    }
}

/// Strategy whose predictive densities follow the copula recursion.
#[derive(Debug, Clone)]
pub struct Hmw {
    base: CopulaChain,
    copulas: CopulaSchedule,
}

impl Hmw {
    pub fn new(f0: Density, copulas: CopulaSchedule) -> Result<Self> {
        if let CopulaSchedule::Fixed(c) = &copulas {
            if c.is_empty() {
                return Err(Error::Param("empty copula sequence".into()));
            }
        }
        Ok(Self {
            base: CopulaChain::new(f0)?,
            copulas,
        })
    }

    /// The chain after the whole history.
    pub fn chain(&self, history: &[Observation]) -> Result<CopulaChain> {
        let ys: Vec<f64> = history
            .iter()
            .map(|x| {
                x.check(Space::Real)?;
                Ok(x.as_real().unwrap())
            })
            .collect::<Result<_>>()?;
        let mut chain = self.base.clone();
        for (i, y) in ys.iter().enumerate() {
            chain = chain.extend(*y, self.copulas.get(i + 1, &ys[..i])?)?;
        }
        Ok(chain)
    }
}

impl Strategy for Hmw {
    fn family(&self) -> &str {
        "hmw"
    }

    fn space(&self) -> Space {
        Space::Real
    }

    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        let chain = self.chain(history)?;
        if chain.steps.is_empty() {
            return Measure::from_density(Space::Real, chain.base);
        }
        Measure::from_density(Space::Real, Density::Copula(Arc::new(chain)))
    }
}
