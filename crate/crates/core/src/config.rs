//! Strategy specifications, written in JSON or TOML.
//!
//! A spec is an object tagged by `"family"`. Numbers may be given as strings
//! such as `"1/3"` or `"0.25"`; when every number of a finite family is a
//! string, an exact rational form is built next to the `f64` one.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cid::{
    Adversarial, ChangePoint, Copula, CopulaSchedule, Covariate, ExpSmoothing, Hmw, PostMode, QSchedule, RecursiveUpdate,
    StopRule, TabulatedCopula,
};
use crate::error::{Error, Result};
use crate::exch::{Dirichlet, FiniteDirichlet, Species, SpeciesRule, Urn};
use crate::finite::{parse_rational, AsStrategy, Categorical, FiniteStrategy, Scalar};
use crate::measure::json::{from_value as measure_from_value, parse_density};
use crate::measure::{Kernel, KernelRule, Measure, Space};
use crate::stationary::{CyclicMarkov, CyclicMarkovGrid, StableAr};
use crate::strategy::Strategy;

/// Every family name accepted in a spec.
pub const FAMILIES: [&str; 13] = [
    "dirichlet",
    "kernel_dirichlet",
    "species_pd",
    "species_gnedin",
    "urn",
    "exp_smoothing",
    "recursive_update",
    "hmw",
    "change_point",
    "covariate",
    "stable_ar",
    "cyclic_markov",
    "adversarial",
];

/// A number given as a float or as exact text (`"p/q"` or a decimal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => {
                let x = parse_rational(s)?.to_f64_lossy();
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::Config(format!("not a finite number: {s}")))
                }
            }
        }
    }

    /// The exact value, only for text input.
    pub fn to_rational(&self) -> Option<Result<BigRational>> {
        match self {
            Number::Float(_) => None,
            Number::Text(s) => Some(parse_rational(s)),
        }
    }
}

fn floats(xs: &[Number]) -> Result<Vec<f64>> {
    xs.iter().map(Number::to_f64).collect()
}

/// Exact values when every entry is text.
fn rationals(xs: &[&Number]) -> Result<Option<Vec<BigRational>>> {
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        match x.to_rational() {
            None => return Ok(None),
            Some(r) => out.push(r?),
        }
    }
    Ok(Some(out))
}

/// Base measure of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseSpec {
    /// Masses on `{0, .., alphabet-1}`; uniform when `weights` is absent.
    Finite {
        alphabet: usize,
        #[serde(default)]
        weights: Option<Vec<Number>>,
    },
    /// A density on the real line, as `{"family", "params"}`.
    Density { density: Value },
    /// A full measure in the JSON measure format.
    Measure(Value),
}

impl BaseSpec {
    pub fn measure(&self) -> Result<Measure> {
        match self {
            BaseSpec::Finite { alphabet, weights: None } => Measure::uniform(*alphabet),
            BaseSpec::Finite { alphabet, weights: Some(w) } => {
                if w.len() != *alphabet {
                    return Err(Error::Config(format!("{} weights for an alphabet of {alphabet}", w.len())));
                }
                Measure::pmf(floats(w)?)
            }
            BaseSpec::Density { density } => Measure::from_density(Space::Real, parse_density(density)?),
            BaseSpec::Measure(v) => measure_from_value(v),
        }
    }

    /// Exact base weights of a finite base given in text, or uniform.
    fn exact_weights(&self) -> Result<Option<Vec<BigRational>>> {
        match self {
            BaseSpec::Finite { alphabet, weights: None } => {
                Ok(Some(vec![BigRational::new(1.into(), (*alphabet).into()); *alphabet]))
            }
            BaseSpec::Finite { weights: Some(w), .. } => rationals(&w.iter().collect::<Vec<_>>()),
            _ => Ok(None),
        }
    }
}

/// Copula of an HMW step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaSpec {
    Independence,
    Gaussian { rho: f64 },
    /// `u,v,density` rows on a grid of the unit square.
    TabulatedCsv { path: PathBuf },
}

impl CopulaSpec {
    fn build(&self, root: &Path) -> Result<Copula> {
        match self {
            CopulaSpec::Independence => Ok(Copula::Independence),
            CopulaSpec::Gaussian { rho } => Copula::gaussian(*rho),
            CopulaSpec::TabulatedCsv { path } => Ok(Copula::Tabulated(Arc::new(TabulatedCopula::from_csv(&root.join(path))?))),
        }
    }
}

fn delta() -> PostMode {
    PostMode::Delta
}

/// A strategy family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StrategySpec {
    Dirichlet {
        c: Number,
        base: BaseSpec,
    },
    KernelDirichlet {
        c: Number,
        base: BaseSpec,
        kernel: KernelRule,
    },
    SpeciesPd {
        b: f64,
        c: f64,
        base: BaseSpec,
    },
    SpeciesGnedin {
        b: f64,
        c: f64,
        base: BaseSpec,
    },
    Urn {
        counts: Vec<Number>,
        cells: Vec<Vec<usize>>,
    },
    ExpSmoothing {
        q: f64,
        base: BaseSpec,
    },
    RecursiveUpdate {
        base: BaseSpec,
        q: QSchedule,
        kernels: Vec<KernelRule>,
    },
    Hmw {
        f0: Value,
        copulas: Vec<CopulaSpec>,
    },
    ChangePoint {
        beta: Box<StrategySpec>,
        stop: StopRule,
        q: QSchedule,
        #[serde(default = "delta")]
        post: PostMode,
    },
    Covariate {
        #[serde(default)]
        b: Option<Vec<f64>>,
        #[serde(default)]
        geometric: Option<usize>,
    },
    StableAr {
        gamma: f64,
        #[serde(default)]
        a: f64,
        b: f64,
        c: f64,
    },
    /// `h` on `alphabet^n` (or `grid^n` when a grid is given), inline or from a CSV file.
    CyclicMarkov {
        #[serde(default)]
        alphabet: Option<usize>,
        #[serde(default)]
        grid: Option<Vec<f64>>,
        n: usize,
        #[serde(default)]
        h: Option<Vec<Number>>,
        #[serde(default)]
        h_csv: Option<PathBuf>,
    },
    Adversarial {
        base: BaseSpec,
    },
}

/// A built strategy with its finite forms where available.
#[derive(Clone)]
pub struct Built {
    pub family: String,
    pub strategy: Arc<dyn Strategy>,
    /// `f64` predictive masses, for categorical spaces.
    pub finite: Option<Arc<dyn FiniteStrategy<f64>>>,
    /// Exact rational form, when every number of the spec is text.
    pub exact: Option<Arc<dyn FiniteStrategy<BigRational>>>,
}

impl std::fmt::Debug for Built {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Built")
            .field("family", &self.family)
            .field("finite", &self.finite.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Parses a spec from JSON (text starting with `{`) or TOML.
pub fn parse_spec(text: &str) -> Result<StrategySpec> {
    let value: Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("json: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| Error::Config(format!("toml: {e}")))?
    };
    spec_from_value(value)
}

/// Checks the family name before decoding, so that errors name it.
pub fn spec_from_value(value: Value) -> Result<StrategySpec> {
    let family = value
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("strategy spec needs a \"family\" string".into()))?;
    if !FAMILIES.contains(&family) {
        return Err(Error::Config(format!("unknown family \"{family}\"; expected one of {}", FAMILIES.join(", "))));
    }
    let family = family.to_string();
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{family}: {e}")))
}

/// Reads a spec file; the format follows the extension (`.toml` or JSON).
pub fn read_spec(path: &Path) -> Result<StrategySpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text)
}

/// Reads every numeric field of a CSV file, row by row, as exact text.
pub fn read_number_csv(path: &Path) -> Result<Vec<Number>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        for field in rec.iter().filter(|f| !f.is_empty()) {
            if parse_rational(field).is_err() {
                if out.is_empty() {
                    // Header row.
                    break;
                }
                return Err(Error::Config(format!("not a number in {}: {field}", path.display())));
            }
            out.push(Number::Text(field.to_string()));
        }
    }
    Ok(out)
}

fn categorical(strategy: Arc<dyn Strategy>) -> Option<Arc<dyn FiniteStrategy<f64>>> {
    matches!(strategy.space(), Space::Categorical(_)).then(|| Arc::new(Categorical(strategy)) as Arc<dyn FiniteStrategy<f64>>)
}

impl StrategySpec {
    pub fn family(&self) -> &'static str {
        match self {
            StrategySpec::Dirichlet { .. } => "dirichlet",
            StrategySpec::KernelDirichlet { .. } => "kernel_dirichlet",
            StrategySpec::SpeciesPd { .. } => "species_pd",
            StrategySpec::SpeciesGnedin { .. } => "species_gnedin",
            StrategySpec::Urn { .. } => "urn",
            StrategySpec::ExpSmoothing { .. } => "exp_smoothing",
            StrategySpec::RecursiveUpdate { .. } => "recursive_update",
            StrategySpec::Hmw { .. } => "hmw",
            StrategySpec::ChangePoint { .. } => "change_point",
            StrategySpec::Covariate { .. } => "covariate",
            StrategySpec::StableAr { .. } => "stable_ar",
            StrategySpec::CyclicMarkov { .. } => "cyclic_markov",
            StrategySpec::Adversarial { .. } => "adversarial",
        }
    }

    /// Builds the strategy; relative file paths resolve against `root`.
    pub fn build(&self, root: &Path) -> Result<Built> {
        let family = self.family().to_string();
        let plain = |strategy: Arc<dyn Strategy>| Built {
            family: family.clone(),
            finite: categorical(strategy.clone()),
            strategy,
            exact: None,
        };
        Ok(match self {
            StrategySpec::Dirichlet { c, base } => self.dirichlet(c, base, KernelRule::Identity)?,
            StrategySpec::KernelDirichlet { c, base, kernel } => self.dirichlet(c, base, kernel.clone())?,
            StrategySpec::SpeciesPd { b, c, base } => plain(Arc::new(Species::new(
                SpeciesRule::PoissonDirichlet { b: *b, c: *c },
                base.measure()?,
            )?)),
            StrategySpec::SpeciesGnedin { b, c, base } => {
                plain(Arc::new(Species::new(SpeciesRule::Gnedin { b: *b, c: *c }, base.measure()?)?))
            }
            StrategySpec::Urn { counts, cells } => {
                let urn = Arc::new(Urn::new(floats(counts)?, cells.clone())?);
                let exact = match rationals(&counts.iter().collect::<Vec<_>>())? {
                    Some(r) => Some(Arc::new(Urn::new(r, cells.clone())?) as Arc<dyn FiniteStrategy<BigRational>>),
                    None => None,
                };
                Built {
                    family: family.clone(),
                    strategy: Arc::new(AsStrategy::new(urn.clone(), "urn")),
                    finite: Some(urn),
                    exact,
                }
            }
            StrategySpec::ExpSmoothing { q, base } => plain(Arc::new(ExpSmoothing::new(*q, base.measure()?)?)),
            StrategySpec::RecursiveUpdate { base, q, kernels } => {
                let nu = base.measure()?;
                let kernels = kernels
                    .iter()
                    .map(|r| Kernel::new(r.clone(), nu.clone()))
                    .collect::<Result<Vec<_>>>()?;
                plain(Arc::new(RecursiveUpdate::new(nu, q.clone(), kernels)?))
            }
            StrategySpec::Hmw { f0, copulas } => {
                let copulas = copulas.iter().map(|c| c.build(root)).collect::<Result<Vec<_>>>()?;
                plain(Arc::new(Hmw::new(parse_density(f0)?, CopulaSchedule::Fixed(copulas))?))
            }
            StrategySpec::ChangePoint { beta, stop, q, post } => {
                let beta = beta.build(root)?;
                plain(Arc::new(ChangePoint::new(beta.strategy, stop.clone(), q.clone(), post.clone())?))
            }
            StrategySpec::Covariate { b, geometric } => plain(Arc::new(match (b, geometric) {
                (Some(b), None) => Covariate::new(b.clone())?,
                (None, Some(n)) => Covariate::geometric(*n)?,
                _ => return Err(Error::Config("covariate needs exactly one of \"b\" and \"geometric\"".into())),
            })),
            StrategySpec::StableAr { gamma, a, b, c } => plain(Arc::new(StableAr::new(*gamma, *a, *b, *c)?)),
            StrategySpec::CyclicMarkov {
                alphabet,
                grid,
                n,
                h,
                h_csv,
            } => {
                let h = match (h, h_csv) {
                    (Some(h), None) => h.clone(),
                    (None, Some(p)) => read_number_csv(&root.join(p))?,
                    _ => return Err(Error::Config("cyclic_markov needs exactly one of \"h\" and \"h_csv\"".into())),
                };
                match (alphabet, grid) {
                    (Some(k), None) => {
                        let m = Arc::new(CyclicMarkov::new(floats(&h)?, *k, *n)?);
                        let exact = match rationals(&h.iter().collect::<Vec<_>>())? {
                            Some(r) => Some(Arc::new(CyclicMarkov::new(r, *k, *n)?) as Arc<dyn FiniteStrategy<BigRational>>),
                            None => None,
                        };
                        Built {
                            family: family.clone(),
                            strategy: Arc::new(AsStrategy::new(m.clone(), "cyclic_markov")),
                            finite: Some(m),
                            exact,
                        }
                    }
                    (None, Some(g)) => plain(Arc::new(CyclicMarkovGrid::new(g.clone(), floats(&h)?, *n)?)),
                    _ => return Err(Error::Config("cyclic_markov needs exactly one of \"alphabet\" and \"grid\"".into())),
                }
            }
            StrategySpec::Adversarial { base } => plain(Arc::new(Adversarial::new(base.measure()?))),
        })
    }

    fn dirichlet(&self, c: &Number, base: &BaseSpec, rule: KernelRule) -> Result<Built> {
        let nu = base.measure()?;
        let family = self.family().to_string();
        let strategy: Arc<dyn Strategy> = Arc::new(Dirichlet::new(c.to_f64()?, Kernel::new(rule.clone(), nu.clone())?)?);
        let exact = match (c.to_rational(), base.exact_weights()?) {
            (Some(c), Some(w)) => Some(Arc::new(FiniteDirichlet::new(c?, w, rule)?) as Arc<dyn FiniteStrategy<BigRational>>),
            _ => None,
        };
        Ok(Built {
            family,
            finite: categorical(strategy.clone()),
            strategy,
            exact,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{finite_dim_law, DEFAULT_BUDGET};
    use crate::measure::Observation;

    fn build(text: &str) -> Result<Built> {
        parse_spec(text)?.build(Path::new("."))
    }

    #[test]
    fn json_and_toml_agree() {
        let a = parse_spec(r#"{"family": "dirichlet", "c": 1, "base": {"alphabet": 2}}"#).unwrap();
        let b = parse_spec("family = \"dirichlet\"\nc = 1\nbase = { alphabet = 2 }\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_family_is_named() {
        let err = parse_spec(r#"{"family": "dirichlett"}"#).unwrap_err();
        assert!(err.to_string().contains("dirichlett"), "{err}");
        assert!(parse_spec(r#"{"c": 1}"#).is_err());
        assert!(parse_spec("not [valid").is_err());
    }

    #[test]
    fn text_numbers_give_exact_forms() {
        let b = build(r#"{"family": "dirichlet", "c": "1", "base": {"alphabet": 2, "weights": ["1/2", "1/2"]}}"#).unwrap();
        let law = finite_dim_law(b.exact.as_ref().unwrap(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(law.table(2)[1], BigRational::new(1.into(), 8.into()));
        let f = build(r#"{"family": "dirichlet", "c": 1.0, "base": {"alphabet": 2}}"#).unwrap();
        // A uniform base is exact, the float concentration is not.
        assert!(f.exact.is_none());
        assert_eq!(f.finite.unwrap().predictive_pmf(&[0]).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn every_family_builds() {
        let specs = [
            r#"{"family": "kernel_dirichlet", "c": "1", "base": {"alphabet": 3}, "kernel": {"partition": {"cells": [[0, 1], [2]]}}}"#,
            r#"{"family": "species_pd", "b": 0.5, "c": 1, "base": {"density": {"family": "gaussian", "params": {"mean": 0, "var": 1}}}}"#,
            r#"{"family": "species_gnedin", "b": 1, "c": 1, "base": {"density": {"family": "gaussian", "params": {"mean": 0, "var": 1}}}}"#,
            r#"{"family": "urn", "counts": ["1", "1", "2"], "cells": [[0, 1], [2]]}"#,
            r#"{"family": "exp_smoothing", "q": 0.5, "base": {"alphabet": 2}}"#,
            r#"{"family": "recursive_update", "base": {"alphabet": 4}, "q": {"form": "dirichlet", "c": 1}, "kernels": [{"partition": {"cells": [[0, 1], [2, 3]]}}, "identity"]}"#,
            r#"{"family": "hmw", "f0": {"family": "gaussian", "params": {"mean": 0, "var": 1}}, "copulas": [{"family": "gaussian", "rho": 0.5}]}"#,
            r#"{"family": "change_point", "beta": {"family": "dirichlet", "c": 1, "base": {"alphabet": 2}}, "stop": {"rule": "first_count", "set": {"symbols": [1]}, "count": 1}, "q": {"form": "constant", "q": 0.5}}"#,
            r#"{"family": "covariate", "geometric": 6}"#,
            r#"{"family": "stable_ar", "gamma": 1.5, "b": 1, "c": 0.5}"#,
            r#"{"family": "cyclic_markov", "alphabet": 2, "n": 2, "h": ["0.1", "0.2", "0.3", "0.4"]}"#,
            r#"{"family": "cyclic_markov", "grid": [0, 1], "n": 2, "h": [1, 1, 1, 1]}"#,
            r#"{"family": "adversarial", "base": {"alphabet": 2}}"#,
        ];
        for s in specs {
            let b = build(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            let h: &[Observation] = &[];
            b.strategy.predictive(h).unwrap();
        }
        let urn = build(specs[3]).unwrap();
        assert!(urn.exact.is_some() && urn.finite.is_some());
    }

    #[test]
    fn bad_parameters_fail_to_build() {
        assert!(build(r#"{"family": "exp_smoothing", "q": 1.5, "base": {"alphabet": 2}}"#).is_err());
        assert!(build(r#"{"family": "covariate"}"#).is_err());
        assert!(build(r#"{"family": "dirichlet", "c": "1/0", "base": {"alphabet": 2}}"#).is_err());
    }

    #[test]
    fn h_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("h.csv"), "value\n0.1\n0.2\n0.3\n0.4\n").unwrap();
        let b = parse_spec(r#"{"family": "cyclic_markov", "alphabet": 2, "n": 2, "h_csv": "h.csv"}"#)
            .unwrap()
            .build(dir.path())
            .unwrap();
        let exact = b.exact.unwrap();
        let law = finite_dim_law(&exact, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(law.table(1)[0], BigRational::new(7.into(), 20.into()));
    }
}
