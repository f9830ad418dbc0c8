//! `verify`: runs manifest checks and compares verdicts with expectations.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Result};
use num::BigRational;
use predictive::config::{Built, StrategySpec};
use predictive::finite::{finite_dim_law, FiniteStrategy, Scalar, DEFAULT_BUDGET};
use predictive::stationary::StableAr;
use predictive::strategy::replicate_seed;
use predictive::verify::montecarlo::{
    ks_one_sample_report, ks_two_sample_report, stable_invariance_report, try_sample_seeded, CF_TOL,
};
use predictive::verify::report::{write_csv, EXACT_TOL, QUADRATURE_TOL};
use predictive::verify::{
    check_cid, check_cid_quadrature, check_exchangeability, check_stationarity, conditional_exchangeability_report,
    stop_block_report, CheckKind, EventScope, QuadratureCheck, VerificationReport,
};
use predictive::{Observation, Space};
use serde::Serialize;
use serde_json::{json, Value};

use crate::common::{config_hash, csv_writer, prepare_out, usage, write_json, LoadedSpec};
use crate::manifest::{Arithmetic, CheckEntry, Expect, LoadedManifest};

/// Default inner quadrature tolerance.
pub const INNER_TOL: f64 = 1e-8;
/// Default Monte Carlo sample sizes.
pub const KS_SAMPLES: usize = 100_000;
pub const CF_SAMPLES: usize = 1_000_000;

/// Command-line values that take precedence over the manifest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
}

/// The result of one manifest entry.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub name: String,
    pub expect: Expect,
    pub expected_residual: Option<f64>,
    pub matched: bool,
    pub error: Option<String>,
    pub note: Option<String>,
    pub report: Option<VerificationReport>,
}

struct Context<'a> {
    entry: &'a CheckEntry,
    manifest_tols: &'a BTreeMap<String, f64>,
    manifest_seed: Option<u64>,
    ov: &'a Overrides,
}

impl Context<'_> {
    /// Flag, then the entry, then the manifest table, then the default.
    fn tol(&self, name: &str, default: f64) -> f64 {
        self.ov
            .tolerances
            .get(name)
            .copied()
            .or(self.entry.tolerance)
            .or_else(|| self.manifest_tols.get(name).copied())
            .unwrap_or(default)
    }

    fn horizon(&self) -> usize {
        self.ov.horizon.unwrap_or(self.entry.horizon)
    }

    fn samples(&self, default: usize) -> usize {
        self.ov.samples.or(self.entry.samples).unwrap_or(default)
    }

    fn seed(&self) -> Result<u64> {
        self.ov
            .seed
            .or(self.entry.seed)
            .or(self.manifest_seed)
            .ok_or_else(|| usage(format!("check {}: a seed is required for stochastic checks", self.entry.name)))
    }
}

fn cats(x: &[usize]) -> Vec<Observation> {
    x.iter().map(|i| Observation::Cat(*i)).collect()
}

fn stop_rule(spec: &StrategySpec) -> Result<predictive::cid::StopRule> {
    match spec {
        StrategySpec::ChangePoint { stop, .. } => Ok(stop.clone()),
        _ => Err(usage("conditional_exchangeability needs a change_point strategy")),
    }
}

fn stable_ar(spec: &StrategySpec) -> Result<StableAr> {
    match spec {
        StrategySpec::StableAr { gamma, a, b, c } => Ok(StableAr::new(*gamma, *a, *b, *c)?),
        _ => Err(usage("this check needs a stable_ar strategy")),
    }
}

fn finite_report<T: Scalar>(
    s: &dyn FiniteStrategy<T>,
    cx: &Context,
    family: &str,
    spec: &StrategySpec,
) -> Result<VerificationReport> {
    let (h, tol) = (cx.horizon(), cx.tol("exact", EXACT_TOL));
    Ok(match cx.entry.kind {
        CheckKind::Exchangeability => check_exchangeability(s, family, h, tol)?,
        CheckKind::Stationarity => check_stationarity(s, family, h, tol)?,
        CheckKind::Cid => {
            let scope = if cx.entry.powerset { EventScope::Powerset } else { EventScope::Singletons };
            check_cid(s, family, h, scope, tol)?
        }
        CheckKind::ConditionalExchangeability => {
            let stop = stop_rule(spec)?;
            let law = finite_dim_law(s, h, DEFAULT_BUDGET)?;
            let index = |x: &[usize]| stop.stop_index(&cats(x));
            if cx.entry.blocks {
                stop_block_report(&law, index, family, tol)
            } else {
                conditional_exchangeability_report(&law, index, family, tol)
            }
        }
        other => unreachable!("{other:?} is not an enumeration check"),
    })
}

/// Parses a history given as numbers, symbol indices or `[x, z]` pairs.
pub fn parse_history(values: &[Value], space: Space) -> Result<Vec<Observation>> {
    values
        .iter()
        .map(|v| {
            let obs = match (space, v) {
                (Space::Categorical(_), Value::Number(n)) => n.as_u64().map(|i| Observation::Cat(i as usize)),
                (Space::Real, Value::Number(n)) => n.as_f64().map(Observation::Real),
                (Space::RealPair, Value::Array(p)) if p.len() == 2 => {
                    p[0].as_f64().zip(p[1].as_f64()).map(|(x, z)| Observation::Pair(x, z))
                }
                _ => None,
            };
            let obs = obs.ok_or_else(|| usage(format!("history entry {v} is not a point of {space}")))?;
            obs.check(space).map_err(|e| usage(e.to_string()))?;
            Ok(obs)
        })
        .collect()
}

/// The real coordinate compared by the sampling checks.
fn coordinate(x: &Observation) -> f64 {
    match x {
        Observation::Cat(i) => *i as f64,
        Observation::Real(v) => *v,
        Observation::Pair(v, _) => *v,
    }
}

/// `X_{n+1}` against `X_{n+2}` given the history, from independent streams.
fn two_sample(built: &Built, cx: &Context) -> Result<VerificationReport> {
    let s = built.strategy.as_ref();
    let history = parse_history(&cx.entry.history, s.space())?;
    let (n, seed) = (cx.samples(KS_SAMPLES), cx.seed()?);
    let now = s.predictive(&history)?;
    let next = try_sample_seeded(n, seed, |rng| Ok(coordinate(&now.sample(rng)?)))?;
    let after = try_sample_seeded(n, replicate_seed(seed, u64::MAX), |rng| {
        let mut ext = history.clone();
        ext.push(now.sample(rng)?);
        Ok(coordinate(&s.predictive(&ext)?.sample(rng)?))
    })?;
    Ok(ks_two_sample_report(&built.family, history.len() + 2, &next, &after, seed)?)
}

/// `X_1` against the stationary law of a stable autoregression.
fn one_sample(built: &Built, spec: &StrategySpec, cx: &Context) -> Result<VerificationReport> {
    let nu = stable_ar(spec)?.stationary();
    let (n, seed) = (cx.samples(KS_SAMPLES), cx.seed()?);
    let first = built.strategy.predictive(&[])?;
    let xs = try_sample_seeded(n, seed, |rng: &mut _| Ok(coordinate(&first.sample(rng)?)))?;
    let failed = Cell::new(None);
    let rep = ks_one_sample_report(
        &built.family,
        &xs,
        |x| {
            nu.cdf(x).unwrap_or_else(|e| {
                failed.set(Some(e.to_string()));
                f64::NAN
            })
        },
        seed,
    )?;
    match failed.into_inner() {
        Some(e) => Err(anyhow!(e)),
        None => Ok(rep),
    }
}

/// Runs one entry; the report's tolerance is the one actually used.
pub fn run_entry(entry: &CheckEntry, root: &Path, lm: &LoadedManifest, ov: &Overrides) -> Result<VerificationReport> {
    let spec = entry.load_strategy(root)?;
    let built = spec.build()?;
    let cx = Context {
        entry,
        manifest_tols: &lm.manifest.tolerances,
        manifest_seed: lm.manifest.seed,
        ov,
    };
    match entry.kind {
        CheckKind::Exchangeability | CheckKind::Stationarity | CheckKind::Cid | CheckKind::ConditionalExchangeability => {
            let exact: Option<&dyn FiniteStrategy<BigRational>> = match entry.arithmetic {
                Arithmetic::Float => None,
                Arithmetic::Auto => built.exact.as_deref(),
                Arithmetic::Exact => Some(built.exact.as_deref().ok_or_else(|| {
                    usage(format!("check {}: no exact form (give every number as text)", entry.name))
                })?),
            };
            if let Some(s) = exact {
                return finite_report(s, &cx, &built.family, &spec.spec);
            }
            let s = built
                .finite
                .as_deref()
                .ok_or_else(|| usage(format!("check {}: {} is not categorical", entry.name, built.family)))?;
            finite_report(s, &cx, &built.family, &spec.spec)
        }
        CheckKind::CidQuadrature => {
            let cfg = QuadratureCheck {
                horizon: cx.horizon(),
                histories: entry.histories.unwrap_or(4),
                inner_tol: cx.tol("inner", INNER_TOL),
                tol: cx.tol("quadrature", QUADRATURE_TOL),
                seed: cx.seed()?,
                ..QuadratureCheck::default()
            };
            Ok(check_cid_quadrature(built.strategy.as_ref(), &cfg)?)
        }
        CheckKind::McTwoSample => two_sample(&built, &cx),
        CheckKind::McOneSample => one_sample(&built, &spec.spec, &cx),
        CheckKind::CfDistance => {
            let ar = stable_ar(&spec.spec)?;
            let grid: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
            Ok(stable_invariance_report(&ar, cx.samples(CF_SAMPLES), &grid, cx.seed()?, cx.tol("cf", CF_TOL)))
        }
    }
}

fn judge(entry: &CheckEntry, rep: &VerificationReport) -> bool {
    let verdict_ok = rep.passed() == (entry.expect == Expect::Pass);
    let residual_ok = match entry.residual {
        Some(r) => (rep.residual - r).abs() <= entry.residual_tol,
        None => true,
    };
    verdict_ok && residual_ok
}

/// Usage errors abort the run; runtime errors are recorded against their check.
pub fn run_manifest(lm: &LoadedManifest, ov: &Overrides) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for entry in &lm.manifest.checks {
        let (report, error) = match run_entry(entry, &lm.root, lm, ov) {
            Ok(r) => (Some(r), None),
            Err(e) if e.is::<crate::common::Usage>() => return Err(e),
            Err(e) => (None, Some(format!("{e:#}"))),
        };
        out.push(Outcome {
            name: entry.name.clone(),
            expect: entry.expect,
            expected_residual: entry.residual,
            matched: report.as_ref().is_some_and(|r| judge(entry, r)),
            error,
            note: entry.note.clone(),
            report,
        });
    }
    Ok(out)
}

/// One line per outcome, for the terminal.
pub fn outcome_line(o: &Outcome) -> String {
    let status = if o.matched { "ok" } else { "MISMATCH" };
    match (&o.report, &o.error) {
        (Some(r), _) => format!(
            "{status:<8} {}: {} {} horizon {} residual {:e} tolerance {:e} -> {} (expected {})",
            o.name,
            r.check_kind.name(),
            r.family,
            r.horizon,
            r.residual,
            r.tolerance,
            r.verdict.name(),
            o.expect.name()
        ),
        (None, Some(e)) => format!("{status:<8} {}: error: {e}", o.name),
        (None, None) => format!("{status:<8} {}", o.name),
    }
}

#[derive(Serialize)]
struct VerifyConfig<'a> {
    command: &'static str,
    manifest: Value,
    overrides: &'a Overrides,
}

/// Runs the manifest and writes `verify.json` and `verify.csv` under `out`.
pub fn run(lm: &LoadedManifest, ov: &Overrides, out: Option<&Path>) -> Result<(Vec<Outcome>, Value)> {
    if let Some(dir) = out {
        prepare_out(dir)?;
    }
    let outcomes = run_manifest(lm, ov)?;
    let config = VerifyConfig {
        command: "verify",
        manifest: serde_json::to_value(&lm.manifest)?,
        overrides: ov,
    };
    let hash = config_hash(&config);
    let seed = ov.seed.or(lm.manifest.seed);
    let doc = json!({
        "config_hash": hash,
        "seed": seed,
        "manifest": lm.manifest.name,
        "all_matched": outcomes.iter().all(|o| o.matched),
        "checks": outcomes,
    });
    if let Some(dir) = out {
        write_json(&dir.join("verify.json"), &doc)?;
        let reports: Vec<VerificationReport> = outcomes.iter().filter_map(|o| o.report.clone()).collect();
        let mut buf = Vec::new();
        write_csv(&reports, &mut buf)?;
        let mut w = csv_writer(&dir.join("verify.csv"), &hash, seed)?;
        let mut rows = csv::Reader::from_reader(buf.as_slice());
        let mut header: Vec<String> = vec!["name".into()];
        header.extend(rows.headers()?.iter().map(String::from));
        header.extend(["expect".into(), "matched".into()]);
        w.write_record(&header)?;
        let named = outcomes.iter().filter(|o| o.report.is_some());
        for (o, row) in named.zip(rows.records()) {
            let mut rec: Vec<String> = vec![o.name.clone()];
            rec.extend(row?.iter().map(String::from));
            rec.extend([o.expect.name().to_string(), o.matched.to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok((outcomes, doc))
}

/// A one-strategy manifest built from `--strategy` and `--check` flags.
pub fn ad_hoc(spec: &LoadedSpec, kinds: &[CheckKind], horizon: usize, expect: Expect) -> Result<LoadedManifest> {
    let built = spec.build()?;
    let kinds: Vec<CheckKind> = if kinds.is_empty() {
        match built.strategy.space() {
            Space::Categorical(_) => vec![CheckKind::Exchangeability, CheckKind::Cid, CheckKind::Stationarity],
            Space::Real => vec![CheckKind::CidQuadrature],
            Space::RealPair => return Err(usage("give --check for strategies on pairs")),
        }
    } else {
        kinds.to_vec()
    };
    let checks = kinds
        .into_iter()
        .map(|kind| CheckEntry {
            name: format!("{}_{}", built.family, kind.name()),
            kind,
            strategy: Some(spec.value()),
            strategy_file: None,
            horizon,
            expect,
            residual: None,
            residual_tol: 1e-12,
            tolerance: None,
            arithmetic: Arithmetic::Auto,
            powerset: false,
            blocks: false,
            seed: None,
            samples: None,
            histories: None,
            history: Vec::new(),
            note: None,
        })
        .collect();
    Ok(LoadedManifest {
        manifest: crate::manifest::Manifest {
            name: Some("command line".into()),
            seed: None,
            tolerances: BTreeMap::new(),
            checks,
        },
        root: spec.root.clone(),
    })
}
