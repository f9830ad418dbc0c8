//! Verification manifests: a list of checks, each with a strategy and the
//! verdict it is expected to produce.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use predictive::verify::CheckKind;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::common::{usage, LoadedSpec};

pub const THEOREMS: &str = include_str!("../manifests/theorems.toml");
pub const COUNTEREXAMPLES: &str = include_str!("../manifests/counterexamples.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

impl Expect {
    pub fn name(self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
        }
    }
}

/// Which arithmetic an exact check runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    /// Rational when the spec has an exact form, `f64` otherwise.
    #[default]
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub name: String,
    pub kind: CheckKind,
    #[serde(default)]
    pub strategy: Option<Value>,
    #[serde(default)]
    pub strategy_file: Option<PathBuf>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub expect: Expect,
    /// Expected residual, matched within `residual_tol`.
    #[serde(default)]
    pub residual: Option<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    /// Check every event instead of singletons (c.i.d. only).
    #[serde(default)]
    pub powerset: bool,
    /// Conditional exchangeability per stopping block `{T = j + 1}` instead of
    /// given `{T > n}`.
    #[serde(default)]
    pub blocks: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Sample size of Monte Carlo checks.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Sampled histories per length for quadrature checks.
    #[serde(default)]
    pub histories: Option<usize>,
    /// Conditioning history for two-sample checks.
    #[serde(default)]
    pub history: Vec<Value>,
    #[serde(default)]
    pub note: Option<String>,
}

fn default_horizon() -> usize {
    3
}

fn default_residual_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, rename = "check")]
    pub checks: Vec<CheckEntry>,
}

/// A manifest with the directory its strategy files resolve against.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub root: PathBuf,
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let m: Manifest = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| usage(format!("manifest: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| usage(format!("manifest: {e}")))?
    };
    for name in m.tolerances.keys() {
        crate::common::parse_tolerances(&[format!("{name}=0")])?;
    }
    Ok(m)
}

/// `builtin:theorems`, `builtin:counterexamples`, or a TOML/JSON file.
pub fn load_manifest(arg: &str) -> Result<LoadedManifest> {
    let (text, root) = match arg {
        "builtin:theorems" => (THEOREMS.to_string(), PathBuf::from(".")),
        "builtin:counterexamples" => (COUNTEREXAMPLES.to_string(), PathBuf::from(".")),
        _ if arg.starts_with("builtin:") => {
            return Err(usage(format!("unknown builtin manifest {arg}; expected builtin:theorems or builtin:counterexamples")))
        }
        _ => {
            let path = Path::new(arg);
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read manifest {arg}: {e}")))?;
            (text, path.parent().map(Path::to_path_buf).unwrap_or_default())
        }
    };
    Ok(LoadedManifest {
        manifest: parse_manifest(&text)?,
        root,
    })
}

impl CheckEntry {
    pub fn load_strategy(&self, root: &Path) -> Result<LoadedSpec> {
        match (&self.strategy, &self.strategy_file) {
            (Some(v), None) => LoadedSpec::from_value(v.clone(), root),
            (None, Some(p)) => LoadedSpec::from_arg(root.join(p).to_str().unwrap_or_default()),
            _ => Err(usage(format!("check {}: give exactly one of strategy and strategy_file", self.name))),
        }
    }
}
