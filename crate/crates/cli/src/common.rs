//! Strategy loading, provenance, tolerances and output files shared by the
//! subcommands.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use predictive::config::{parse_spec, spec_from_value, Built, StrategySpec};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// An error in the invocation or the configuration; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// A parsed spec with the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: StrategySpec,
    pub root: PathBuf,
}

impl LoadedSpec {
    /// Reads `arg` as a file when one exists at that path, otherwise as inline
    /// JSON or TOML.
    pub fn from_arg(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec = parse_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
            return Ok(Self { spec, root });
        }
        if !arg.contains("family") {
            return Err(usage(format!("no strategy file at {arg} (inline specs need a \"family\" key)")));
        }
        let spec = parse_spec(arg).map_err(|e| usage(e.to_string()))?;
        Ok(Self {
            spec,
            root: PathBuf::from("."),
        })
    }

    pub fn from_value(value: Value, root: &Path) -> Result<Self> {
        let spec = spec_from_value(value).map_err(|e| usage(e.to_string()))?;
        Ok(Self {
            spec,
            root: root.to_path_buf(),
        })
    }

    /// Parameter errors are configuration errors.
    pub fn build(&self) -> Result<Built> {
        self.spec
            .build(&self.root)
            .map_err(|e| usage(format!("{}: {e}", self.spec.family())))
    }

    pub fn value(&self) -> Value {
        serde_json::to_value(&self.spec).expect("specs serialize")
    }
}

/// SHA-256 of the canonical JSON form of `config` (object keys sorted).
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_value(config).expect("configs serialize").to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Named tolerance overrides given as `name=value`.
pub const TOLERANCE_NAMES: [&str; 4] = ["exact", "quadrature", "cf", "inner"];

pub fn parse_tolerances(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("tolerance \"{item}\" is not name=value")))?;
        let name = name.trim();
        if !TOLERANCE_NAMES.contains(&name) {
            return Err(usage(format!(
                "unknown tolerance \"{name}\"; expected one of {}",
                TOLERANCE_NAMES.join(", ")
            )));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("tolerance {name}: \"{value}\" is not a number")))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(usage(format!("tolerance {name} must be finite and non-negative")));
        }
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

/// Creates the output directory and checks that it is writable.
pub fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| usage(format!("{} is not writable: {e}", dir.display())))?;
    fs::remove_file(&probe).ok();
    Ok(())
}

/// The first line of every CSV written: `# config_hash=<hex> seed=<seed>`.
pub fn provenance_line(hash: &str, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# config_hash={hash} seed={s}\n"),
        None => format!("# config_hash={hash} seed=none\n"),
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// A CSV writer that starts with the provenance line.
pub fn csv_writer(path: &Path, hash: &str, seed: Option<u64>) -> Result<csv::Writer<fs::File>> {
    fs::write(path, provenance_line(hash, seed)).with_context(|| format!("writing {}", path.display()))?;
    let file = fs::OpenOptions::new().append(true).open(path)?;
    Ok(csv::Writer::from_writer(file))
}
