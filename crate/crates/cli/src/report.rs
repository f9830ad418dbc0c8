//! `report`: collects the JSON outputs of earlier runs into one table.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::common::{config_hash, csv_writer, prepare_out, usage};

const OUTPUT_FILES: [&str; 3] = ["verify.json", "summary.json", "law.json"];

/// A flat row of the combined table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub source: String,
    pub kind: String,
    pub name: String,
    pub family: String,
    pub horizon: String,
    pub value: String,
    pub status: String,
    pub config_hash: String,
}

fn text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Output files named on the command line, directories expanded.
fn inputs(args: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for a in args {
        if a.is_dir() {
            let found: Vec<PathBuf> = OUTPUT_FILES.iter().map(|f| a.join(f)).filter(|p| p.is_file()).collect();
            if found.is_empty() {
                return Err(usage(format!("{} holds no {}", a.display(), OUTPUT_FILES.join(", "))));
            }
            out.extend(found);
        } else if a.is_file() {
            out.push(a.clone());
        } else {
            return Err(usage(format!("no such file or directory: {}", a.display())));
        }
    }
    Ok(out)
}

/// Rows of one output document, by its shape.
pub fn rows_of(source: &str, doc: &Value) -> Result<Vec<Row>> {
    let hash = text(&doc["config_hash"]);
    let row = |kind: &str, name: String, family: &Value, horizon: &Value, value: String, status: &str| Row {
        source: source.to_string(),
        kind: kind.to_string(),
        name,
        family: text(family),
        horizon: text(horizon),
        value,
        status: status.to_string(),
        config_hash: hash.clone(),
    };
    if let Some(checks) = doc["checks"].as_array() {
        return Ok(checks
            .iter()
            .map(|c| {
                let r = &c["report"];
                let status = if c["matched"] == Value::Bool(true) { "ok" } else { "mismatch" };
                let value = if r.is_null() {
                    format!("error: {}", text(&c["error"]))
                } else {
                    format!("{} residual {} ({})", text(&r["check_kind"]), text(&r["residual"]), text(&r["verdict"]))
                };
                row("verify", text(&c["name"]), &r["family"], &r["horizon"], value, status)
            })
            .collect());
    }
    if doc.get("summary").is_some() {
        let d = &doc["summary"]["distinct_values"];
        let value = format!("distinct values mean {} range {}..{}", text(&d["mean"]), text(&d["min"]), text(&d["max"]));
        return Ok(vec![row("simulate", format!("{} paths", text(&doc["reps"])), &doc["family"], &doc["n"], value, "ok")]);
    }
    if doc.get("table").is_some() {
        let entries = doc["table"].as_object().map_or(0, |t| t.len());
        let value = format!("{entries} paths, total {}", text(&doc["total"]));
        return Ok(vec![row("enumerate", "law".into(), &doc["family"], &doc["horizon"], value, "ok")]);
    }
    Err(usage(format!("{source} is not a predictive output file")))
}

/// Prints and optionally writes the combined table; the flag is true when
/// every verification matched its expectation.
pub fn run(args: &[PathBuf], out: Option<&Path>) -> Result<(Vec<Row>, bool)> {
    if args.is_empty() {
        return Err(usage("report needs at least one output file or directory"));
    }
    let mut rows = Vec::new();
    for path in inputs(args)? {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: not JSON: {e}", path.display())))?;
        rows.extend(rows_of(&path.display().to_string(), &doc)?);
    }
    let ok = rows.iter().all(|r| r.status == "ok");
    if let Some(dir) = out {
        prepare_out(dir)?;
        let hashes: Vec<&str> = rows.iter().map(|r| r.config_hash.as_str()).collect();
        let mut w = csv_writer(&dir.join("report.csv"), &config_hash(&hashes), None)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok((rows, ok))
}
