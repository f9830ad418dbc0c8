//! `enumerate`: the exact table of `(X_1, .., X_n)` for a categorical strategy.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Result};
use predictive::finite::{finite_dim_law, FiniteLaw, Scalar, DEFAULT_BUDGET};
use serde::Serialize;
use serde_json::{json, Value};

use crate::common::{config_hash, csv_writer, prepare_out, usage, write_json, LoadedSpec};

/// Tolerance on the total mass of an `f64` table.
pub const SUM_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct EnumerateConfig {
    command: &'static str,
    strategy: Value,
    n: usize,
}

/// Comma-separated symbol indices, e.g. `"0,1"`.
pub fn path_key(path: &[usize]) -> String {
    path.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn table_json<T: Scalar>(law: &FiniteLaw<T>, render: impl Fn(&T) -> Value) -> (Value, Vec<Vec<Value>>) {
    let n = law.horizon();
    let table: BTreeMap<String, Value> = law
        .table(n)
        .iter()
        .enumerate()
        .map(|(i, p)| (path_key(&law.path(n, i)), render(p)))
        .collect();
    let marginals = (0..n)
        .map(|i| law.coordinate_marginal(n, i + 1).iter().map(&render).collect())
        .collect();
    (serde_json::to_value(table).expect("tables serialize"), marginals)
}

pub fn run(spec: &LoadedSpec, n: usize, out: Option<&Path>) -> Result<Value> {
    let built = spec.build()?;
    let finite = built
        .finite
        .as_ref()
        .ok_or_else(|| usage(format!("{} is not a categorical strategy; enumerate needs a finite alphabet", built.family)))?;
    if n == 0 {
        return Err(usage("enumerate needs --n of at least 1"));
    }
    let config = EnumerateConfig {
        command: "enumerate",
        strategy: spec.value(),
        n,
    };
    let hash = config_hash(&config);
    let law = finite_dim_law(finite.as_ref(), n, DEFAULT_BUDGET)?;
    let total = law.total(n);
    if (total - 1.0).abs() > SUM_TOL {
        return Err(anyhow!("table mass {total} differs from 1 by more than {SUM_TOL:e}"));
    }
    let (table, marginals) = table_json(&law, |p| json!(p));
    let mut doc = json!({
        "config_hash": hash,
        "seed": null,
        "family": built.family,
        "horizon": n,
        "alphabet": law.alphabet(),
        "total": total,
        "table": table,
        "marginals": marginals,
    });
    if let Some(exact) = &built.exact {
        let law = finite_dim_law(exact.as_ref(), n, DEFAULT_BUDGET)?;
        let (table, marginals) = table_json(&law, |p| json!(p.to_string()));
        doc["exact"] = json!({ "total": law.total(n).to_string(), "table": table, "marginals": marginals });
    }
    if let Some(out) = out {
        prepare_out(out)?;
        write_json(&out.join("law.json"), &doc)?;
        let mut w = csv_writer(&out.join("law.csv"), &hash, None)?;
        w.write_record(["path", "probability"])?;
        for (i, p) in law.table(n).iter().enumerate() {
            w.write_record([path_key(&law.path(n, i)), p.to_string()])?;
        }
        w.flush()?;
    }
    Ok(doc)
}
