//! `simulate`: seeded paths plus per-path summary statistics.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use predictive::{simulate_paths, Observation, Path as SamplePath};
use serde::Serialize;
use serde_json::{json, Value};

use crate::common::{config_hash, csv_writer, prepare_out, write_json, LoadedSpec};

#[derive(Debug, Serialize)]
struct SimulateConfig {
    command: &'static str,
    strategy: Value,
    n: usize,
    reps: usize,
    seed: u64,
}

/// Bit pattern of a point, for counting distinct values.
fn point_key(x: &Observation) -> (u8, u64, u64) {
    match x {
        Observation::Cat(i) => (0, *i as u64, 0),
        Observation::Real(v) => (1, v.to_bits(), 0),
        Observation::Pair(a, b) => (2, a.to_bits(), b.to_bits()),
    }
}

/// Number of distinct values in a path.
pub fn distinct_values(points: &[Observation]) -> usize {
    let mut keys: Vec<_> = points.iter().map(point_key).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Summary of a batch of paths: the law of the number of distinct values
/// and repeat frequencies.
pub fn summarize(paths: &[SamplePath]) -> Value {
    let reps = paths.len().max(1) as f64;
    let distinct: Vec<usize> = paths.iter().map(|p| distinct_values(&p.points)).collect();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for d in &distinct {
        *histogram.entry(*d).or_default() += 1;
    }
    let mean = distinct.iter().sum::<usize>() as f64 / reps;
    let var = distinct.iter().map(|d| (*d as f64 - mean).powi(2)).sum::<f64>() / reps;
    let first_repeat = paths
        .iter()
        .filter(|p| p.points.len() >= 2 && p.points[0].same_point(&p.points[1]))
        .count() as f64
        / reps;
    let any_repeat = paths.iter().filter(|p| distinct_values(&p.points) < p.points.len()).count() as f64 / reps;
    let log_probs: Vec<f64> = paths.iter().map(|p| p.log_prob).filter(|l| l.is_finite()).collect();
    let mean_log_prob = (!log_probs.is_empty()).then(|| log_probs.iter().sum::<f64>() / log_probs.len() as f64);
    json!({
        "distinct_values": {
            "mean": mean,
            "variance": var,
            "min": distinct.iter().min(),
            "max": distinct.iter().max(),
            "support_points": histogram.len(),
            "histogram": histogram.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        },
        "repeat_frequency_x1_x2": first_repeat,
        "any_repeat_frequency": any_repeat,
        "mean_log_prob": mean_log_prob,
    })
}

pub fn run(spec: &LoadedSpec, n: usize, reps: usize, seed: u64, out: &Path) -> Result<Value> {
    let built = spec.build()?;
    prepare_out(out)?;
    let config = SimulateConfig {
        command: "simulate",
        strategy: spec.value(),
        n,
        reps,
        seed,
    };
    let hash = config_hash(&config);
    let paths = simulate_paths(built.strategy.as_ref(), n, reps, seed)?;

    let mut w = csv_writer(&out.join("paths.csv"), &hash, Some(seed))?;
    w.write_record(["rep", "rep_seed", "step", "x", "z"])?;
    for (rep, p) in paths.iter().enumerate() {
        let rep_seed = p.seed.map(|s| s.to_string()).unwrap_or_default();
        for (step, x) in p.points.iter().enumerate() {
            let (x, z) = match x {
                Observation::Cat(i) => (i.to_string(), String::new()),
                Observation::Real(v) => (v.to_string(), String::new()),
                Observation::Pair(a, b) => (a.to_string(), b.to_string()),
            };
            w.write_record([rep.to_string(), rep_seed.clone(), (step + 1).to_string(), x, z])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("distinct.csv"), &hash, Some(seed))?;
    w.write_record(["rep", "distinct_values", "log_prob"])?;
    for (rep, p) in paths.iter().enumerate() {
        w.write_record([rep.to_string(), distinct_values(&p.points).to_string(), p.log_prob.to_string()])?;
    }
    w.flush()?;

    let mut summary = json!({
        "config_hash": hash,
        "seed": seed,
        "family": built.family,
        "n": n,
        "reps": reps,
        "strategy": config.strategy,
    });
    summary["summary"] = summarize(&paths);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_counts_use_bit_identity() {
        let xs = [Observation::Real(0.0), Observation::Real(-0.0), Observation::Real(0.0)];
        assert_eq!(distinct_values(&xs), 2);
        assert_eq!(distinct_values(&[Observation::Cat(1), Observation::Cat(1)]), 1);
        assert_eq!(distinct_values(&[]), 0);
    }

    #[test]
    fn summary_of_fixed_paths() {
        let path = |xs: &[usize]| SamplePath {
            points: xs.iter().map(|x| Observation::Cat(*x)).collect(),
            log_prob: -1.0,
            seed: None,
        };
        let s = summarize(&[path(&[0, 0, 1]), path(&[0, 1, 2]), path(&[1, 1, 1]), path(&[2, 0, 2])]);
        assert_eq!(s["distinct_values"]["mean"], 2.0);
        assert_eq!(s["distinct_values"]["histogram"]["2"], 2);
        assert_eq!(s["repeat_frequency_x1_x2"], 0.5);
        assert_eq!(s["any_repeat_frequency"], 0.75);
        assert_eq!(s["mean_log_prob"], -1.0);
    }
}
