//! JSON form of a [`Measure`]:
//! `{"space": .., "atoms": [[value, weight], ..], "densities": [{"family", "params", "weight"}, ..]}`.
//!
//! Categorical measures also carry `"alphabet": k`. Floats are written in
//! shortest round-trip form, so a parse of the output reproduces every bit.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{Density, Event, Measure, Observation, Space, Tabulated};
use crate::cid::hmw::{CopulaChain, CopulaStep};
use crate::error::{Error, Result};
use crate::stationary::stable::StableLaw;

pub fn to_value(m: &Measure) -> Value {
    let mut obj = Map::new();
    let space = match m.space() {
        Space::Categorical(k) => {
            obj.insert("alphabet".into(), json!(k));
            "categorical"
        }
        Space::Real => "real",
        Space::RealPair => "real_pair",
    };
    obj.insert("space".into(), json!(space));
    let atoms: Vec<Value> = m.atoms().iter().map(|(x, w)| json!([observation_value(x), w])).collect();
    obj.insert("atoms".into(), Value::Array(atoms));
    let densities: Vec<Value> = m
        .densities()
        .iter()
        .map(|(w, d)| {
            let mut v = density_value(d);
            v["weight"] = json!(w);
            v
        })
        .collect();
    obj.insert("densities".into(), Value::Array(densities));
    Value::Object(obj)
}

pub fn to_string(m: &Measure) -> String {
    to_value(m).to_string()
}

pub fn from_value(v: &Value) -> Result<Measure> {
    let space = match v.get("space").and_then(Value::as_str) {
        Some("categorical") => Space::Categorical(
            v.get("alphabet")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("categorical measure needs an integer \"alphabet\" size"))? as usize,
        ),
        Some("real") => Space::Real,
        Some("real_pair") => Space::RealPair,
        other => return Err(bad(&format!("unknown space {other:?}"))),
    };
    let mut atoms = Vec::new();
    for a in array(v, "atoms")? {
        let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("atom must be [value, weight]"))?;
        atoms.push((parse_observation(&pair[0], space)?, number(&pair[1])?));
    }
    let mut densities = Vec::new();
    for d in array(v, "densities")? {
        let w = number(d.get("weight").ok_or_else(|| bad("density without weight"))?)?;
        densities.push((w, parse_density(d)?));
    }
    Measure::new(space, atoms, densities)
}

pub fn from_str(s: &str) -> Result<Measure> {
    let v: Value = serde_json::from_str(s).map_err(|e| bad(&e.to_string()))?;
    from_value(&v)
}

fn observation_value(x: &Observation) -> Value {
    match x {
        Observation::Cat(i) => json!(i),
        Observation::Real(v) => json!(v),
        Observation::Pair(a, b) => json!([a, b]),
    }
}

fn parse_observation(v: &Value, space: Space) -> Result<Observation> {
    let x = match space {
        Space::Categorical(_) => Observation::Cat(v.as_u64().ok_or_else(|| bad("categorical atom must be an index"))? as usize),
        Space::Real => Observation::Real(number(v)?),
        Space::RealPair => {
            let p = v.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("pair atom must be [x, z]"))?;
            Observation::Pair(number(&p[0])?, number(&p[1])?)
        }
    };
    x.check(space)?;
    Ok(x)
}

pub(crate) fn density_value(d: &Density) -> Value {
    let params = match d {
        Density::Pmf(p) => json!({ "p": p }),
        Density::Gaussian { mean, var } => json!({ "mean": mean, "var": var }),
        Density::Stable(l) => json!({ "gamma": l.gamma, "a": l.a, "b": l.b }),
        Density::Tabulated(t) => json!({ "x": t.xs(), "y": t.ys() }),
        Density::BivariateGaussian { mean, cov } => json!({ "mean": mean, "cov": cov }),
        Density::Copula(c) => json!({
            "base": density_value(c.base()),
            "steps": c.steps().iter().map(|s| serde_json::to_value(s).expect("copula step serialises")).collect::<Vec<_>>(),
        }),
        Density::Conditioned { inner, event, mass } => json!({
            "inner": density_value(inner),
            "event": serde_json::to_value(event).expect("event serialises"),
            "mass": mass,
        }),
    };
    json!({ "family": d.family(), "params": params })
}

pub(crate) fn parse_density(v: &Value) -> Result<Density> {
    let family = v.get("family").and_then(Value::as_str).ok_or_else(|| bad("density without family"))?;
    let p = v.get("params").ok_or_else(|| bad("density without params"))?;
    let f = |k: &str| -> Result<f64> { number(p.get(k).ok_or_else(|| bad(&format!("{family} needs \"{k}\"")))?) };
    Ok(match family {
        "pmf" => Density::Pmf(numbers(p.get("p"))?),
        "gaussian" => Density::Gaussian {
            mean: f("mean")?,
            var: f("var")?,
        },
        "stable" => Density::Stable(StableLaw::new(f("gamma")?, f("a")?, f("b")?)?),
        "tabulated" => Density::Tabulated(Arc::new(Tabulated::new(numbers(p.get("x"))?, numbers(p.get("y"))?)?)),
        "bivariate_gaussian" => {
            let m = numbers(p.get("mean"))?;
            let rows = p.get("cov").and_then(Value::as_array).ok_or_else(|| bad("cov must be a 2x2 array"))?;
            if m.len() != 2 || rows.len() != 2 {
                return Err(bad("bivariate gaussian needs a 2-vector mean and 2x2 cov"));
            }
            let r0 = numbers(Some(&rows[0]))?;
            let r1 = numbers(Some(&rows[1]))?;
            if r0.len() != 2 || r1.len() != 2 {
                return Err(bad("cov must be 2x2"));
            }
            Density::BivariateGaussian {
                mean: [m[0], m[1]],
                cov: [[r0[0], r0[1]], [r1[0], r1[1]]],
            }
        }
        "copula_chain" => {
            let base = parse_density(p.get("base").ok_or_else(|| bad("copula chain needs a base"))?)?;
            let steps: Vec<CopulaStep> =
                serde_json::from_value(p.get("steps").cloned().unwrap_or(Value::Array(vec![]))).map_err(|e| bad(&e.to_string()))?;
            Density::Copula(Arc::new(CopulaChain::from_parts(base, steps)?))
        }
        "conditioned" => {
            let inner = parse_density(p.get("inner").ok_or_else(|| bad("conditioned needs inner"))?)?;
            let event: Event =
                serde_json::from_value(p.get("event").cloned().unwrap_or(Value::Null)).map_err(|e| bad(&e.to_string()))?;
            Density::Conditioned {
                inner: Box::new(inner),
                event,
                mass: f("mass")?,
            }
        }
        other => return Err(bad(&format!("unknown density family {other:?}"))),
    })
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    static EMPTY: Vec<Value> = Vec::new();
    match v.get(key) {
        None => Ok(&EMPTY),
        Some(a) => a.as_array().ok_or_else(|| bad(&format!("\"{key}\" must be an array"))),
    }
}

fn number(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(&format!("expected a number, found {v}")))
}

fn numbers(v: Option<&Value>) -> Result<Vec<f64>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| bad("expected an array of numbers"))?
        .iter()
        .map(number)
        .collect()
}

fn bad(msg: &str) -> Error {
    Error::Config(format!("measure json: {msg}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Interval;
    use proptest::prelude::*;

    fn assert_round_trip(m: &Measure) {
        let back = from_str(&to_string(m)).unwrap();
        assert!(back.same_as(m), "{}\n{:?}", to_string(m), back);
    }

    #[test]
    fn fixed_round_trips() {
        assert_round_trip(&Measure::uniform(3).unwrap());
        let g = Measure::gaussian(0.1, 0.7).unwrap();
        let d = Measure::dirac(Observation::Real(1.7), Space::Real).unwrap();
        assert_round_trip(&Measure::mix(&[(1.0 / 3.0, &d), (2.0 / 3.0, &g)]).unwrap());
        assert_round_trip(&g.condition(&Event::interval(Interval::at_least(0.0))).unwrap());
        let pair = Measure::from_density(
            Space::RealPair,
            Density::BivariateGaussian {
                mean: [0.8, 0.0],
                cov: [[0.5, 0.25], [0.25, 0.25]],
            },
        )
        .unwrap();
        assert_round_trip(&pair);
    }

    #[test]
    fn schema_shape() {
        let v = to_value(&Measure::uniform(2).unwrap());
        assert_eq!(v["space"], "categorical");
        assert_eq!(v["alphabet"], 2);
        assert_eq!(v["densities"][0]["family"], "pmf");
        assert_eq!(v["densities"][0]["weight"], 1.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(from_str(r#"{"space": "moon"}"#).is_err());
        assert!(from_str(r#"{"space": "real", "atoms": [[1.0, 0.5]]}"#).is_err());
        assert!(from_str(r#"{"space": "real", "densities": [{"family": "gaussian", "params": {"mean": 0, "var": -1}, "weight": 1}]}"#).is_err());
    }

    proptest! {
        #[test]
        fn mixtures_round_trip_bit_exactly(
            xs in proptest::collection::vec(-1e6f64..1e6, 1..6),
            raw in proptest::collection::vec(0.01f64..1.0, 1..6),
            mean in -10.0f64..10.0,
            var in 0.01f64..10.0,
            gw in 0.0f64..1.0,
        ) {
            let k = xs.len().min(raw.len());
            let total: f64 = raw[..k].iter().sum();
            let atoms: Vec<(Observation, f64)> = xs[..k]
                .iter()
                .zip(&raw[..k])
                .map(|(x, w)| (Observation::Real(*x), (1.0 - gw) * w / total))
                .collect();
            let atom_mass: f64 = atoms.iter().map(|(_, w)| w).sum();
            if let Ok(m) = Measure::new(Space::Real, atoms, vec![(1.0 - atom_mass, Density::Gaussian { mean, var })]) {
                let back = from_str(&to_string(&m)).unwrap();
                prop_assert!(back.same_as(&m));
            }
        }
    }
}
