use serde::{Deserialize, Serialize};

use super::{Observation, Space};
use crate::error::{Error, Result};

/// A real interval with independently open or closed ends. Infinite ends are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "extended_real")]
    pub lo: f64,
    #[serde(with = "extended_real")]
    pub hi: f64,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo.is_finite(),
            hi_closed: hi.is_finite(),
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `(-∞, hi]`.
    pub fn at_most(hi: f64) -> Self {
        Self::closed(f64::NEG_INFINITY, hi)
    }

    /// `[lo, ∞)`.
    pub fn at_least(lo: f64) -> Self {
        Self::closed(lo, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lo || (self.lo_closed && x == self.lo);
        let below = x < self.hi || (self.hi_closed && x == self.hi);
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_reals(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }
}

/// A measurable set on one of the three sample spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// Subset of a finite alphabet, as sorted symbol indices.
    Symbols(Vec<usize>),
    /// Finite union of real intervals.
    Intervals(Vec<Interval>),
    /// Product of two intervals on the real plane.
    Rect(Interval, Interval),
    /// Finite set of points.
    Points(Vec<Observation>),
}

impl Event {
    pub fn symbols<I: IntoIterator<Item = usize>>(symbols: I) -> Self {
        let mut v: Vec<usize> = symbols.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Event::Symbols(v)
    }

    pub fn interval(iv: Interval) -> Self {
        Event::Intervals(vec![iv])
    }

    /// The whole sample space.
    pub fn whole(space: Space) -> Self {
        match space {
            Space::Categorical(k) => Event::Symbols((0..k).collect()),
            Space::Real => Event::Intervals(vec![Interval::REALS]),
            Space::RealPair => Event::Rect(Interval::REALS, Interval::REALS),
        }
    }

    pub fn contains(&self, x: &Observation) -> bool {
        match (self, x) {
            (Event::Symbols(s), Observation::Cat(i)) => s.binary_search(i).is_ok(),
            (Event::Intervals(ivs), Observation::Real(v)) => ivs.iter().any(|iv| iv.contains(*v)),
            (Event::Rect(a, b), Observation::Pair(x, z)) => a.contains(*x) && b.contains(*z),
            (Event::Points(pts), _) => pts.iter().any(|p| p.same_point(x)),
            _ => false,
        }
    }

    pub fn is_whole(&self, space: Space) -> bool {
        match (self, space) {
            (Event::Symbols(s), Space::Categorical(k)) => (0..k).all(|i| s.binary_search(&i).is_ok()),
            (Event::Intervals(ivs), Space::Real) => ivs.iter().any(|iv| iv.is_reals()),
            (Event::Rect(a, b), Space::RealPair) => a.is_reals() && b.is_reals(),
            _ => false,
        }
    }

    /// Checks the event is expressed in terms of `space`.
    pub fn check_space(&self, space: Space) -> Result<()> {
        let ok = match (self, space) {
            (Event::Symbols(s), Space::Categorical(k)) => s.iter().all(|&i| i < k),
            (Event::Intervals(_), Space::Real) => true,
            (Event::Rect(..), Space::RealPair) => true,
            (Event::Points(pts), sp) => pts.iter().all(|p| p.check(sp).is_ok()),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: space.to_string(),
                found: format!("{self:?}"),
            })
        }
    }

    pub fn intersect(&self, other: &Event) -> Result<Event> {
        Ok(match (self, other) {
            (Event::Points(p), e) | (e, Event::Points(p)) => {
                Event::Points(p.iter().filter(|x| e.contains(x)).cloned().collect())
            }
            (Event::Symbols(a), Event::Symbols(b)) => {
                Event::Symbols(a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect())
            }
            (Event::Intervals(a), Event::Intervals(b)) => {
                let mut out = Vec::new();
                for x in a {
                    for y in b {
                        let iv = x.intersect(y);
                        if !iv.is_empty() {
                            out.push(iv);
                        }
                    }
                }
                Event::Intervals(out)
            }
            (Event::Rect(a1, b1), Event::Rect(a2, b2)) => Event::Rect(a1.intersect(a2), b1.intersect(b2)),
            _ => {
                return Err(Error::SpaceMismatch {
                    expected: format!("{self:?}"),
                    found: format!("{other:?}"),
                })
            }
        })
    }

    /// Complement within `space`. Rectangles have no rectangular complement and are rejected.
    pub fn complement(&self, space: Space) -> Result<Event> {
        match (self, space) {
            (Event::Symbols(s), Space::Categorical(k)) => {
                Ok(Event::Symbols((0..k).filter(|i| s.binary_search(i).is_err()).collect()))
            }
            (Event::Points(pts), Space::Categorical(k)) => Ok(Event::Symbols(
                (0..k)
                    .filter(|&i| !pts.contains(&Observation::Cat(i)))
                    .collect(),
            )),
            (Event::Intervals(ivs), Space::Real) => Ok(Event::Intervals(interval_complement(ivs))),
            (Event::Points(pts), Space::Real) => {
                let as_ivs: Vec<Interval> = pts
                    .iter()
                    .filter_map(|p| match p {
                        Observation::Real(x) => Some(Interval::closed(*x, *x)),
                        _ => None,
                    })
                    .collect();
                Ok(Event::Intervals(interval_complement(&as_ivs)))
            }
            _ => Err(Error::Param(format!("no complement of {self:?} in {space}"))),
        }
    }
}

/// The same union rewritten as disjoint sorted intervals.
pub(crate) fn disjoint_union(ivs: &[Interval]) -> Vec<Interval> {
    interval_complement(&interval_complement(ivs))
}

/// Complement of a finite union of intervals, as disjoint sorted intervals.
fn interval_complement(ivs: &[Interval]) -> Vec<Interval> {
    let mut parts: Vec<Interval> = ivs.iter().copied().filter(|iv| !iv.is_empty()).collect();
    parts.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out = Vec::new();
    // Current left edge of the uncovered region.
    let mut lo = f64::NEG_INFINITY;
    let mut lo_closed = false;
    let mut covered_to_inf = false;
    for iv in parts {
        let gap = Interval {
            lo,
            hi: iv.lo,
            lo_closed,
            hi_closed: !iv.lo_closed,
        };
        if !gap.is_empty() {
            out.push(gap);
        }
        if iv.hi == f64::INFINITY {
            covered_to_inf = true;
            break;
        }
        if iv.hi > lo {
            lo = iv.hi;
            lo_closed = !iv.hi_closed;
        } else if iv.hi == lo && iv.hi_closed {
            lo_closed = false;
        }
    }
    if !covered_to_inf {
        let tail = Interval {
            lo,
            hi: f64::INFINITY,
            lo_closed,
            hi_closed: false,
        };
        if !tail.is_empty() {
            out.push(tail);
        }
    }
    out
}

/// JSON has no infinities: the strings `"inf"` and `"-inf"` stand in for them.
mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a real endpoint: {other}"))),
            },
        }
    }
}
