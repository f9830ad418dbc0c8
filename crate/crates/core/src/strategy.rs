//! Strategies, path laws by the chain rule, and the sequential sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::{Measure, Observation, Space};

/// A rule sending every finite history to the law of the next observation.
///
/// `predictive` must be total and deterministic: the same history always
/// yields the same measure.
pub trait Strategy: Send + Sync {
    fn family(&self) -> &str;
    fn space(&self) -> Space;
    /// `σ_n(x_1, .., x_n)`; the empty history gives `σ_0`.
    fn predictive(&self, history: &[Observation]) -> Result<Measure>;
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn family(&self) -> &str {
        (**self).family()
    }
    fn space(&self) -> Space {
        (**self).space()
    }
    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        (**self).predictive(history)
    }
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn family(&self) -> &str {
        (**self).family()
    }
    fn space(&self) -> Space {
        (**self).space()
    }
    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        (**self).predictive(history)
    }
}

impl<S: Strategy + ?Sized> Strategy for std::sync::Arc<S> {
    fn family(&self) -> &str {
        (**self).family()
    }
    fn space(&self) -> Space {
        (**self).space()
    }
    fn predictive(&self, history: &[Observation]) -> Result<Measure> {
        (**self).predictive(history)
    }
}

/// A finite sequence of observations with its chain-rule log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub points: Vec<Observation>,
    /// `ln g_n(points)`; `-inf` for a null path.
    pub log_prob: f64,
    pub seed: Option<u64>,
}

/// Predictive at `history` after checking that it lies in the strategy's space.
pub fn predictive<S: Strategy + ?Sized>(s: &S, history: &[Observation]) -> Result<Measure> {
    for x in history {
        x.check(s.space())?;
    }
    s.predictive(history)
}

/// `Σ_i ln f_{i-1}(x_i | x_1..x_{i-1})`, with masses on atoms and densities elsewhere.
pub fn path_log_prob<S: Strategy + ?Sized>(s: &S, points: &[Observation]) -> Result<f64> {
    let mut lp = 0.0;
    for i in 0..points.len() {
        let m = predictive(s, &points[..i])?;
        lp += m.density_at(&points[i])?.ln();
    }
    Ok(lp)
}

/// Draws `x_1 ~ σ_0`, then `x_{i+1} ~ σ_i(x_1..x_i)`.
pub fn simulate_path<S: Strategy + ?Sized, R: rand::Rng + ?Sized>(s: &S, n: usize, rng: &mut R) -> Result<Path> {
    let mut points = Vec::with_capacity(n);
    let mut lp = 0.0;
    for _ in 0..n {
        let m = s.predictive(&points)?;
        let x = m.sample(rng)?;
        lp += m.density_at(&x)?.ln();
        points.push(x);
    }
    Ok(Path {
        points,
        log_prob: lp,
        seed: None,
    })
}

/// Seed of replicate `rep` under master seed `seed` (SplitMix64 finaliser).
pub fn replicate_seed(seed: u64, rep: u64) -> u64 {
    let mut z = seed ^ rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used for replicate `rep`.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(seed, rep))
}

/// `reps` independent paths of length `n`, in replicate order. The output
/// depends only on `(seed, reps, n)`, not on the thread count.
pub fn simulate_paths<S: Strategy + ?Sized>(s: &S, n: usize, reps: usize, seed: u64) -> Result<Vec<Path>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let child = replicate_seed(seed, rep);
            let mut rng = ChaCha8Rng::seed_from_u64(child);
            let mut p = simulate_path(s, n, &mut rng)?;
            p.seed = Some(child);
            Ok(p)
        })
        .collect()
}
