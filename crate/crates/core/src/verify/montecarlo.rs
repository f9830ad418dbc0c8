//! Kolmogorov-Smirnov tests, empirical characteristic functions, and the
//! seeded sample generator they run on.
//!
//! Samples are drawn in fixed-size chunks, chunk `i` from replicate seed `i`,
//! and reduced in chunk order, so every statistic is bit-identical across
//! thread counts.

use num::complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{CheckKind, Method, VerificationReport};
use crate::error::{Error, Result};
use crate::stationary::{StableAr, StableLaw};
use crate::strategy::replicate_rng;

/// Asymptotic Kolmogorov critical value at the 1% level.
pub const KS_C_01: f64 = 1.628;
/// Smallest sample accepted by the KS tests.
pub const MIN_KS_SAMPLE: usize = 1_000;
/// Default tolerance on an empirical cf distance.
pub const CF_TOL: f64 = 0.005;

const CHUNK: usize = 4096;

/// `n` draws of `draw`, reproducible from `seed` alone.
pub fn sample_seeded<F>(n: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replicate_rng(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// Fallible variant of [`sample_seeded`].
pub fn try_sample_seeded<F>(n: usize, seed: u64, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replicate_rng(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// A KS statistic and the critical value it is compared with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
}

impl KsOutcome {
    pub fn passed(&self) -> bool {
        self.statistic <= self.critical
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_KS_SAMPLE {
        return Err(Error::SampleSize {
            got: n,
            min: MIN_KS_SAMPLE,
        });
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Param("sample contains NaN".into()));
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `sup |F_a - F_b|` against `c(0.01) √((m + n) / (m n))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    check_size(a.len())?;
    check_size(b.len())?;
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    Ok(KsOutcome {
        statistic: d,
        critical: KS_C_01 * ((m + n) / (m * n)).sqrt(),
    })
}

/// `sup |F_n - F|` against `c(0.01) / √n`.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    check_size(a.len())?;
    let a = sorted(a)?;
    let n = a.len() as f64;
    let d = a.iter().enumerate().fold(0.0f64, |d, (i, x)| {
        let f = cdf(*x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    });
    Ok(KsOutcome {
        statistic: d,
        critical: KS_C_01 / n.sqrt(),
    })
}

/// `(1/N) Σ exp(i t x_k)`, summed in fixed chunks.
pub fn empirical_cf(samples: &[f64], t: f64) -> Complex64 {
    let parts: Vec<Complex64> = samples
        .par_chunks(CHUNK)
        .map(|c| {
            c.iter().fold(Complex64::new(0.0, 0.0), |acc, x| {
                let (s, co) = (t * x).sin_cos();
                acc + Complex64::new(co, s)
            })
        })
        .collect();
    parts.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b) / samples.len() as f64
}

/// `sup_t |φ_emp(t) - φ_law(t)|` over the grid.
pub fn empirical_cf_distance(samples: &[f64], law: &StableLaw, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|t| (empirical_cf(samples, *t) - law.cf(*t)).norm())
        .fold(0.0, f64::max)
}

pub fn ks_two_sample_report(family: &str, horizon: usize, a: &[f64], b: &[f64], seed: u64) -> Result<VerificationReport> {
    let ks = ks_two_sample(a, b)?;
    Ok(
        VerificationReport::new(CheckKind::McTwoSample, family, horizon, ks.statistic, ks.critical, Method::MonteCarlo)
            .with_sampling(a.len().min(b.len()), Some(seed)),
    )
}

pub fn ks_one_sample_report(
    family: &str,
    a: &[f64],
    cdf: impl Fn(f64) -> f64,
    seed: u64,
) -> Result<VerificationReport> {
    let ks = ks_one_sample(a, cdf)?;
    Ok(
        VerificationReport::new(CheckKind::McOneSample, family, 1, ks.statistic, ks.critical, Method::MonteCarlo)
            .with_sampling(a.len(), Some(seed)),
    )
}

/// One step of the autoregression from `X ~ ν`: the empirical cf of
/// `f(X) + U` against the cf of `ν`.
pub fn stable_invariance_report(ar: &StableAr, n: usize, t_grid: &[f64], seed: u64, tol: f64) -> VerificationReport {
    let nu = ar.stationary();
    let xs = sample_seeded(n, seed, |rng| {
        let x = nu.sample(rng);
        ar.step(x, rng)
    });
    let d = empirical_cf_distance(&xs, &nu, t_grid);
    VerificationReport::new(CheckKind::CfDistance, "stable_ar", 1, d, tol, Method::MonteCarlo).with_sampling(n, Some(seed))
}
