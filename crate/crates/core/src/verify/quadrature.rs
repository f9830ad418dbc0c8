//! The c.i.d. identity for density-backed strategies on the real line:
//! `f_n(z | x) = ∫ f_{n+1}(z | x, y) f_n(y | x) dy`.

use std::sync::Mutex;

use rayon::prelude::*;

use super::report::{CheckKind, Method, VerificationReport, Witness, QUADRATURE_TOL};
use crate::error::{Error, Result};
use crate::measure::quadrature::{integrate_vec, QuadratureOptions};
use crate::measure::{Measure, Observation, Space};
use crate::strategy::{replicate_rng, simulate_path, Strategy};

/// Settings of [`check_cid_quadrature`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureCheck {
    /// Histories of length `0..horizon` are tested.
    pub horizon: usize,
    /// Sampled histories per length; the empty history is always tested once.
    pub histories: usize,
    pub z_grid: Vec<f64>,
    pub inner_tol: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for QuadratureCheck {
    fn default() -> Self {
        Self {
            horizon: 3,
            histories: 4,
            z_grid: (0..=60).map(|i| -6.0 + 0.2 * i as f64).collect(),
            inner_tol: 1e-8,
            tol: QUADRATURE_TOL,
            seed: 0,
        }
    }
}

fn density_on(m: &Measure, zs: &[f64]) -> Result<Vec<f64>> {
    if !m.atoms().is_empty() {
        return Err(Error::Param("the quadrature check needs atomless predictives".into()));
    }
    zs.iter().map(|z| m.density_at(&Observation::Real(*z))).collect()
}

/// Residual of the identity at one history, with the grid point attaining it.
fn residual_at<S: Strategy + ?Sized>(s: &S, x: &[Observation], cfg: &QuadratureCheck) -> Result<(f64, Witness)> {
    let now = s.predictive(x)?;
    let lhs = density_on(&now, &cfg.z_grid)?;
    let dim = cfg.z_grid.len();
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let integrand = |y: f64| -> Vec<f64> {
        let fail = |e: Error| {
            failure.lock().unwrap().get_or_insert(e);
            vec![0.0; dim]
        };
        let fy = match now.density_at(&Observation::Real(y)) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        if !(fy > 0.0) {
            return vec![0.0; dim];
        }
        let mut ext = x.to_vec();
        ext.push(Observation::Real(y));
        match s.predictive(&ext).and_then(|next| density_on(&next, &cfg.z_grid)) {
            Ok(v) => v.into_iter().map(|f| f * fy).collect(),
            Err(e) => fail(e),
        }
    };
    let opts = QuadratureOptions::with_abs_tol(cfg.inner_tol);
    let (rhs, _) = integrate_vec(integrand, f64::NEG_INFINITY, f64::INFINITY, dim, opts)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (i, gap) = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, g)| if g > best.1 { (i, g) } else { best });
    Ok((
        gap,
        Witness {
            n: x.len(),
            paths: vec![x.to_vec()],
            event: None,
            z: Some(cfg.z_grid[i]),
            values: vec![lhs[i], rhs[i]],
        },
    ))
}

/// Maximum deviation over sampled histories and the `z` grid. Histories of
/// length `n` are drawn from the strategy itself with replicate seeds.
pub fn check_cid_quadrature<S: Strategy + ?Sized>(s: &S, cfg: &QuadratureCheck) -> Result<VerificationReport> {
    if s.space() != Space::Real {
        return Err(Error::SpaceMismatch {
            expected: "real".into(),
            found: s.space().to_string(),
        });
    }
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for n in 0..cfg.horizon {
        let reps = if n == 0 { 1 } else { cfg.histories };
        jobs.extend((0..reps as u64).map(|r| (n, r)));
    }
    let rows: Vec<(f64, Witness)> = jobs
        .par_iter()
        .map(|&(n, r)| {
            let mut rng = replicate_rng(cfg.seed, (n as u64) << 32 | r);
            let x = simulate_path(s, n, &mut rng)?.points;
            residual_at(s, &x, cfg)
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, Witness)> = None;
    for (gap, w) in rows {
        if best.as_ref().map_or(gap > 0.0, |(b, _)| gap > *b) {
            best = Some((gap, w));
        }
    }
    let residual = best.as_ref().map_or(0.0, |b| b.0);
    Ok(
        VerificationReport::new(CheckKind::CidQuadrature, s.family(), cfg.horizon, residual, cfg.tol, Method::Quadrature)
            .with_witness(best.map(|b| b.1))
            .with_sampling(jobs.len(), Some(cfg.seed)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cid::{Copula, CopulaSchedule, Hmw};
    use crate::measure::Density;
    use crate::stationary::StableAr;

    #[test]
    fn independence_copula_is_exact() {
        let h = Hmw::new(Density::Gaussian { mean: 0.0, var: 1.0 }, CopulaSchedule::Fixed(vec![Copula::Independence])).unwrap();
        let rep = check_cid_quadrature(&h, &QuadratureCheck::default()).unwrap();
        assert!(rep.residual <= 1e-8, "{}", rep.residual);
    }

    #[test]
    fn gaussian_ar_is_not_cid() {
        let ar = StableAr::new(2.0, 0.0, 1.0, 0.8).unwrap();
        let rep = check_cid_quadrature(&ar, &QuadratureCheck::default()).unwrap();
        assert!(!rep.passed());
        // Against the closed form N(c^2 x, b(1 + c^2)) versus N(c x, b).
        let w = rep.witness.unwrap();
        let z = w.z.unwrap();
        let x = w.paths[0].last().map_or(0.0, |o| o.as_real().unwrap());
        let normal = |m: f64, v: f64| (-(z - m) * (z - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        if w.n > 0 {
            assert!((w.values[0] - normal(0.8 * x, 1.0)).abs() < 1e-12);
            assert!((w.values[1] - normal(0.64 * x, 1.64)).abs() < 1e-7);
        }
    }

    #[test]
    fn categorical_strategies_are_rejected() {
        let d = crate::exch::Dirichlet::classical(1.0, Measure::uniform(2).unwrap()).unwrap();
        assert!(check_cid_quadrature(&d, &QuadratureCheck::default()).is_err());
    }
}
