//! Symmetric stable laws `S(a, b)` with characteristic function
//! `exp(i t a - b |t|^γ / 2)`.
//!
//! This is half the exponent of the usual `exp(-σ^γ |t|^γ)` parameterisation;
//! [`StableLaw::standard_scale`] is the single place where the two meet.
//! At γ = 2 the law is `N(a, b)`, at γ = 1 it is Cauchy with location `a` and
//! half-width `b / 2`.

use std::f64::consts::{FRAC_PI_2, PI};

use num::complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::measure::quadrature::{integrate, QuadratureOptions};
use crate::measure::special;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    /// Exponent in (0, 2].
    pub gamma: f64,
    /// Location.
    pub a: f64,
    /// Scale (> 0) in the `b |t|^γ / 2` sense.
    pub b: f64,
}

impl StableLaw {
    pub fn new(gamma: f64, a: f64, b: f64) -> Result<Self> {
        let law = Self { gamma, a, b };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(Error::Param(format!("stable exponent {} not in (0, 2]", self.gamma)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Param(format!("stable scale {} must be positive", self.b)));
        }
        if !self.a.is_finite() {
            return Err(Error::Param("stable location must be finite".into()));
        }
        Ok(())
    }

    /// Scale σ such that `X = a + σ Y` with `E exp(itY) = exp(-|t|^γ)`.
    pub fn standard_scale(&self) -> f64 {
        (self.b / 2.0).powf(1.0 / self.gamma)
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        let modulus = (-self.b * t.abs().powf(self.gamma) / 2.0).exp();
        Complex64::from_polar(modulus, t * self.a)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.gamma == 2.0 {
            let z: f64 = StandardNormal.sample(rng);
            return self.a + self.b.sqrt() * z;
        }
        let v = PI * (rng.random::<f64>() - 0.5);
        if self.gamma == 1.0 {
            return self.a + self.standard_scale() * v.tan();
        }
        // Chambers-Mallows-Stuck, symmetric case.
        let w: f64 = Exp1.sample(rng);
        let g = self.gamma;
        let y = (g * v).sin() / v.cos().powf(1.0 / g) * (((1.0 - g) * v).cos() / w).powf((1.0 - g) / g);
        self.a + self.standard_scale() * y
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.gamma == 2.0 {
            return Ok(special::normal_pdf(x, self.a, self.b));
        }
        let s = self.standard_scale();
        if self.gamma == 1.0 {
            return Ok(special::cauchy_pdf(x, self.a, s));
        }
        Ok(standard_pdf(self.gamma, ((x - self.a) / s).abs())? / s)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if self.gamma == 2.0 {
            return Ok(special::normal_cdf(x, self.a, self.b));
        }
        let s = self.standard_scale();
        if self.gamma == 1.0 {
            return Ok(special::cauchy_cdf(x, self.a, s));
        }
        let z = (x - self.a) / s;
        let upper = standard_upper_tail(self.gamma, z.abs())?;
        Ok(if z >= 0.0 { 1.0 - upper } else { upper })
    }
}

fn nolan_opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_intervals: 2000,
    }
}

// Nolan's integral representation for β = 0: on θ ∈ (0, π/2),
// V(θ) = (cos θ / sin γθ)^{γ/(γ-1)} cos((γ-1)θ) / cos θ.
fn nolan_v(g: f64, theta: f64) -> f64 {
    let c = theta.cos();
    (c / (g * theta).sin()).powf(g / (g - 1.0)) * ((g - 1.0) * theta).cos() / c
}

/// Density at `x >= 0` of the standard law with cf `exp(-|t|^γ)`, γ ≠ 1.
fn standard_pdf(g: f64, x: f64) -> Result<f64> {
    if x < 1e-10 {
        return Ok(gamma(1.0 + 1.0 / g) / PI);
    }
    let p = g / (g - 1.0);
    let xp = x.powf(p);
    let est = integrate(
        |th| {
            let v = nolan_v(g, th);
            let e = xp * v;
            if !e.is_finite() || e > 745.0 {
                0.0
            } else {
                v * (-e).exp()
            }
        },
        0.0,
        FRAC_PI_2,
        nolan_opts(),
    )?;
    Ok(g * x.powf(1.0 / (g - 1.0)) / (PI * (g - 1.0).abs()) * est.value)
}

/// `P(Y > x)` for `x >= 0` under the standard law, γ ≠ 1.
fn standard_upper_tail(g: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.5);
    }
    let xp = x.powf(g / (g - 1.0));
    let est = integrate(
        |th| {
            let e = xp * nolan_v(g, th);
            if !e.is_finite() || e > 745.0 {
                0.0
            } else {
                (-e).exp()
            }
        },
        0.0,
        FRAC_PI_2,
        nolan_opts(),
    )?;
    let tail = if g > 1.0 {
        est.value / PI
    } else {
        0.5 - est.value / PI
    };
    Ok(tail.clamp(0.0, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Oscillatory Fourier inversion, independent of the Nolan route.
    fn pdf_by_inversion(law: &StableLaw, x: f64) -> f64 {
        let upper = (80.0 / law.b).powf(1.0 / law.gamma);
        let opts = QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_intervals: 20_000,
        };
        integrate(
            |t| (t * (x - law.a)).cos() * (-law.b * t.powf(law.gamma) / 2.0).exp(),
            0.0,
            upper,
            opts,
        )
        .unwrap()
        .value
            / PI
    }

    #[test]
    fn cf_fixtures() {
        let law = StableLaw::new(1.3, 0.7, 2.0).unwrap();
        assert_eq!(law.cf(0.0), Complex64::new(1.0, 0.0));
        let g = StableLaw::new(2.0, 0.0, 1.0).unwrap();
        assert!((g.cf(1.0).re - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn closed_forms_at_two_and_one() {
        let n = StableLaw::new(2.0, 1.0, 4.0).unwrap();
        assert!((n.cdf(1.0).unwrap() - 0.5).abs() < 1e-16);
        assert!((n.pdf(1.0).unwrap() - 1.0 / (8.0 * PI).sqrt()).abs() < 1e-15);
        // Standard Cauchy is a = 0, b = 2.
        let c = StableLaw::new(1.0, 0.0, 2.0).unwrap();
        assert!((c.pdf(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((c.cdf(1.0).unwrap() - 0.75).abs() < 1e-15);
        let x = 0.37;
        let closed_form = 2.0 * 2.0 / PI / (4.0 + 4.0 * x * x);
        assert!((c.pdf(x).unwrap() - closed_form).abs() < 1e-15);
    }

    #[test]
    fn nolan_density_matches_fourier_inversion() {
        for &(g, a, b) in &[(1.5, 0.0, 1.0), (0.8, 0.3, 2.0), (1.9, -1.0, 0.5)] {
            let law = StableLaw::new(g, a, b).unwrap();
            for &x in &[-3.0, -0.4, 0.0, 0.25, 1.0, 4.0] {
                let got = law.pdf(x).unwrap();
                let want = pdf_by_inversion(&law, x);
                assert!((got - want).abs() < 1e-8, "γ={g} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn nolan_cdf_integrates_density() {
        let law = StableLaw::new(1.5, 0.2, 1.0).unwrap();
        let mass = integrate(|x| law.pdf(x).unwrap(), -1.0, 2.0, QuadratureOptions::with_abs_tol(1e-11))
            .unwrap()
            .value;
        let diff = law.cdf(2.0).unwrap() - law.cdf(-1.0).unwrap();
        assert!((mass - diff).abs() < 1e-9);
        assert!((law.cdf(0.2).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sampler_is_deterministic() {
        let law = StableLaw::new(1.5, 0.0, 1.0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_eq!(law.sample(&mut r1).to_bits(), law.sample(&mut r2).to_bits());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableLaw::new(0.0, 0.0, 1.0).is_err());
        assert!(StableLaw::new(2.1, 0.0, 1.0).is_err());
        assert!(StableLaw::new(1.0, 0.0, 0.0).is_err());
    }
}
