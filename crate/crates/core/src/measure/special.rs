//! Closed-form distribution functions used by the density families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;
use statrs::function::erf::erfc_inv;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF; returns ±∞ at 0 and 1.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // One Newton step against the accurate CDF.
    let d = std_normal_pdf(x);
    if d > 0.0 {
        x - (std_normal_cdf(x) - p) / d
    } else {
        x
    }
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    std_normal_pdf((x - mean) / sd) / sd
}

pub fn normal_cdf(x: f64, mean: f64, var: f64) -> f64 {
    std_normal_cdf((x - mean) / var.sqrt())
}

/// Cauchy law with location `loc` and half-width `scale`.
pub fn cauchy_pdf(x: f64, loc: f64, scale: f64) -> f64 {
    let z = (x - loc) / scale;
    1.0 / (PI * scale * (1.0 + z * z))
}

pub fn cauchy_cdf(x: f64, loc: f64, scale: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 + ((x - loc) / scale).atan() / PI
}
