//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Integrands may be vector-valued so that one pass over the abscissae serves
//! a whole grid of outputs (the c.i.d. density check evaluates a predictive
//! once per inner node and reads it at every grid point). Infinite endpoints
//! are mapped onto a finite interval before subdivision.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`] and [`integrate_vec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadratureOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

/// Value and error estimate of a scalar integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

struct Segment {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, lo: f64, hi: f64, dim: usize) -> Segment
where
    F: FnMut(f64) -> Vec<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut abs = vec![0.0; dim];
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::with_capacity(15);

    let fc = f(center);
    for d in 0..dim {
        k[d] = WGK[7] * fc[d];
        g[d] = WG[3] * fc[d];
        abs[d] = (WGK[7] * fc[d]).abs();
    }
    samples.push((WGK[7], fc));
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for d in 0..dim {
            let s = f1[d] + f2[d];
            k[d] += WGK[j] * s;
            abs[d] += WGK[j] * (f1[d].abs() + f2[d].abs());
            if j % 2 == 1 {
                g[d] += WG[j / 2] * s;
            }
        }
        samples.push((WGK[j], f1));
        samples.push((WGK[j], f2));
    }

    let mut error: f64 = 0.0;
    let mut value = vec![0.0; dim];
    for d in 0..dim {
        let mean = 0.5 * k[d];
        let asc: f64 = samples
            .iter()
            .map(|(w, v)| w * (v[d] - mean).abs())
            .sum();
        let e = rescale_error(
            (k[d] - g[d]) * half,
            abs[d] * half.abs(),
            asc * half.abs(),
        );
        // NaN error must force subdivision or failure, never silent acceptance.
        error = if e.is_nan() { f64::INFINITY } else { error.max(e) };
        value[d] = k[d] * half;
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

fn adapt<F>(mut f: F, lo: f64, hi: f64, dim: usize, opts: QuadratureOptions) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, lo, hi, dim);
    let mut total = first.value.clone();
    let mut total_err = first.error;
    heap.push(first);

    loop {
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        if total_err <= target {
            return Ok((total, total_err));
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Integration {
                estimate: total_err,
                tolerance: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Interval can no longer be split in floating point.
            return Err(Error::Integration {
                estimate: total_err,
                tolerance: target,
            });
        }
        let left = kronrod(&mut f, worst.lo, mid, dim);
        let right = kronrod(&mut f, mid, worst.hi, dim);
        for (d, t) in total.iter_mut().enumerate() {
            *t += left.value[d] + right.value[d] - worst.value[d];
        }
        total_err = (total_err - worst.error).max(0.0) + left.error + right.error;
        if !total_err.is_finite() {
            // Recompute from the heap to avoid inf - inf poisoning.
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + left.error + right.error;
        }
        heap.push(left);
        heap.push(right);
    }
}

/// Integrates a vector-valued function over `[lo, hi]`, endpoints may be infinite.
pub fn integrate_vec<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    dim: usize,
    opts: QuadratureOptions,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if lo == hi {
        return Ok((vec![0.0; dim], 0.0));
    }
    if lo > hi {
        let (v, e) = integrate_vec(f, hi, lo, dim, opts)?;
        return Ok((v.into_iter().map(|x| -x).collect(), e));
    }
    // 0 * inf at the far ends of the mapped interval counts as 0.
    let scale = |v: Vec<f64>, w: f64| -> Vec<f64> {
        v.into_iter()
            .map(|x| if x == 0.0 || w == 0.0 { 0.0 } else { x * w })
            .collect()
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adapt(f, lo, hi, dim, opts),
        (false, false) => adapt(
            |t| {
                let d = 1.0 - t * t;
                let x = t / d;
                scale(f(x), (1.0 + t * t) / (d * d))
            },
            -1.0,
            1.0,
            dim,
            opts,
        ),
        (true, false) => adapt(
            |t| {
                let d = 1.0 - t;
                scale(f(lo + t / d), 1.0 / (d * d))
            },
            0.0,
            1.0,
            dim,
            opts,
        ),
        (false, true) => adapt(
            |t| {
                let d = 1.0 - t;
                scale(f(hi - t / d), 1.0 / (d * d))
            },
            0.0,
            1.0,
            dim,
            opts,
        ),
    }
}

/// Integrates a scalar function over `[lo, hi]`, endpoints may be infinite.
pub fn integrate<F>(f: F, lo: f64, hi: f64, opts: QuadratureOptions) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let (v, error) = integrate_vec(|x| vec![f(x)], lo, hi, 1, opts)?;
    Ok(Estimate {
        value: v[0],
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadratureOptions::default()).unwrap();
        assert!((e.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_real_line() {
        let e = integrate(
            |x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            QuadratureOptions::with_abs_tol(1e-12),
        )
        .unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn cauchy_half_lines() {
        let opts = QuadratureOptions::with_abs_tol(1e-10);
        let right = integrate(|x| 1.0 / (PI * (1.0 + x * x)), 1.0, f64::INFINITY, opts).unwrap();
        let left = integrate(|x| 1.0 / (PI * (1.0 + x * x)), f64::NEG_INFINITY, -1.0, opts).unwrap();
        assert!((right.value - 0.25).abs() < 1e-9);
        assert!((left.value - 0.25).abs() < 1e-9);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let e = integrate(|x| x, 1.0, 0.0, QuadratureOptions::default()).unwrap();
        assert!((e.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn vector_integrand() {
        let (v, _) = integrate_vec(|x| vec![1.0, x, x.sin()], 0.0, PI, 3, QuadratureOptions::default()).unwrap();
        assert!((v[0] - PI).abs() < 1e-12);
        assert!((v[1] - PI * PI / 2.0).abs() < 1e-12);
        assert!((v[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Integration { estimate, .. } if estimate > 1e-14));
    }
}
