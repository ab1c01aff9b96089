//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! The subinterval with the largest error estimate is bisected until the
//! summed estimate drops below `max(abs_tol, rel_tol * ∫|f|)`. Measuring the
//! relative tolerance against `∫|f|` keeps integrals that cancel to zero
//! (odd integrands on symmetric intervals) from looping forever.

use std::cmp::Ordering;
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        abs_value: abs_sum * half.abs(),
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`. Returns `value = 0` for an empty interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::QuadratureFailed {
            a,
            b,
            error: f64::INFINITY,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_value = first.abs_value;
    heap.push(first);

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * abs_value);
        if error <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailed { a, b, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureFailed { a, b, error });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        if !value.is_finite() {
            return Err(Error::QuadratureFailed {
                a,
                b,
                error: f64::INFINITY,
            });
        }
        heap.push(left);
        heap.push(right);
    }

    // resum to shed the drift of the incremental updates
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Quadrature {
        value,
        error,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((q.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let q = integrate(|x| (50.0 * x).sin(), 0.0, PI, QuadOptions::with_rel_tol(1e-12)).unwrap();
        assert!(q.value.abs() < 1e-10);
        let q = integrate(
            |x| 1.0 / (1e-4 + x * x),
            -1.0,
            1.0,
            QuadOptions::with_rel_tol(1e-12),
        )
        .unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!(((q.value - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let q = integrate(|x| x.sqrt(), 0.0, 1.0, QuadOptions::with_rel_tol(1e-10)).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let f = |x: f64| x.exp();
        let fwd = integrate(f, 0.0, 1.0, QuadOptions::default()).unwrap().value;
        let rev = integrate(f, 1.0, 0.0, QuadOptions::default()).unwrap().value;
        assert!((fwd + rev).abs() < 1e-14);
        assert_eq!(integrate(f, 0.5, 0.5, QuadOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn non_integrable_fails() {
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, QuadOptions::default());
        assert!(matches!(r, Err(Error::QuadratureFailed { .. })));
    }
}
