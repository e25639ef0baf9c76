//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are bisected worst-error-first until the summed error estimate
//! meets `max(abs_tol, rel_tol·|I|)`. Infinite ranges are mapped onto finite
//! ones; the Kronrod nodes never touch the endpoints, so the mapped
//! integrand is never evaluated at its singular point.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const MAX_INTERVALS: usize = 4000;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
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

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// ∫ₐᵇ f(x) dx over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let (value, error) = kronrod(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::numerical("quadrature", "integrand produced a non-finite value"));
        }
        if heap.len() >= MAX_INTERVALS {
            // Accept when the remaining error is tiny relative to the scale we can resolve.
            if total_err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
                break;
            }
            return Err(Error::numerical(
                "quadrature",
                format!("no convergence: estimate {total:e}, error {total_err:e}"),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = kronrod(&mut f, worst.a, mid);
        let (rv, re) = kronrod(&mut f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    if !value.is_finite() {
        return Err(Error::numerical("quadrature", "integrand produced a non-finite value"));
    }
    Ok(Estimate { value, error })
}

/// ∫ₐ^∞ f(x) dx via x = a + t/(1 − t).
pub fn integrate_from<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    integrate(
        |t| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// ∫_{−∞}^b f(x) dx.
pub fn integrate_to<F: FnMut(f64) -> f64>(
    mut f: F,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    integrate_from(|x| f(-x), -b, abs_tol, rel_tol)
}

/// ∫_ℝ f(x) dx via x = t/(1 − t²).
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    integrate(
        |t| {
            let s = 1.0 - t * t;
            f(t / s) * (1.0 + t * t) / (s * s)
        },
        -1.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
