//! Interpolatory Chebyshev quadratures (Fejér's first rule, Clenshaw–Curtis)
//! and an adaptive Gauss–Kronrod integrator used for normalization constants.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebyshev::{chebyshev_extrema, chebyshev_zeros, check_interval, NodeFamily};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureKind {
    Fejer1,
    ClenshawCurtis,
}

impl QuadratureKind {
    /// The rule whose nodes coincide with a mesh of the given family.
    pub fn for_family(family: NodeFamily) -> Self {
        match family {
            NodeFamily::ZerosPlusLeftEndpoint => QuadratureKind::Fejer1,
            NodeFamily::Extrema => QuadratureKind::ClenshawCurtis,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Fejér's first rule on the `n` Chebyshev zeros of `interval`.
pub fn fejer1_rule(n: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs n >= 1".into()));
    }
    check_interval(interval)?;
    let half = 0.5 * (interval.1 - interval.0);
    let weights = (1..=n)
        .map(|k| {
            // node k (ascending) sits at angle π - θ_k; cos(2jθ) is symmetric so θ_k works
            let theta = (2 * k - 1) as f64 * PI / (2 * n) as f64;
            let s: f64 = (1..=n / 2)
                .map(|j| (2.0 * j as f64 * theta).cos() / (4.0 * (j * j) as f64 - 1.0))
                .sum();
            half * (2.0 / n as f64) * (1.0 - 2.0 * s)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::Fejer1,
        nodes: chebyshev_zeros(n, interval),
        weights,
        interval,
    })
}

/// Clenshaw–Curtis on the `n + 1` Chebyshev extrema of `interval`.
pub fn clenshaw_curtis_rule(n: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs n >= 1".into()));
    }
    check_interval(interval)?;
    let half = 0.5 * (interval.1 - interval.0);
    let weights = (0..=n)
        .map(|k| {
            let theta = k as f64 * PI / n as f64;
            let s: f64 = (1..=n / 2)
                .map(|j| {
                    let b = if 2 * j == n { 1.0 } else { 2.0 };
                    b * (2.0 * j as f64 * theta).cos() / (4.0 * (j * j) as f64 - 1.0)
                })
                .sum();
            let c = if k == 0 || k == n { 1.0 } else { 2.0 };
            half * (c / n as f64) * (1.0 - s)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::ClenshawCurtis,
        nodes: chebyshev_extrema(n, interval),
        weights,
        interval,
    })
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
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

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
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
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration.
///
/// Bisects the segment with the largest error estimate until the total estimate
/// is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_SEGMENTS: usize = 20_000;
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let (mut total, mut total_err) = (value, error);
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {total_err:.3e}"
            )));
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // segment at floating-point resolution; accept it as is
            total_err -= seg.error;
            heap.push(Segment { error: 0.0, ..seg });
            continue;
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated cancellation in `total`
    Ok(heap.iter().map(|s| s.value).sum())
}
