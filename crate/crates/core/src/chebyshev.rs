//! Chebyshev meshes, barycentric interpolation and the differentiation
//! matrix on the extended mesh `{a₀} ∪ interior nodes`.
//!
//! Nodes are always stored in ascending order. For [`NodeFamily::ZerosPlusLeftEndpoint`]
//! the interior nodes are the zeros of `T_N` and `a₀` is the left endpoint; for
//! [`NodeFamily::Extrema`] all `N + 1` extremal points of `T_N` are used, so `a₀`
//! and `a_N` are the interval endpoints.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeFamily {
    /// `N` Chebyshev zeros plus the left endpoint.
    ZerosPlusLeftEndpoint,
    /// `N + 1` Chebyshev extremal points (both endpoints included).
    Extrema,
}

impl NodeFamily {
    pub fn label(self) -> &'static str {
        match self {
            NodeFamily::ZerosPlusLeftEndpoint => "zeros",
            NodeFamily::Extrema => "extrema",
        }
    }
}

/// Values that can be interpolated: real or complex samples.
pub trait Sample:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Div<f64, Output = Self>
{
    fn zero() -> Self;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

pub(crate) fn check_interval(interval: (f64, f64)) -> Result<()> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "degenerate interval [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "number of nodes must be positive".into(),
        ));
    }
    Ok(())
}

fn map_to(interval: (f64, f64), t: f64) -> f64 {
    let (lo, hi) = interval;
    lo + 0.5 * (t + 1.0) * (hi - lo)
}

/// The `n` zeros of `T_n` mapped to `interval`, ascending.
pub fn chebyshev_zeros(n: usize, interval: (f64, f64)) -> Vec<f64> {
    // sin form keeps the reference nodes exactly antisymmetric
    (1..=n)
        .map(|k| {
            let t = (PI * (2.0 * k as f64 - n as f64 - 1.0) / (2.0 * n as f64)).sin();
            map_to(interval, t)
        })
        .collect()
}

/// The `n + 1` extrema of `T_n` mapped to `interval`, ascending, endpoints exact.
pub fn chebyshev_extrema(n: usize, interval: (f64, f64)) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=n)
        .map(|k| {
            let t = (PI * (2.0 * k as f64 - n as f64) / (2.0 * n as f64)).sin();
            map_to(interval, t)
        })
        .collect();
    nodes[0] = interval.0;
    nodes[n] = interval.1;
    nodes
}

/// Barycentric weights for arbitrary distinct nodes, normalized to max modulus one.
///
/// Products are formed on the reference interval `[-1, 1]` to stay clear of
/// overflow on long age intervals.
pub(crate) fn barycentric_weights(nodes: &[f64], interval: (f64, f64)) -> Vec<f64> {
    let scale = 2.0 / (interval.1 - interval.0);
    let t: Vec<f64> = nodes.iter().map(|&x| (x - interval.0) * scale).collect();
    let mut w: Vec<f64> = (0..t.len())
        .map(|j| {
            let p: f64 = t
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &tk)| t[j] - tk)
                .product();
            1.0 / p
        })
        .collect();
    let wmax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v /= wmax);
    w
}

/// Second-form barycentric evaluation. Returns `values[j]` exactly at node `j`.
pub(crate) fn barycentric_eval<T: Sample>(nodes: &[f64], weights: &[f64], values: &[T], x: f64) -> T {
    let mut num = T::zero();
    let mut den = 0.0;
    for ((&xj, &wj), &vj) in nodes.iter().zip(weights).zip(values) {
        let diff = x - xj;
        if diff == 0.0 {
            return vj;
        }
        let c = wj / diff;
        num = num + vj * c;
        den += c;
    }
    num / den
}

/// Cardinal function values `ℓ_j(x)` for every node.
pub(crate) fn cardinal_values(nodes: &[f64], weights: &[f64], x: f64) -> Vec<f64> {
    if let Some(i) = nodes.iter().position(|&xj| xj == x) {
        let mut e = vec![0.0; nodes.len()];
        e[i] = 1.0;
        return e;
    }
    let c: Vec<f64> = nodes.iter().zip(weights).map(|(&xj, &wj)| wj / (x - xj)).collect();
    let den: f64 = c.iter().sum();
    c.into_iter().map(|v| v / den).collect()
}

/// Full differentiation matrix `D_ij = ℓ_j'(x_i)` (negative-sum diagonal).
pub(crate) fn barycentric_diff_matrix(nodes: &[f64], weights: &[f64]) -> Mat<f64> {
    let n = nodes.len();
    let mut d = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

fn apply<T: Sample>(m: &Mat<f64>, v: &[T]) -> Vec<T> {
    (0..m.nrows())
        .map(|i| {
            v.iter()
                .enumerate()
                .fold(T::zero(), |acc, (j, &vj)| acc + vj * m[(i, j)])
        })
        .collect()
}

/// Chebyshev-type collocation mesh `a₀ < a₁ < … < a_N` on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationMesh {
    family: NodeFamily,
    interval: (f64, f64),
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CollocationMesh {
    pub fn new(family: NodeFamily, n: usize, interval: (f64, f64)) -> Result<Self> {
        check_n(n)?;
        check_interval(interval)?;
        let nodes = match family {
            NodeFamily::ZerosPlusLeftEndpoint => {
                let mut v = Vec::with_capacity(n + 1);
                v.push(interval.0);
                v.extend(chebyshev_zeros(n, interval));
                v
            }
            NodeFamily::Extrema => chebyshev_extrema(n, interval),
        };
        let weights = barycentric_weights(&nodes, interval);
        Ok(Self {
            family,
            interval,
            n,
            nodes,
            weights,
        })
    }

    pub fn family(&self) -> NodeFamily {
        self.family
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Number of interior (collocation) nodes `N`.
    pub fn n_interior(&self) -> usize {
        self.n
    }

    /// All `N + 1` nodes, `a₀` first.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The collocation nodes `a₁ … a_N`.
    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..]
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_point(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        Ok(())
    }

    fn check_values(&self, len: usize) -> Result<()> {
        if len != self.nodes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{len} values for a mesh with {} nodes",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    /// Lagrange interpolant through `(nodes, values)` evaluated at `x`.
    pub fn interpolate<T: Sample>(&self, values: &[T], x: f64) -> Result<T> {
        self.check_values(values.len())?;
        self.check_point(x)?;
        Ok(barycentric_eval(&self.nodes, &self.weights, values, x))
    }

    /// Derivative of the interpolant at `x`.
    ///
    /// The derivative is a polynomial of degree `N - 1`, so it is recovered
    /// exactly by interpolating its node values on the same mesh.
    pub fn interpolant_derivative<T: Sample>(&self, values: &[T], x: f64) -> Result<T> {
        self.check_values(values.len())?;
        self.check_point(x)?;
        let slopes = self.derivative_values(values);
        Ok(barycentric_eval(&self.nodes, &self.weights, &slopes, x))
    }

    /// Node values of the interpolant's derivative.
    pub fn derivative_values<T: Sample>(&self, values: &[T]) -> Vec<T> {
        apply(&self.full_diff_matrix(), values)
    }

    /// `ℓ_{0,j}(x)` for `j = 0 … N`.
    pub fn cardinal_values(&self, x: f64) -> Vec<f64> {
        cardinal_values(&self.nodes, &self.weights, x)
    }

    pub(crate) fn full_diff_matrix(&self) -> Mat<f64> {
        barycentric_diff_matrix(&self.nodes, &self.weights)
    }
}

/// Shorthand for [`CollocationMesh::new`].
pub fn build_mesh(family: NodeFamily, n: usize, interval: (f64, f64)) -> Result<CollocationMesh> {
    CollocationMesh::new(family, n, interval)
}

/// `D_ij = ℓ'_{0,j}(a_i)` for `i, j = 1 … N`, together with the full
/// `(N+1) × (N+1)` matrix that also covers the node `a₀`.
#[derive(Debug, Clone)]
pub struct DifferentiationMatrix {
    entries: Mat<f64>,
    full: Mat<f64>,
    mesh: CollocationMesh,
}

impl DifferentiationMatrix {
    pub fn entries(&self) -> &Mat<f64> {
        &self.entries
    }

    /// Rows and columns for all `N + 1` nodes.
    pub fn full(&self) -> &Mat<f64> {
        &self.full
    }

    pub fn mesh(&self) -> &CollocationMesh {
        &self.mesh
    }

    /// Apply to interior-node samples.
    pub fn apply(&self, interior: &[f64]) -> Vec<f64> {
        apply(&self.entries, interior)
    }
}

pub fn differentiation_matrix(mesh: &CollocationMesh) -> DifferentiationMatrix {
    let full = mesh.full_diff_matrix();
    let n = mesh.n_interior();
    let entries = Mat::from_fn(n, n, |i, j| full[(i + 1, j + 1)]);
    DifferentiationMatrix {
        entries,
        full,
        mesh: mesh.clone(),
    }
}

/// Rows of `D⁻¹`: row `i` integrates interior samples over `[a₀, a_i]`.
#[derive(Debug, Clone)]
pub struct PartialIntegralWeights {
    entries: Mat<f64>,
    condition: f64,
    mesh: CollocationMesh,
}

impl PartialIntegralWeights {
    pub fn entries(&self) -> &Mat<f64> {
        &self.entries
    }

    /// 1-norm condition number of the differentiation matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn mesh(&self) -> &CollocationMesh {
        &self.mesh
    }

    /// `∫_{a₀}^{a_i} q` for every interior node, from interior samples of `q`.
    pub fn apply(&self, interior: &[f64]) -> Vec<f64> {
        apply(&self.entries, interior)
    }
}

pub fn partial_integral_weights(d: &DifferentiationMatrix) -> Result<PartialIntegralWeights> {
    let lu = Lu::new(
        d.entries.as_ref(),
        "differentiation matrix",
        "; try a different mesh size",
    )?;
    let entries = lu.inverse();
    let condition = linalg::norm1(d.entries.as_ref()) * linalg::norm1(entries.as_ref());
    log::debug!(
        "partial integral weights: N = {}, cond1(D) = {condition:.3e}",
        d.mesh.n_interior()
    );
    Ok(PartialIntegralWeights {
        entries,
        condition,
        mesh: d.mesh.clone(),
    })
}
