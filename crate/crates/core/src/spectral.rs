//! Next-generation matrices, their spectral radius and the dominant eigenfunction.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::DiscreteOperators;
use crate::chebyshev::{barycentric_diff_matrix, barycentric_eval, barycentric_weights};
use crate::error::{Error, Result};
use crate::linalg::Lu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OperatorOrder {
    /// `H = B M⁻¹`, acting on values of `Bψ`.
    #[default]
    BMinv,
    /// `H = M⁻¹ B`, acting on values of `ψ`.
    MinvB,
}

impl OperatorOrder {
    pub fn label(self) -> &'static str {
        match self {
            OperatorOrder::BMinv => "bm-inv",
            OperatorOrder::MinvB => "minv-b",
        }
    }
}

const SINGULAR_HINT: &str = "; the discrete transition operator is only guaranteed invertible for N large enough, try a larger N";

fn factor_m(ops: &DiscreteOperators) -> Result<Lu> {
    Lu::new(ops.m().as_ref(), "transition matrix M", SINGULAR_HINT)
}

fn nonzero_rows(a: &Mat<f64>) -> Vec<usize> {
    (0..a.nrows())
        .filter(|&i| (0..a.ncols()).any(|j| a[(i, j)] != 0.0))
        .collect()
}

fn nonzero_cols(a: &Mat<f64>) -> Vec<usize> {
    (0..a.ncols())
        .filter(|&j| (0..a.nrows()).any(|i| a[(i, j)] != 0.0))
        .collect()
}

fn ngm_with(ops: &DiscreteOperators, lu: &Lu, order: OperatorOrder) -> Mat<f64> {
    let b = ops.b();
    let n = b.nrows();
    let mut h = Mat::<f64>::zeros(n, n);
    match order {
        OperatorOrder::BMinv => {
            // rows of H solve Mᵀ h_i = b_i; zero rows of B stay zero
            let rows = nonzero_rows(b);
            let mut rhs = Mat::from_fn(n, rows.len(), |k, c| b[(rows[c], k)]);
            lu.solve_transpose_in_place(&mut rhs);
            for (c, &i) in rows.iter().enumerate() {
                for k in 0..n {
                    h[(i, k)] = rhs[(k, c)];
                }
            }
        }
        OperatorOrder::MinvB => {
            let cols = nonzero_cols(b);
            let mut rhs = Mat::from_fn(n, cols.len(), |k, c| b[(k, cols[c])]);
            lu.solve_in_place(&mut rhs);
            for (c, &j) in cols.iter().enumerate() {
                for k in 0..n {
                    h[(k, j)] = rhs[(k, c)];
                }
            }
        }
    }
    h
}

/// `B M⁻¹` or `M⁻¹ B`, by triangular solves against a single LU of `M`.
pub fn next_generation_matrix(ops: &DiscreteOperators, order: OperatorOrder) -> Result<Mat<f64>> {
    let lu = factor_m(ops)?;
    Ok(ngm_with(ops, &lu, order))
}

/// 1-norm condition estimate of `M`.
pub fn condition_m(ops: &DiscreteOperators) -> Result<f64> {
    Ok(factor_m(ops)?.condition_estimate())
}

fn submatrix(a: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Parlett–Reinsch balancing by powers of two: replaces `a` with `D⁻¹ a D`
/// and returns the diagonal of `D`. Eigenvalues are unchanged exactly.
fn balance(a: &mut Mat<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut scale = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Dominant eigenpair of the principal submatrix on `idx`, padded to the full size.
fn dominant(h: &Mat<f64>, idx: &[usize]) -> Result<(Complex64, Vec<Complex64>)> {
    let n = h.nrows();
    let zero = Complex64::new(0.0, 0.0);
    if idx.is_empty() {
        // everything deflated: H restricted here is zero
        let mut v = vec![zero; n];
        v[0] = Complex64::new(1.0, 0.0);
        return Ok((zero, v));
    }
    let sub = submatrix(h, idx);
    let rows: Vec<usize> = nonzero_rows(&sub).into_iter().map(|i| idx[i]).collect();
    if rows.len() < idx.len() {
        // zero rows: eigenvalues of the rest plus zeros, eigenvectors vanish on the zero rows
        if rows.is_empty() {
            let mut v = vec![zero; n];
            v[idx[0]] = Complex64::new(1.0, 0.0);
            return Ok((zero, v));
        }
        return dominant(h, &rows);
    }
    let cols: Vec<usize> = nonzero_cols(&sub).into_iter().map(|j| idx[j]).collect();
    if cols.len() < idx.len() {
        // zero columns: solve on the rest, recover the dropped entries from H x = λ x
        let dropped: Vec<usize> = idx.iter().copied().filter(|i| !cols.contains(i)).collect();
        if cols.is_empty() {
            let mut v = vec![zero; n];
            v[dropped[0]] = Complex64::new(1.0, 0.0);
            return Ok((zero, v));
        }
        let (lambda, mut v) = dominant(h, &cols)?;
        if lambda == zero {
            let mut v = vec![zero; n];
            v[dropped[0]] = Complex64::new(1.0, 0.0);
            return Ok((zero, v));
        }
        for &i in &dropped {
            let s: Complex64 = cols.iter().map(|&j| v[j] * h[(i, j)]).sum();
            v[i] = s / lambda;
        }
        return Ok((lambda, v));
    }

    let (mut lambda, mut u) = dense_pair(&sub, true)?;
    let mut res = residual(&sub, lambda, &u);
    let hnorm = (0..sub.ncols())
        .flat_map(|j| (0..sub.nrows()).map(move |i| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(sub[(i, j)].abs()));
    if res > 1e-13 * hnorm.max(1.0) {
        // balancing can blow up rounding-level columns; keep whichever pair is better
        let (l2, u2) = dense_pair(&sub, false)?;
        let r2 = residual(&sub, l2, &u2);
        if r2 < res {
            (lambda, u, res) = (l2, u2, r2);
        }
    }
    log::trace!("dense eigenpair on {} unknowns, residual {res:e}", idx.len());
    let mut v = vec![zero; n];
    for (k, &i) in idx.iter().enumerate() {
        v[i] = u[k];
    }
    Ok((lambda, v))
}

fn dense_pair(a: &Mat<f64>, balanced: bool) -> Result<(Complex64, Vec<Complex64>)> {
    let mut sub = a.clone();
    let scale = if balanced { balance(&mut sub) } else { vec![1.0; a.nrows()] };
    let evd = sub
        .eigen()
        .map_err(|e| Error::NoConvergence(format!("dense eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let m = a.nrows();
    let max_mod = (0..m).map(|i| s[i].norm()).fold(0.0, f64::max);
    let mut best = 0;
    for i in 0..m {
        let (li, lb) = (s[i], s[best]);
        let tie = (li.norm() - max_mod).abs() <= 1e-12 * max_mod;
        let best_tie = (lb.norm() - max_mod).abs() <= 1e-12 * max_mod;
        if (tie && !best_tie) || (tie && best_tie && li.re > lb.re) {
            best = i;
        }
    }
    let u = evd.U();
    let v = (0..m)
        .map(|k| Complex64::new(u[(k, best)].re, u[(k, best)].im) * scale[k])
        .collect();
    Ok((Complex64::new(s[best].re, s[best].im), v))
}

/// Scales to unit max-modulus with the first significant entry real positive.
fn normalize(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().find(|z| z.norm() > 1e-8 * max).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in v.iter_mut() {
        *z /= max;
        if z.im == 0.0 {
            // avoid printing -0
            z.im = 0.0;
        }
    }
}

/// `‖H v − λ v‖∞ / ‖v‖∞`.
pub fn residual(h: &Mat<f64>, lambda: Complex64, v: &[Complex64]) -> f64 {
    let n = h.nrows();
    let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut r: f64 = 0.0;
    for i in 0..n {
        let mut s = -lambda * v[i];
        for j in 0..n {
            let hij = h[(i, j)];
            if hij != 0.0 {
                s += v[j] * hij;
            }
        }
        r = r.max(s.norm());
    }
    if vmax > 0.0 {
        r / vmax
    } else {
        r
    }
}

/// Eigenvalue of largest modulus (ties broken toward the largest real part)
/// and a normalized eigenvector, from the full dense spectrum.
///
/// Exactly zero rows or columns are deflated before the dense solve.
pub fn spectral_radius(h: &Mat<f64>) -> Result<(Complex64, Vec<Complex64>)> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}×{}, expected square",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if (0..h.ncols()).any(|j| (0..h.nrows()).any(|i| !h[(i, j)].is_finite())) {
        return Err(Error::NoConvergence("matrix has non-finite entries".into()));
    }
    let all: Vec<usize> = (0..h.nrows()).collect();
    let (lambda, mut v) = dominant(h, &all)?;
    normalize(&mut v);
    Ok((lambda, v))
}

/// Power iteration from the all-ones vector with a Rayleigh-quotient estimate.
///
/// Returns the estimate, the final iterate (unit max-norm) and the number of
/// matrix-vector products.
pub fn power_iteration(h: &Mat<f64>, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, usize)> {
    let n = h.nrows();
    let mut x = vec![1.0; n];
    let mut prev = f64::NAN;
    for it in 1..=max_iter {
        let y: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| h[(i, j)] * x[j]).sum())
            .collect();
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let lambda = xy / xx;
        let ymax = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if ymax == 0.0 {
            return Ok((0.0, x, it));
        }
        x = y.iter().map(|v| v / ymax).collect();
        if (lambda - prev).abs() <= tol * lambda.abs() {
            return Ok((lambda, x, it));
        }
        prev = lambda;
    }
    Err(Error::NoConvergence(format!(
        "power iteration did not converge in {max_iter} iterations"
    )))
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Spectral radius `|λ|`.
    pub r_n: f64,
    pub eigenvalue: Complex64,
    /// Normalized dominant eigenvector, node-major.
    pub eigenvector: Vec<Complex64>,
    pub residual: f64,
    pub ordering: OperatorOrder,
    /// 1-norm condition estimate of `M`.
    pub cond_m: f64,
}

/// Factor `M`, form `H` in the given order and take its dominant eigenpair.
pub fn reproduction_number(ops: &DiscreteOperators, order: OperatorOrder) -> Result<SpectralResult> {
    let lu = factor_m(ops)?;
    let cond_m = lu.condition_estimate();
    let h = ngm_with(ops, &lu, order);
    let (eigenvalue, eigenvector) = spectral_radius(&h)?;
    let r_n = eigenvalue.norm();
    let res = residual(&h, eigenvalue, &eigenvector);
    if res > 1e-8 * r_n.max(1.0) {
        return Err(Error::NoConvergence(format!(
            "dominant eigenpair residual {res:.3e} exceeds 1e-8"
        )));
    }
    if r_n > 0.0 && eigenvalue.im.abs() > 1e-10 * r_n {
        log::warn!("dominant eigenvalue {eigenvalue} is not real");
    }
    log::debug!(
        "R_N = {r_n:.16e} ({}), size {}, cond(M) = {cond_m:.3e}",
        order.label(),
        h.nrows()
    );
    Ok(SpectralResult {
        r_n,
        eigenvalue,
        eigenvector,
        residual: res,
        ordering: order,
        cond_m,
    })
}

#[derive(Debug, Clone)]
struct EfPiece {
    interval: (f64, f64),
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `[component][node]`
    values: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
}

/// Piecewise polynomial eigenfunction `y_N` and its density `x_N = y_N'`.
///
/// With `B M⁻¹` the eigenvector holds values of `Bψ`, which need not vanish at
/// 0, so each piece interpolates its interior values only. With `M⁻¹ B` it holds
/// values of `ψ`, interpolated together with the accumulated left value
/// (zero at `a = 0`). Real parts of the normalized eigenvector are used.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    d: usize,
    pieces: Vec<EfPiece>,
}

pub fn eigenfunction(result: &SpectralResult, ops: &DiscreteOperators) -> Result<Eigenfunction> {
    let d = ops.d();
    if result.eigenvector.len() != ops.dim() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector of length {} for operators of size {}",
            result.eigenvector.len(),
            ops.dim()
        )));
    }
    let v: Vec<f64> = result.eigenvector.iter().map(|z| z.re).collect();
    let mut pieces = Vec::new();
    let mut offset = 0;
    for (s, mesh) in ops.meshes().iter().enumerate() {
        let nn = mesh.n_interior();
        let local = |c: usize| -> Vec<f64> { (0..nn).map(|j| v[(offset + j) * d + c]).collect() };
        let (nodes, values): (Vec<f64>, Vec<Vec<f64>>) = match result.ordering {
            OperatorOrder::BMinv => (mesh.interior_nodes().to_vec(), (0..d).map(local).collect()),
            OperatorOrder::MinvB => {
                let left = ops.left_value_map(s);
                let values = (0..d)
                    .map(|c| {
                        let l: f64 = left
                            .iter()
                            .enumerate()
                            .filter(|(_, w)| **w != 0.0)
                            .map(|(j, w)| w * v[j * d + c])
                            .sum();
                        let mut vals = vec![l];
                        vals.extend(local(c));
                        vals
                    })
                    .collect();
                (mesh.nodes().to_vec(), values)
            }
        };
        let weights = barycentric_weights(&nodes, mesh.interval());
        let dm = barycentric_diff_matrix(&nodes, &weights);
        let slopes = values
            .iter()
            .map(|vals| {
                (0..nodes.len())
                    .map(|i| (0..nodes.len()).map(|j| dm[(i, j)] * vals[j]).sum())
                    .collect()
            })
            .collect();
        pieces.push(EfPiece {
            interval: mesh.interval(),
            nodes,
            weights,
            values,
            slopes,
        });
        offset += nn;
    }
    Ok(Eigenfunction { d, pieces })
}

impl Eigenfunction {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.pieces[0].interval.0, self.pieces.last().unwrap().interval.1)
    }

    fn piece(&self, a: f64) -> Result<&EfPiece> {
        let (lo, hi) = self.interval();
        if !(a >= lo && a <= hi) {
            return Err(Error::OutOfRange { x: a, lo, hi });
        }
        Ok(self
            .pieces
            .iter()
            .rev()
            .find(|p| p.interval.0 <= a)
            .unwrap_or(&self.pieces[0]))
    }

    /// `y_N(a)`, one value per component.
    pub fn y(&self, a: f64) -> Result<Vec<f64>> {
        let p = self.piece(a)?;
        Ok(p.values
            .iter()
            .map(|vals| barycentric_eval(&p.nodes, &p.weights, vals, a))
            .collect())
    }

    /// `x_N(a) = y_N'(a)`, one value per component.
    pub fn x(&self, a: f64) -> Result<Vec<f64>> {
        let p = self.piece(a)?;
        Ok(p.slopes
            .iter()
            .map(|vals| barycentric_eval(&p.nodes, &p.weights, vals, a))
            .collect())
    }

    /// CSV with columns `a, y_1..y_d, x_1..x_d` on `points` uniform ages.
    pub fn to_csv(&self, points: usize) -> Result<String> {
        if points < 2 {
            return Err(Error::InvalidArgument("need at least 2 grid points".into()));
        }
        let (lo, hi) = self.interval();
        let mut s = String::from("a");
        for c in 1..=self.d {
            write!(s, ",y_{c}").unwrap();
        }
        for c in 1..=self.d {
            write!(s, ",x_{c}").unwrap();
        }
        s.push('\n');
        for i in 0..points {
            let a = if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            };
            write!(s, "{a:.16e}").unwrap();
            for v in self.y(a)?.into_iter().chain(self.x(a)?) {
                write!(s, ",{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        Ok(s)
    }
}
