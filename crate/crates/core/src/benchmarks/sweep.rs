//! Convergence sweeps over `N`, empirical orders and parameter scans.

use std::fmt::Write as _;
use std::time::Instant;

use crate::assembly::{assemble_with, meshes_on, DiscreteOperators};
use crate::chebyshev::NodeFamily;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{split, CoefficientSet, Model, SplittingSpec};
use crate::spectral::{reproduction_number, OperatorOrder, SpectralResult};

/// Sub-interval boundaries: `pieces` equal parts of `[0, a†]` merged with the
/// coefficient breakpoints.
pub fn boundaries(breakpoints: &[f64], a_dagger: f64, pieces: usize) -> Vec<f64> {
    let pieces = pieces.max(1);
    let mut b: Vec<f64> = (0..=pieces)
        .map(|i| if i == pieces { a_dagger } else { a_dagger * i as f64 / pieces as f64 })
        .chain(breakpoints.iter().copied())
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Assemble on one mesh of `n` interior nodes per sub-interval.
pub fn discretize(
    coeffs: &CoefficientSet,
    family: NodeFamily,
    n: usize,
    pieces: usize,
    exec: Execution,
) -> Result<DiscreteOperators> {
    let bounds = boundaries(&coeffs.breakpoints, coeffs.a_dagger, pieces);
    let meshes = meshes_on(family, n, &bounds)?;
    assemble_with(coeffs, &meshes, true, exec)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub r_bminv: Option<f64>,
    pub r_minvb: Option<f64>,
    pub cond_m: Option<f64>,
    pub runtime_ms: f64,
    /// Failure message when this `N` could not be computed.
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn r(&self, order: OperatorOrder) -> Option<f64> {
        match order {
            OperatorOrder::BMinv => self.r_bminv,
            OperatorOrder::MinvB => self.r_minvb,
        }
    }
}

/// Least-squares fit `log err ≈ log C − p log N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    /// RMS residual of the fit in natural-log units.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_order(ns: &[usize], errors: &[f64]) -> Option<OrderFit> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Some(OrderFit {
        order: -slope,
        residual: (rss / m).sqrt(),
        points: pts.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    pub reference: f64,
    /// Where the reference comes from, e.g. `exact` or `N = 120`.
    pub reference_source: String,
    /// Ordering whose error is reported in `abs_err`.
    pub ordering: OperatorOrder,
    /// Range of `N` used for fitting, inclusive.
    pub window: (usize, usize),
    pub fit_bminv: Option<OrderFit>,
    pub fit_minvb: Option<OrderFit>,
}

impl ConvergenceReport {
    pub fn abs_err(&self, row: &SweepRow, order: OperatorOrder) -> Option<f64> {
        row.r(order).map(|r| (r - self.reference).abs())
    }

    pub fn fit(&self, order: OperatorOrder) -> Option<OrderFit> {
        match order {
            OperatorOrder::BMinv => self.fit_bminv,
            OperatorOrder::MinvB => self.fit_minvb,
        }
    }

    /// CSV with columns `N, R_N_BMinv, R_N_MinvB, abs_err, fitted_order, cond_M, runtime_ms`.
    /// Missing values and (unless `timing`) run times are written as `NA`.
    pub fn to_csv(&self, timing: bool) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.16e}"));
        let order = self.fit(self.ordering).map(|f| f.order);
        let mut s = String::from("N,R_N_BMinv,R_N_MinvB,abs_err,fitted_order,cond_M,runtime_ms\n");
        for row in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                row.n,
                num(row.r_bminv),
                num(row.r_minvb),
                num(self.abs_err(row, self.ordering)),
                num(order),
                num(row.cond_m),
                if timing { format!("{:.3}", row.runtime_ms) } else { "NA".into() }
            )
            .unwrap();
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "reference R = {:.16e} ({})", self.reference, self.reference_source).unwrap();
        writeln!(s, "fit window N = {}..{}", self.window.0, self.window.1).unwrap();
        for order in [OperatorOrder::BMinv, OperatorOrder::MinvB] {
            match self.fit(order) {
                Some(f) => writeln!(
                    s,
                    "{}: fitted order {:.4} (rms residual {:.3e}, {} points)",
                    order.label(),
                    f.order,
                    f.residual,
                    f.points
                )
                .unwrap(),
                None => writeln!(s, "{}: no fit", order.label()).unwrap(),
            }
        }
        let total: f64 = self.rows.iter().map(|r| r.runtime_ms).sum();
        writeln!(s, "total runtime {total:.1} ms").unwrap();
        for row in &self.rows {
            if let Some(msg) = &row.failure {
                writeln!(s, "N = {}: failed: {msg}", row.n).unwrap();
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub family: NodeFamily,
    pub ordering: OperatorOrder,
    pub pieces: usize,
    /// Inclusive `N` range for fitting; defaults to the last half of the list.
    pub window: Option<(usize, usize)>,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            family: NodeFamily::ZerosPlusLeftEndpoint,
            ordering: OperatorOrder::BMinv,
            pieces: 1,
            window: None,
            exec: Execution::default(),
        }
    }
}

/// Both orderings from one assembly.
pub fn solve_both(ops: &DiscreteOperators) -> Result<(SpectralResult, SpectralResult)> {
    Ok((
        reproduction_number(ops, OperatorOrder::BMinv)?,
        reproduction_number(ops, OperatorOrder::MinvB)?,
    ))
}

fn sweep_row(coeffs: &CoefficientSet, n: usize, opts: &SweepOptions, inner: Execution) -> SweepRow {
    let start = Instant::now();
    let out = discretize(coeffs, opts.family, n, opts.pieces, inner).and_then(|ops| solve_both(&ops));
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok((a, b)) => SweepRow {
            n,
            r_bminv: Some(a.r_n),
            r_minvb: Some(b.r_n),
            cond_m: Some(a.cond_m),
            runtime_ms,
            failure: None,
        },
        Err(e) => SweepRow {
            n,
            r_bminv: None,
            r_minvb: None,
            cond_m: None,
            runtime_ms,
            failure: Some(e.to_string()),
        },
    }
}

/// Computes `R_N` for every `N` (both orderings) and fits convergence orders
/// against `reference`. Failures are recorded per row.
pub fn convergence_sweep(
    model: &Model,
    splitting: &SplittingSpec,
    ns: &[usize],
    reference: f64,
    reference_source: &str,
    opts: &SweepOptions,
) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    let coeffs = split(model, splitting)?;
    // parallelize across N; each cell runs its dense kernels sequentially
    let rows = opts.exec.map(ns, |&n| sweep_row(&coeffs, n, opts, Execution::Sequential));
    let window = opts.window.unwrap_or_else(|| {
        let mut sorted = ns.to_vec();
        sorted.sort_unstable();
        (sorted[sorted.len() / 2], *sorted.last().unwrap())
    });
    let fit = |order: OperatorOrder| {
        let (wn, we): (Vec<usize>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.n >= window.0 && r.n <= window.1)
            .filter_map(|r| r.r(order).map(|v| (r.n, (v - reference).abs())))
            .unzip();
        fit_order(&wn, &we)
    };
    Ok(ConvergenceReport {
        fit_bminv: fit(OperatorOrder::BMinv),
        fit_minvb: fit(OperatorOrder::MinvB),
        rows,
        reference,
        reference_source: reference_source.to_string(),
        ordering: opts.ordering,
        window,
    })
}

/// `R_N` on a `ν × θ` grid; `values[i][j]` belongs to `(nu[i], theta[j])`.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub nu: Vec<f64>,
    pub theta: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl ScanResult {
    /// Long-format CSV `nu, theta, R_N` with `NA` for failed cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("nu,theta,R_N\n");
        for (i, nu) in self.nu.iter().enumerate() {
            for (j, th) in self.theta.iter().enumerate() {
                let v = self.values[i][j].map_or_else(|| "NA".to_string(), |v| format!("{v:.16e}"));
                writeln!(s, "{nu:.16e},{th:.16e},{v}").unwrap();
            }
        }
        s
    }
}

/// Reproduction numbers for every grid cell of a two-parameter model family.
pub fn parameter_scan_r0<F>(
    factory: F,
    nu_grid: &[f64],
    theta_grid: &[f64],
    splitting: &SplittingSpec,
    n: usize,
    opts: &SweepOptions,
) -> ScanResult
where
    F: Fn(f64, f64) -> Result<Model> + Sync + Send,
{
    let cells: Vec<(f64, f64)> = nu_grid
        .iter()
        .flat_map(|&nu| theta_grid.iter().map(move |&th| (nu, th)))
        .collect();
    let flat = opts.exec.map(&cells, |&(nu, th)| {
        let r = factory(nu, th)
            .and_then(|m| split(&m, splitting))
            .and_then(|c| discretize(&c, opts.family, n, opts.pieces, Execution::Sequential))
            .and_then(|ops| reproduction_number(&ops, opts.ordering));
        match r {
            Ok(r) => Some(r.r_n),
            Err(e) => {
                log::warn!("scan cell (nu = {nu}, theta = {th}) failed: {e}");
                None
            }
        }
    });
    let values = flat.chunks(theta_grid.len().max(1)).map(<[_]>::to_vec).collect();
    ScanResult {
        nu: nu_grid.to_vec(),
        theta: theta_grid.to_vec(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let ns = [10, 20, 40, 80];
        let errs: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-4.0)).collect();
        let f = fit_order(&ns, &errs).unwrap();
        assert!((f.order - 4.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert_eq!(f.points, 4);
        assert!(fit_order(&[10], &[1e-3]).is_none());
    }

    #[test]
    fn boundaries_merge_breakpoints() {
        assert_eq!(boundaries(&[0.0, 18.0, 75.0], 75.0, 1), vec![0.0, 18.0, 75.0]);
        assert_eq!(
            boundaries(&[0.0, 30.0], 30.0, 6),
            vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
        );
    }
}
