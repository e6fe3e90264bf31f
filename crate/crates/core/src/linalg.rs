//! Thin layer over faer's dense LU with singularity detection and a 1-norm
//! condition estimate.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub(crate) struct Lu {
    lu: PartialPivLu<f64>,
    n: usize,
    norm1: f64,
}

impl Lu {
    /// Factor `m`, failing with [`Error::SingularMatrix`] when a pivot collapses.
    pub(crate) fn new(m: MatRef<'_, f64>, what: &'static str, hint: &'static str) -> Result<Self> {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let norm1 = norm1(m);
        if !norm1.is_finite() {
            return Err(Error::SingularMatrix { what, size: n, hint });
        }
        let lu = m.partial_piv_lu();
        let u = lu.U();
        let mut min_piv = f64::INFINITY;
        let mut max_piv = 0.0_f64;
        for i in 0..n {
            let p = u[(i, i)].abs();
            min_piv = min_piv.min(p);
            max_piv = max_piv.max(p);
        }
        if n > 0 && (max_piv == 0.0 || min_piv <= (n as f64) * f64::EPSILON * max_piv) {
            return Err(Error::SingularMatrix { what, size: n, hint });
        }
        Ok(Self { lu, n, norm1 })
    }

    pub(crate) fn solve_in_place(&self, rhs: &mut Mat<f64>) {
        self.lu.solve_in_place(rhs.as_mut());
    }

    pub(crate) fn solve_transpose_in_place(&self, rhs: &mut Mat<f64>) {
        self.lu.solve_transpose_in_place(rhs.as_mut());
    }

    pub(crate) fn inverse(&self) -> Mat<f64> {
        let mut id = Mat::<f64>::identity(self.n, self.n);
        self.solve_in_place(&mut id);
        id
    }

    /// Hager's estimate of `‖A‖₁ ‖A⁻¹‖₁`.
    pub(crate) fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / n as f64);
        let mut est = 0.0;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            est = (0..n).map(|i| y[(i, 0)].abs()).sum::<f64>();
            let mut z = Mat::<f64>::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
            self.solve_transpose_in_place(&mut z);
            let (mut jmax, mut zmax) = (0, 0.0);
            let mut ztx = 0.0;
            for i in 0..n {
                ztx += z[(i, 0)] * x[(i, 0)];
                if z[(i, 0)].abs() > zmax {
                    zmax = z[(i, 0)].abs();
                    jmax = i;
                }
            }
            if zmax <= ztx {
                break;
            }
            x = Mat::<f64>::zeros(n, 1);
            x[(jmax, 0)] = 1.0;
        }
        est * self.norm1
    }
}

pub(crate) fn norm1(m: MatRef<'_, f64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
