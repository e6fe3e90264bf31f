//! Scalar model with a rank-one birth kernel `β(a, α) = q(a)(a† − α)/c`,
//! no boundary births and constant recovery `δ = −γ`. The normalization `c`
//! makes `R = 1` exactly, with eigenfunction `ψ(a) = ∫₀^a q`.

use faer::Mat;

use crate::assembly::DiscreteOperators;
use crate::chebyshev::{barycentric_diff_matrix, barycentric_eval, barycentric_weights};
use crate::error::{Error, Result};
use crate::expr::{parse_coefficient, EvalContext, Expr};
use crate::model::{Kernel, Model, Rate};
use crate::quadrature::adaptive_integrate;

/// Analytic choice.
pub const Q_ANALYTIC: &str = "exp(-2*a)";
/// `W^{3,∞}` choice with a kink in the third derivative at 0.5.
pub const Q_W3: &str = "(0.5-a)^2*abs(0.5-a)";

/// `C^∞` choice, flat at 0.5 and zero to its left.
pub fn q_smooth(a_dagger: f64) -> String {
    format!("chi(0.5, {a_dagger:?})*exp(-1/(a-0.5)^2)/(a-0.5)^2")
}

#[derive(Debug, Clone)]
pub struct Example1Config {
    pub q: Expr,
    pub a_dagger: f64,
    pub gamma: f64,
    pub c: f64,
}

/// `∫₀^L (L − u) e^{−γu} du`.
fn inner_weight(gamma: f64, l: f64) -> f64 {
    let x = gamma * l;
    if x < 1e-3 {
        // series of x + expm1(-x), avoiding cancellation
        l * l * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        (x + (-x).exp_m1()) / (gamma * gamma)
    }
}

impl Example1Config {
    /// Computes `c = ∫₀^{a†}(a†−a)∫₀^a e^{−γ(a−α)} q(α) dα da`, reduced by
    /// exchanging the order of integration to `∫₀^{a†} q(α) g(a† − α) dα`.
    pub fn new(q: Expr, a_dagger: f64, gamma: f64) -> Result<Self> {
        if !(a_dagger > 0.0 && a_dagger.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need a_dagger > 0 and gamma > 0, got {a_dagger} and {gamma}"
            )));
        }
        if q.uses_source_age() {
            return Err(Error::InvalidArgument("q may only depend on a".into()));
        }
        let qf = |a: f64| q.eval(&EvalContext { a, alpha: 0.0, a_dagger });
        let c = adaptive_integrate(
            |alpha| qf(alpha) * inner_weight(gamma, a_dagger - alpha),
            0.0,
            a_dagger,
            1e-300,
            1e-13,
        )?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "normalization constant must be positive, got {c}"
            )));
        }
        Ok(Self { q, a_dagger, gamma, c })
    }

    pub fn from_source(q: &str, a_dagger: f64, gamma: f64) -> Result<Self> {
        Self::new(parse_coefficient(q)?, a_dagger, gamma)
    }

    pub fn q(&self, a: f64) -> f64 {
        self.q.eval(&EvalContext {
            a,
            alpha: 0.0,
            a_dagger: self.a_dagger,
        })
    }

    pub fn model(&self) -> Model {
        let (q, a_dagger, c) = (self.q.clone(), self.a_dagger, self.c);
        Model {
            d: 1,
            a_dagger,
            beta: Kernel::scalar(move |a, alpha| {
                q.eval(&EvalContext { a, alpha, a_dagger }) * (a_dagger - alpha) / c
            }),
            b: Rate::zero(1),
            delta: Rate::constant(-self.gamma),
            breakpoints: vec![0.0, a_dagger],
        }
    }

    /// `ψ = ∫₀^a q` at increasing ages, by adaptive quadrature between consecutive points.
    pub fn psi_at(&self, ages: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ages.len());
        let (mut acc, mut last) = (0.0, 0.0);
        for &a in ages {
            if a < last {
                return Err(Error::InvalidArgument("ages must be increasing".into()));
            }
            acc += adaptive_integrate(|s| self.q(s), last, a, 1e-300, 1e-14)?;
            last = a;
            out.push(acc);
        }
        Ok(out)
    }

    /// Operator error `|e(0)| + ‖e'‖∞` on `points` uniform ages, where
    /// `e = ψ − P[H ψ]` and `P` interpolates the collocation values of
    /// `H_N Ψ` with a polynomial of degree `N − 1`. Single mesh only.
    pub fn operator_error(&self, ops: &DiscreteOperators, h: &Mat<f64>, points: usize) -> Result<f64> {
        let [mesh] = ops.meshes() else {
            return Err(Error::InvalidArgument("operator error needs a single mesh".into()));
        };
        let nodes = mesh.interior_nodes().to_vec();
        let psi_nodes = self.psi_at(&nodes)?;
        let n = nodes.len();
        let hpsi: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| h[(i, j)] * psi_nodes[j]).sum())
            .collect();
        let w = barycentric_weights(&nodes, mesh.interval());
        let dm = barycentric_diff_matrix(&nodes, &w);
        let slopes: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dm[(i, j)] * hpsi[j]).sum())
            .collect();
        let at0 = barycentric_eval(&nodes, &w, &hpsi, 0.0).abs();
        let mut sup: f64 = 0.0;
        for k in 0..points {
            let a = self.a_dagger * k as f64 / (points - 1) as f64;
            let e = self.q(a) - barycentric_eval(&nodes, &w, &slopes, a);
            sup = sup.max(e.abs());
        }
        Ok(at0 + sup)
    }
}
