//! Model coefficients, birth/transition splittings and sign checks.
//!
//! Matrix-valued coefficients are callables writing a row-major `d×d` block
//! into a caller-provided buffer. A coefficient built with `zero` is known to
//! vanish identically and is skipped during assembly.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type KernelFn = dyn Fn(f64, f64, &mut [f64]) + Send + Sync;
pub type RateFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// Kernel `(a, α) ↦ d×d` matrix.
#[derive(Clone)]
pub struct Kernel {
    d: usize,
    f: Option<Arc<KernelFn>>,
}

impl Kernel {
    pub fn zero(d: usize) -> Self {
        Self { d, f: None }
    }

    pub fn new(d: usize, f: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            d,
            f: Some(Arc::new(f)),
        }
    }

    pub fn scalar(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(1, move |a, alpha, out| out[0] = f(a, alpha))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    /// Writes the value at `(a, alpha)` into `out` (length `d²`).
    pub fn eval_into(&self, a: f64, alpha: f64, out: &mut [f64]) {
        match &self.f {
            Some(f) => f(a, alpha, out),
            None => out.fill(0.0),
        }
    }

    pub fn eval(&self, a: f64, alpha: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.d * self.d];
        self.eval_into(a, alpha, &mut out);
        out
    }

    /// Pointwise sum, used to check that a splitting reconstructs the whole kernel.
    pub fn sum(&self, other: &Kernel) -> Kernel {
        match (&self.f, &other.f) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(f), Some(g)) => {
                let (f, g, n) = (f.clone(), g.clone(), self.d * self.d);
                Kernel::new(self.d, move |a, alpha, out| {
                    let mut tmp = vec![0.0; n];
                    f(a, alpha, out);
                    g(a, alpha, &mut tmp);
                    out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
                })
            }
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel(d={}, zero={})", self.d, self.is_zero())
    }
}

/// Age-dependent `d×d` matrix `a ↦ r(a)`.
#[derive(Clone)]
pub struct Rate {
    d: usize,
    f: Option<Arc<RateFn>>,
}

impl Rate {
    pub fn zero(d: usize) -> Self {
        Self { d, f: None }
    }

    pub fn new(d: usize, f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            d,
            f: Some(Arc::new(f)),
        }
    }

    pub fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(1, move |a, out| out[0] = f(a))
    }

    pub fn constant(value: f64) -> Self {
        Self::scalar(move |_| value)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    pub fn eval_into(&self, a: f64, out: &mut [f64]) {
        match &self.f {
            Some(f) => f(a, out),
            None => out.fill(0.0),
        }
    }

    pub fn eval(&self, a: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.d * self.d];
        self.eval_into(a, &mut out);
        out
    }

    pub fn sum(&self, other: &Rate) -> Rate {
        match (&self.f, &other.f) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(f), Some(g)) => {
                let (f, g, n) = (f.clone(), g.clone(), self.d * self.d);
                Rate::new(self.d, move |a, out| {
                    let mut tmp = vec![0.0; n];
                    f(a, out);
                    g(a, &mut tmp);
                    out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
                })
            }
        }
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rate(d={}, zero={})", self.d, self.is_zero())
    }
}

/// Unsplit model: full kernel `beta`, full boundary term `b`, transition rate `delta`.
#[derive(Debug, Clone)]
pub struct Model {
    pub d: usize,
    pub a_dagger: f64,
    pub beta: Kernel,
    pub b: Rate,
    pub delta: Rate,
    /// Ages where coefficients may jump, including `0` and `a_dagger`.
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Count only horizontal transmission (`beta`) as birth.
    Horizontal,
    /// Count only vertical transmission (`b`) as birth.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Beta,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingSpec {
    /// Everything is birth.
    R0,
    TypeReproduction(Route),
    /// Explicit assignment of each term to the birth (`plus`) or transition (`minus`) side.
    Custom { plus: Vec<Term>, minus: Vec<Term> },
}

impl SplittingSpec {
    pub fn label(&self) -> String {
        match self {
            SplittingSpec::R0 => "R0".into(),
            SplittingSpec::TypeReproduction(Route::Horizontal) => "T_H".into(),
            SplittingSpec::TypeReproduction(Route::Vertical) => "T_V".into(),
            SplittingSpec::Custom { plus, minus } => format!("custom(plus={plus:?}, minus={minus:?})"),
        }
    }

    /// Resolve to `(beta is birth, b is birth)`.
    fn resolve(&self) -> Result<(bool, bool)> {
        match self {
            SplittingSpec::R0 => Ok((true, true)),
            SplittingSpec::TypeReproduction(Route::Horizontal) => Ok((true, false)),
            SplittingSpec::TypeReproduction(Route::Vertical) => Ok((false, true)),
            SplittingSpec::Custom { plus, minus } => {
                let side = |t: Term| -> Result<bool> {
                    let p = plus.iter().filter(|&&x| x == t).count();
                    let m = minus.iter().filter(|&&x| x == t).count();
                    match (p, m) {
                        (1, 0) => Ok(true),
                        (0, 1) => Ok(false),
                        (0, 0) => Err(Error::InvalidSplitting(format!("{t:?} is not assigned"))),
                        _ => Err(Error::InvalidSplitting(format!("{t:?} is assigned more than once"))),
                    }
                };
                Ok((side(Term::Beta)?, side(Term::B)?))
            }
        }
    }
}

/// Split coefficients of a model, ready for assembly.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub d: usize,
    pub a_dagger: f64,
    pub beta_plus: Kernel,
    pub beta_minus: Kernel,
    pub b_plus: Rate,
    pub b_minus: Rate,
    pub delta: Rate,
    pub breakpoints: Vec<f64>,
}

impl CoefficientSet {
    /// Checks dimensions and breakpoints.
    pub fn check(&self) -> Result<()> {
        let d = self.d;
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(self.a_dagger.is_finite() && self.a_dagger > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "maximum age must be positive and finite, got {}",
                self.a_dagger
            )));
        }
        let dims = [
            ("beta_plus", self.beta_plus.dim()),
            ("beta_minus", self.beta_minus.dim()),
            ("b_plus", self.b_plus.dim()),
            ("b_minus", self.b_minus.dim()),
            ("delta", self.delta.dim()),
        ];
        for (name, k) in dims {
            if k != d {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has dimension {k}, expected {d}"
                )));
            }
        }
        check_breakpoints(&self.breakpoints, self.a_dagger)
    }
}

pub(crate) fn check_breakpoints(bp: &[f64], a_dagger: f64) -> Result<()> {
    let ok = bp.len() >= 2
        && bp[0] == 0.0
        && *bp.last().unwrap() == a_dagger
        && bp.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::BreakpointMismatch(format!(
            "breakpoints must increase strictly from 0 to {a_dagger}, got {bp:?}"
        )))
    }
}

pub fn split(model: &Model, spec: &SplittingSpec) -> Result<CoefficientSet> {
    let (beta_birth, b_birth) = spec.resolve()?;
    let d = model.d;
    let pick_k = |birth: bool| {
        if birth {
            (model.beta.clone(), Kernel::zero(d))
        } else {
            (Kernel::zero(d), model.beta.clone())
        }
    };
    let pick_r = |birth: bool| {
        if birth {
            (model.b.clone(), Rate::zero(d))
        } else {
            (Rate::zero(d), model.b.clone())
        }
    };
    let (beta_plus, beta_minus) = pick_k(beta_birth);
    let (b_plus, b_minus) = pick_r(b_birth);
    let set = CoefficientSet {
        d,
        a_dagger: model.a_dagger,
        beta_plus,
        beta_minus,
        b_plus,
        b_minus,
        delta: model.delta.clone(),
        breakpoints: model.breakpoints.clone(),
    };
    set.check()?;
    Ok(set)
}

/// One sign violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// `beta_plus`, `beta_minus`, `b_plus`, `b_minus`, `delta diagonal` or `delta off-diagonal`.
    pub coefficient: &'static str,
    pub row: usize,
    pub col: usize,
    pub a: f64,
    pub alpha: Option<f64>,
    pub value: f64,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}] = {:e} at a = {}", self.coefficient, self.row, self.col, self.value, self.a)?;
        if let Some(alpha) = self.alpha {
            write!(f, ", alpha = {alpha}")?;
        }
        Ok(())
    }
}

pub const PROBE_POINTS: usize = 50;

pub fn probe_grid(a_dagger: f64) -> Vec<f64> {
    (0..PROBE_POINTS)
        .map(|i| a_dagger * i as f64 / (PROBE_POINTS - 1) as f64)
        .collect()
}

/// Sign checks on a uniform probe grid: kernels and boundary terms nonnegative,
/// `delta` essentially nonnegative with non-positive diagonal. At most one
/// diagnostic is reported per coefficient entry.
pub fn validate(coeffs: &CoefficientSet) -> Vec<Diagnostic> {
    let d = coeffs.d;
    let grid = probe_grid(coeffs.a_dagger);
    let mut out = Vec::new();
    let mut buf = vec![0.0; d * d];

    for (name, k) in [("beta_plus", &coeffs.beta_plus), ("beta_minus", &coeffs.beta_minus)] {
        if k.is_zero() {
            continue;
        }
        let mut seen = vec![false; d * d];
        for &a in &grid {
            for &alpha in &grid {
                k.eval_into(a, alpha, &mut buf);
                for (idx, &v) in buf.iter().enumerate() {
                    if !seen[idx] && !(v >= 0.0 && v.is_finite()) {
                        seen[idx] = true;
                        out.push(Diagnostic {
                            coefficient: name,
                            row: idx / d,
                            col: idx % d,
                            a,
                            alpha: Some(alpha),
                            value: v,
                        });
                    }
                }
            }
        }
    }

    for (name, r) in [("b_plus", &coeffs.b_plus), ("b_minus", &coeffs.b_minus), ("delta", &coeffs.delta)] {
        if r.is_zero() {
            continue;
        }
        let mut seen = vec![false; d * d];
        for &a in &grid {
            r.eval_into(a, &mut buf);
            for (idx, &v) in buf.iter().enumerate() {
                let (row, col) = (idx / d, idx % d);
                let (label, ok) = match name {
                    "delta" if row == col => ("delta diagonal", v <= 0.0),
                    "delta" => ("delta off-diagonal", v >= 0.0),
                    _ => (name, v >= 0.0),
                };
                if !seen[idx] && !(ok && v.is_finite()) {
                    seen[idx] = true;
                    out.push(Diagnostic {
                        coefficient: label,
                        row,
                        col,
                        a,
                        alpha: None,
                        value: v,
                    });
                }
            }
        }
    }
    out
}
