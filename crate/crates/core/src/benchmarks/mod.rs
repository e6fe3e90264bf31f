//! Built-in benchmark models with known or published reproduction numbers.

pub mod example1;
pub mod example2;
pub mod hbv;
pub mod sweep;

pub use example1::Example1Config;
pub use example2::Example2Config;
pub use hbv::{hbv_model, HbvParams};
pub use sweep::{convergence_sweep, fit_order, parameter_scan_r0, ConvergenceReport, ScanResult, SweepOptions};

use crate::error::{Error, Result};
use crate::model::{Model, Route, SplittingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Example1Analytic,
    Example1Smooth,
    Example1W3,
    Example2,
    Hbv,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::Example1Analytic,
        Builtin::Example1Smooth,
        Builtin::Example1W3,
        Builtin::Example2,
        Builtin::Hbv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Example1Analytic => "example1-analytic",
            Builtin::Example1Smooth => "example1-smooth",
            Builtin::Example1W3 => "example1-w3",
            Builtin::Example2 => "example2",
            Builtin::Hbv => "hbv",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }
}

/// Optional overrides of built-in parameters.
#[derive(Debug, Clone, Default)]
pub struct BuiltinParams {
    /// Example 1: custom `q(a)` expression.
    pub q: Option<String>,
    pub a_dagger: Option<f64>,
    pub gamma: Option<f64>,
    /// Example 2: exponent of `b(a) = c·a^k`.
    pub k: Option<f64>,
    /// Example 2: recovery time scale; HBV: failed-vaccination fraction.
    pub theta: Option<f64>,
    /// HBV: vaccination rate.
    pub nu: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub model: Model,
    /// Known value of `R` and where it comes from, when available.
    pub reference: Option<(f64, String)>,
}

pub const HBV_NU: f64 = 0.1;
pub const HBV_THETA: f64 = 0.59;

pub fn builtin(which: Builtin, params: &BuiltinParams, splitting: &SplittingSpec) -> Result<BuiltinModel> {
    let unused = |name: &str, set: bool| -> Result<()> {
        if set {
            Err(Error::InvalidArgument(format!(
                "parameter `{name}` does not apply to {}",
                which.name()
            )))
        } else {
            Ok(())
        }
    };
    match which {
        Builtin::Example1Analytic | Builtin::Example1Smooth | Builtin::Example1W3 => {
            unused("k", params.k.is_some())?;
            unused("theta", params.theta.is_some())?;
            unused("nu", params.nu.is_some())?;
            let a_dagger = params.a_dagger.unwrap_or(1.0);
            let gamma = params.gamma.unwrap_or(1.0);
            let q = match (&params.q, which) {
                (Some(q), _) => q.clone(),
                (None, Builtin::Example1Analytic) => example1::Q_ANALYTIC.to_string(),
                (None, Builtin::Example1Smooth) => example1::q_smooth(a_dagger),
                (None, _) => example1::Q_W3.to_string(),
            };
            let cfg = Example1Config::from_source(&q, a_dagger, gamma)?;
            let reference = (*splitting == SplittingSpec::R0).then(|| (1.0, "exact".to_string()));
            Ok(BuiltinModel {
                model: cfg.model(),
                reference,
            })
        }
        Builtin::Example2 => {
            unused("q", params.q.is_some())?;
            unused("a_dagger", params.a_dagger.is_some())?;
            unused("gamma", params.gamma.is_some())?;
            unused("nu", params.nu.is_some())?;
            let cfg = Example2Config::new(params.k.unwrap_or(2.0), params.theta.unwrap_or(example2::THETA))?;
            let reference = (*splitting == SplittingSpec::R0).then(|| (1.0, "exact".to_string()));
            Ok(BuiltinModel {
                model: cfg.model(),
                reference,
            })
        }
        Builtin::Hbv => {
            unused("q", params.q.is_some())?;
            unused("a_dagger", params.a_dagger.is_some())?;
            unused("gamma", params.gamma.is_some())?;
            unused("k", params.k.is_some())?;
            let nu = params.nu.unwrap_or(HBV_NU);
            let theta = params.theta.unwrap_or(HBV_THETA);
            let model = hbv_model(nu, theta)?;
            let published = if nu == HBV_NU && theta == HBV_THETA {
                match splitting {
                    SplittingSpec::R0 => Some(hbv::REF_R0),
                    SplittingSpec::TypeReproduction(Route::Horizontal) => Some(hbv::REF_TH),
                    SplittingSpec::TypeReproduction(Route::Vertical) => Some(hbv::REF_TV),
                    SplittingSpec::Custom { .. } => None,
                }
            } else {
                None
            };
            Ok(BuiltinModel {
                model,
                reference: published.map(|r| (r, "published, N = 120".to_string())),
            })
        }
    }
}
