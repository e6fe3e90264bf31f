//! Scalar infection-age model with only boundary births `b(a) = c·a^k` and
//! constant recovery `δ = −1/θ` on `[0, 14]`. The constant `c` normalizes
//! `∫₀^{a†} b(a) e^{−a/θ} da` to one, so `R = 1` and the eigenfunction is constant.

use crate::error::{Error, Result};
use crate::model::{Kernel, Model, Rate};
use crate::quadrature::adaptive_integrate;

pub const A_DAGGER: f64 = 14.0;
pub const THETA: f64 = 0.25;

#[derive(Debug, Clone, Copy)]
pub struct Example2Config {
    pub k: f64,
    pub theta: f64,
    pub a_dagger: f64,
    pub c: f64,
}

impl Example2Config {
    pub fn new(k: f64, theta: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite() && theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need k > 0 and theta > 0, got {k} and {theta}"
            )));
        }
        let mass = adaptive_integrate(|a| a.powf(k) * (-a / theta).exp(), 0.0, A_DAGGER, 1e-300, 1e-14)?;
        Ok(Self {
            k,
            theta,
            a_dagger: A_DAGGER,
            c: 1.0 / mass,
        })
    }

    pub fn b(&self, a: f64) -> f64 {
        self.c * a.powf(self.k)
    }

    pub fn model(&self) -> Model {
        let (c, k) = (self.c, self.k);
        Model {
            d: 1,
            a_dagger: self.a_dagger,
            beta: Kernel::zero(1),
            b: Rate::scalar(move |a| c * a.powf(k)),
            delta: Rate::constant(-1.0 / self.theta),
            breakpoints: vec![0.0, self.a_dagger],
        }
    }
}
