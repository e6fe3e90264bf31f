//! Three-compartment hepatitis B model (latent, acute, chronic) with
//! horizontal transmission through a piecewise-constant contact kernel and
//! vertical transmission at birth, linearized at the disease-free state.

use crate::error::{Error, Result};
use crate::model::{Kernel, Model, Rate};

pub const A_DAGGER: f64 = 75.0;
pub const EPSILON: f64 = 0.16;
pub const SIGMA: f64 = 6.0;
pub const GAMMA1: f64 = 4.0;
pub const GAMMA2: f64 = 0.025;
pub const OMEGA: f64 = 0.1;
pub const Q1: f64 = 0.711;
pub const Q2: f64 = 0.109;

/// Age classes of the contact kernel.
pub const CLASS_BOUNDS: [f64; 8] = [0.0, 3.0, 6.0, 10.0, 15.0, 30.0, 50.0, 75.0];
/// Per-class transmission coefficients; `k(a, α) = K[max(class(a), class(α))]`.
pub const K: [f64; 7] = [1.070, 0.607, 0.338, 0.149, 0.027, 0.068, 0.041];
/// Per-class mean forces of infection the coefficients were fitted to.
pub const LAMBDA_CLASS: [f64; 7] = [0.112, 0.079, 0.049, 0.024, 0.006, 0.013, 0.008];
/// Class boundaries plus the onset of fertility at 18.
pub const BREAKPOINTS: [f64; 9] = [0.0, 3.0, 6.0, 10.0, 15.0, 18.0, 30.0, 50.0, 75.0];

#[allow(clippy::excessive_precision)]
pub const REF_R0: f64 = 1.048182936983250;
pub const REF_TH: f64 = 1.004493064088357;
pub const REF_TV: f64 = 2.765546573797665;

pub fn class_index(a: f64) -> usize {
    CLASS_BOUNDS[1..7].iter().take_while(|&&b| a >= b).count()
}

pub fn contact(a: f64, alpha: f64) -> f64 {
    K[class_index(a).max(class_index(alpha))]
}

/// Probability that an acute infection becomes chronic.
pub fn p_chronic(a: f64) -> f64 {
    0.176501 * (-0.787711 * a).exp() + 0.02116
}

pub fn fertility(a: f64) -> f64 {
    if (18.0..=A_DAGGER).contains(&a) {
        0.018
    } else {
        0.0
    }
}

/// Serology-based force of infection, cubic up to 47.5 and frozen afterwards.
pub fn force_of_infection(a: f64) -> f64 {
    let a = a.min(47.5);
    0.13074116 - 1.362531e-2 * a + 4.6463e-4 * a * a - 4.89e-6 * a * a * a
}

#[derive(Debug, Clone, Copy)]
pub struct HbvParams {
    /// Vaccination rate (constant in age).
    pub nu: f64,
    /// Fraction of failed vaccinations at birth.
    pub theta: f64,
}

impl HbvParams {
    pub fn new(nu: f64, theta: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&nu) && (0.0..=1.0).contains(&theta)) {
            return Err(Error::InvalidArgument(format!(
                "nu and theta must lie in [0, 1], got {nu} and {theta}"
            )));
        }
        Ok(Self { nu, theta })
    }

    /// Susceptible fraction at the disease-free state.
    pub fn s_star(&self, a: f64) -> f64 {
        let r = OMEGA + self.nu;
        let e = (-r * a).exp();
        self.theta * e + OMEGA * (-(-r * a).exp_m1()) / r
    }

    pub fn model(&self) -> Model {
        let p = *self;
        Model {
            d: 3,
            a_dagger: A_DAGGER,
            beta: Kernel::new(3, move |a, alpha, out| {
                out.fill(0.0);
                let v = p.s_star(a) * contact(a, alpha);
                out[1] = v;
                out[2] = EPSILON * v;
            }),
            b: Rate::new(3, move |a, out| {
                out.fill(0.0);
                let v = p.theta * fertility(a);
                out[1] = v * Q1;
                out[2] = v * Q2;
            }),
            delta: Rate::new(3, |a, out| {
                out.fill(0.0);
                out[0] = -SIGMA;
                out[3] = SIGMA;
                out[4] = -GAMMA1;
                out[7] = p_chronic(a) * GAMMA1;
                out[8] = -GAMMA2;
            }),
            breakpoints: BREAKPOINTS.to_vec(),
        }
    }
}

pub fn hbv_model(nu: f64, theta: f64) -> Result<Model> {
    Ok(HbvParams::new(nu, theta)?.model())
}
