#![allow(dead_code)]

pub mod oracle;

use repnum::{Kernel, Model, Rate};

/// `d = 1`, `β ≡ 0`, `δ ≡ 0`, `b ≡ c`: `R = c·a†` with a constant eigenfunction.
pub fn trivial_model(c: f64, a_dagger: f64) -> Model {
    Model {
        d: 1,
        a_dagger,
        beta: Kernel::zero(1),
        b: Rate::constant(c),
        delta: Rate::zero(1),
        breakpoints: vec![0.0, a_dagger],
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
