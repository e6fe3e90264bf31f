//! Brute-force reference for scalar models with `β⁻ = b⁻ = 0`: uniform grid,
//! trapezoid rule everywhere, a dense solve of `(I − W) n = ξ` for the infected
//! density, and power iteration on the resulting generation map.

use nalgebra::{DMatrix, DVector};
use repnum::Model;

pub fn brute_force_r(model: &Model, points: usize) -> f64 {
    assert_eq!(model.d, 1, "scalar models only");
    let k = points;
    let h = model.a_dagger / (k - 1) as f64;
    let ages: Vec<f64> = (0..k).map(|i| i as f64 * h).collect();
    let w: Vec<f64> = (0..k)
        .map(|i| if i == 0 || i == k - 1 { h / 2.0 } else { h })
        .collect();
    let delta: Vec<f64> = ages.iter().map(|&a| model.delta.eval(a)[0]).collect();
    let b: Vec<f64> = ages.iter().map(|&a| model.b.eval(a)[0]).collect();
    let beta = DMatrix::from_fn(k, k, |i, j| model.beta.eval(ages[i], ages[j])[0]);

    // cumulative trapezoid: (C v)_i = ∫₀^{a_i} v
    let cum = DMatrix::from_fn(k, k, |i, j| {
        if i == 0 || j > i {
            0.0
        } else if j == 0 || j == i {
            h / 2.0
        } else {
            h
        }
    });
    // n = m₀ + ∫₀^a (δ n + f)
    let mut iw = DMatrix::<f64>::identity(k, k);
    for i in 0..k {
        for j in 0..k {
            iw[(i, j)] -= cum[(i, j)] * delta[j];
        }
    }
    let lu = iw.lu();

    // state: new infections f at each age plus the mass m₀ born infected
    let mut f = DVector::from_element(k, 1.0);
    let mut m0 = 1.0;
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let xi = &cum * &f + DVector::from_element(k, m0);
        let n = lu.solve(&xi).expect("I - W is singular");
        let wn = DVector::from_fn(k, |j, _| w[j] * n[j]);
        let f_new = &beta * &wn;
        let m_new: f64 = (0..k).map(|j| b[j] * wn[j]).sum();
        let norm = f_new.amax().max(m_new.abs());
        if norm == 0.0 {
            return 0.0;
        }
        let prev_norm = f.amax().max(m0.abs());
        let next = norm / prev_norm;
        f = f_new / norm;
        m0 = m_new / norm;
        if (next - lambda).abs() <= 1e-14 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}
