mod common;

use common::trivial_model;
use num_complex::Complex64;
use repnum::assembly::meshes_on;
use repnum::benchmarks::hbv::BREAKPOINTS;
use repnum::benchmarks::{hbv_model, Example1Config, Example2Config};
use repnum::model::{split, validate, Route};
use repnum::spectral::{eigenfunction, next_generation_matrix, power_iteration, spectral_radius};
use repnum::{
    assemble, assemble_piecewise, reproduction_number, CollocationMesh, DiscreteOperators, Model, NodeFamily,
    OperatorOrder, SplittingSpec,
};

const FAMILIES: [NodeFamily; 2] = [NodeFamily::ZerosPlusLeftEndpoint, NodeFamily::Extrema];
const ORDERS: [OperatorOrder; 2] = [OperatorOrder::BMinv, OperatorOrder::MinvB];

fn single(model: &Model, spec: &SplittingSpec, fam: NodeFamily, n: usize) -> DiscreteOperators {
    let mesh = CollocationMesh::new(fam, n, (0.0, model.a_dagger)).unwrap();
    assemble(&split(model, spec).unwrap(), &mesh).unwrap()
}

fn hbv_ops(spec: &SplittingSpec, fam: NodeFamily, n: usize) -> DiscreteOperators {
    let coeffs = split(&hbv_model(0.1, 0.59).unwrap(), spec).unwrap();
    assemble_piecewise(&coeffs, &meshes_on(fam, n, &BREAKPOINTS).unwrap()).unwrap()
}

fn sorted_spectrum(ops: &DiscreteOperators, order: OperatorOrder) -> Vec<Complex64> {
    let h = next_generation_matrix(ops, order).unwrap();
    let mut ev: Vec<Complex64> = h.eigenvalues().unwrap().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    ev
}

#[test]
fn example1_analytic_is_exact_at_n30() {
    let model = Example1Config::from_source("exp(-2*a)", 1.0, 1.0).unwrap().model();
    for fam in FAMILIES {
        let ops = single(&model, &SplittingSpec::R0, fam, 30);
        for order in ORDERS {
            let r = reproduction_number(&ops, order).unwrap();
            assert!((r.r_n - 1.0).abs() <= 1e-10, "{fam:?} {order:?}: {}", r.r_n);
            assert!(r.residual <= 1e-8);
            assert!(r.eigenvalue.im.abs() <= 1e-10 * r.r_n);
        }
    }
}

#[test]
fn orderings_have_the_same_spectrum() {
    let model = Example1Config::from_source("exp(-2*a)", 1.0, 1.0).unwrap().model();
    for fam in FAMILIES {
        let ops = single(&model, &SplittingSpec::R0, fam, 12);
        let (a, b) = (sorted_spectrum(&ops, OperatorOrder::BMinv), sorted_spectrum(&ops, OperatorOrder::MinvB));
        let rho = a[0].norm();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-10 * rho, "{fam:?}: {x} vs {y}");
        }
    }
}

#[test]
fn dominant_eigenvalues_agree_across_orderings() {
    let e1 = Example1Config::from_source("(0.5-a)^2*abs(0.5-a)", 1.0, 1.0).unwrap().model();
    let e2 = Example2Config::new(2.0, 0.25).unwrap().model();
    for fam in FAMILIES {
        for n in [10, 25, 40] {
            for (name, ops) in [
                ("w3", single(&e1, &SplittingSpec::R0, fam, n)),
                ("example2", single(&e2, &SplittingSpec::R0, fam, n)),
                ("hbv T_V", hbv_ops(&SplittingSpec::TypeReproduction(Route::Vertical), fam, n / 2)),
            ] {
                let a = reproduction_number(&ops, OperatorOrder::BMinv).unwrap();
                let b = reproduction_number(&ops, OperatorOrder::MinvB).unwrap();
                assert!((a.r_n - b.r_n).abs() <= 1e-9 * a.r_n, "{name} {fam:?} N={n}: {} vs {}", a.r_n, b.r_n);
            }
        }
    }
}

/// The nodal matrix itself has negative entries (collocation weights are not
/// positive), but its dominant pair is the Perron pair of the positive operator.
#[test]
fn hbv_dominant_pair_is_perron() {
    for fam in FAMILIES {
        let ops = hbv_ops(&SplittingSpec::R0, fam, 10);
        for order in ORDERS {
            let h = next_generation_matrix(&ops, order).unwrap();
            let (lambda, v) = spectral_radius(&h).unwrap();
            assert!(lambda.re > 0.0 && lambda.im.abs() <= 1e-12 * lambda.re);
            let all: Vec<Complex64> = h.eigenvalues().unwrap().iter().map(|z| Complex64::new(z.re, z.im)).collect();
            assert!(all.iter().all(|z| z.norm() <= lambda.re * (1.0 + 1e-12)));
            let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(v.iter().all(|z| z.re >= -1e-10 * vmax && z.im.abs() <= 1e-10 * vmax), "{fam:?} {order:?}");
        }
    }
}

#[test]
fn power_iteration_matches_dense_on_hbv() {
    let ops = hbv_ops(&SplittingSpec::R0, NodeFamily::ZerosPlusLeftEndpoint, 20);
    let h = next_generation_matrix(&ops, OperatorOrder::BMinv).unwrap();
    let (dense, _) = spectral_radius(&h).unwrap();
    let (p, _, _) = power_iteration(&h, 1e-14, 10_000).unwrap();
    assert!((p - dense.re).abs() <= 1e-9 * dense.re, "{p} vs {dense}");
}

#[test]
fn power_iteration_is_exact_on_rank_one() {
    let ops = single(&trivial_model(0.5, 3.0), &SplittingSpec::R0, NodeFamily::ZerosPlusLeftEndpoint, 9);
    let h = next_generation_matrix(&ops, OperatorOrder::BMinv).unwrap();
    let (p, _, iters) = power_iteration(&h, 1e-15, 2).unwrap();
    assert!(iters <= 2);
    assert!((p - 1.5).abs() <= 1e-14);
}

#[test]
fn trivial_model_scale_equivariance() {
    for fam in FAMILIES {
        for n in [2, 5, 17] {
            let base = reproduction_number(&single(&trivial_model(1.0, 2.0), &SplittingSpec::R0, fam, n), OperatorOrder::BMinv)
                .unwrap()
                .r_n;
            assert!((base - 2.0).abs() <= 1e-12 * 2.0);
            for s in [0.125, 0.3, 7.0, 1e3] {
                let ops = single(&trivial_model(s, 2.0), &SplittingSpec::R0, fam, n);
                for order in ORDERS {
                    let r = reproduction_number(&ops, order).unwrap().r_n;
                    assert!((r - s * base).abs() <= 1e-12 * s * base, "{fam:?} N={n} s={s}");
                }
            }
        }
    }
}

/// With `H = B M⁻¹` the eigenvector holds values of `Bψ`, constant here; with
/// `M⁻¹ B` it holds `ψ`, linear here, so its density is constant.
#[test]
fn trivial_model_eigenfunctions() {
    for fam in FAMILIES {
        let ops = single(&trivial_model(0.7, 2.0), &SplittingSpec::R0, fam, 12);
        let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::BMinv).unwrap(), &ops).unwrap();
        let y0 = ef.y(0.0).unwrap()[0];
        for k in 0..=40 {
            let a = 2.0 * k as f64 / 40.0;
            assert!((ef.y(a).unwrap()[0] - y0).abs() <= 1e-10);
            assert!(ef.x(a).unwrap()[0].abs() <= 1e-10);
        }
        let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::MinvB).unwrap(), &ops).unwrap();
        let x0 = ef.x(0.0).unwrap()[0];
        assert!(x0.abs() > 0.1);
        for k in 0..=40 {
            let a = 2.0 * k as f64 / 40.0;
            assert!((ef.x(a).unwrap()[0] - x0).abs() <= 1e-10 * x0.abs());
        }
        assert!(ef.y(0.0).unwrap()[0].abs() <= 1e-14);
    }
}

#[test]
fn example1_eigenfunction_is_cumulative_q() {
    let cfg = Example1Config::from_source("exp(-2*a)", 1.0, 1.0).unwrap();
    let ages: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let psi = cfg.psi_at(&ages).unwrap();
    for fam in FAMILIES {
        let ops = single(&cfg.model(), &SplittingSpec::R0, fam, 30);
        let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::BMinv).unwrap(), &ops).unwrap();
        let scale = psi[100] / ef.y(1.0).unwrap()[0];
        let err = ages
            .iter()
            .zip(&psi)
            .map(|(&a, p)| (scale * ef.y(a).unwrap()[0] - p).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "{fam:?}: {err:e}");
        let derr = ages
            .iter()
            .map(|&a| (scale * ef.x(a).unwrap()[0] - cfg.q(a)).abs())
            .fold(0.0, f64::max);
        assert!(derr <= 1e-6, "{fam:?}: density error {derr:e}");
    }
}

/// The other ordering returns the state `φ = M⁻¹ψ`, so `φ' + γφ ∝ ψ` with `φ(0) = 0`.
#[test]
fn example1_state_eigenfunction() {
    let cfg = Example1Config::from_source("exp(-2*a)", 1.0, 1.0).unwrap();
    let ages: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let psi = cfg.psi_at(&ages).unwrap();
    for fam in FAMILIES {
        let ops = single(&cfg.model(), &SplittingSpec::R0, fam, 30);
        let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::MinvB).unwrap(), &ops).unwrap();
        assert!(ef.y(0.0).unwrap()[0].abs() <= 1e-12);
        let lhs = |a: f64| ef.x(a).unwrap()[0] + ef.y(a).unwrap()[0];
        let scale = psi[100] / lhs(1.0);
        let err = ages
            .iter()
            .zip(&psi)
            .map(|(&a, p)| (scale * lhs(a) - p).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{fam:?}: {err:e}");
    }
}

#[test]
fn example2_eigenfunction_is_constant() {
    let model = Example2Config::new(2.0, 0.25).unwrap().model();
    let ops = single(&model, &SplittingSpec::R0, NodeFamily::ZerosPlusLeftEndpoint, 40);
    let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::BMinv).unwrap(), &ops).unwrap();
    let y0 = ef.y(0.0).unwrap()[0];
    assert!((y0 - 1.0).abs() <= 1e-8);
    for k in 0..=70 {
        let a = 14.0 * k as f64 / 70.0;
        assert!((ef.y(a).unwrap()[0] - y0).abs() <= 1e-8, "a = {a}");
        assert!(ef.x(a).unwrap()[0].abs() <= 1e-8, "a = {a}");
    }
}

#[test]
fn hbv_dominant_eigenpair_is_real_with_nonnegative_density() {
    let model = hbv_model(0.1, 0.59).unwrap();
    for spec in [
        SplittingSpec::R0,
        SplittingSpec::TypeReproduction(Route::Horizontal),
        SplittingSpec::TypeReproduction(Route::Vertical),
    ] {
        assert!(validate(&split(&model, &spec).unwrap()).is_empty());
        for fam in FAMILIES {
            let ops = hbv_ops(&spec, fam, 16);
            for order in ORDERS {
                let r = reproduction_number(&ops, order).unwrap();
                assert!(r.r_n > 0.0);
                assert!(r.eigenvalue.im.abs() <= 1e-10 * r.r_n);
                assert!(r.residual <= 1e-8 * r.r_n.max(1.0));
                let ef = eigenfunction(&r, &ops).unwrap();
                let xs: Vec<Vec<f64>> = (0..=150).map(|k| ef.x(75.0 * k as f64 / 150.0).unwrap()).collect();
                let scale = xs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let min = xs.iter().flatten().fold(0.0f64, |m, v| m.min(*v));
                assert!(min >= -1e-6, "{} {fam:?} {order:?}: {min:e} of {scale:e}", spec.label());
            }
        }
    }
}

#[test]
fn eigenfunction_csv_shape() {
    let ops = hbv_ops(&SplittingSpec::R0, NodeFamily::Extrema, 6);
    let ef = eigenfunction(&reproduction_number(&ops, OperatorOrder::BMinv).unwrap(), &ops).unwrap();
    let csv = ef.to_csv(11).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "a,y_1,y_2,y_3,x_1,x_2,x_3");
    assert_eq!(lines.len(), 12);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
    assert!(ef.y(80.0).is_err());
}

#[test]
fn agrees_with_brute_force_oracle() {
    let e1 = Example1Config::from_source("exp(-2*a)", 1.0, 1.0).unwrap().model();
    let w3 = Example1Config::from_source("(0.5-a)^2*abs(0.5-a)", 1.0, 1.0).unwrap().model();
    let e2 = Example2Config::new(2.0, 1.0).unwrap().model();
    for (name, model) in [("analytic", e1), ("w3", w3), ("example2", e2)] {
        let oracle = common::oracle::brute_force_r(&model, 1500);
        let r = reproduction_number(&single(&model, &SplittingSpec::R0, NodeFamily::ZerosPlusLeftEndpoint, 40), OperatorOrder::BMinv)
            .unwrap();
        assert!(common::rel(r.r_n, oracle) <= 1e-4, "{name}: {} vs {oracle}", r.r_n);
    }
}

#[test]
fn residual_certificate_holds_on_accepted_results() {
    let e1 = Example1Config::from_source("(0.5-a)^2*abs(0.5-a)", 1.0, 1.0).unwrap().model();
    let e2 = Example2Config::new(3.5, 0.5).unwrap().model();
    for fam in FAMILIES {
        for n in [3, 8, 21, 50] {
            for model in [&e1, &e2] {
                let ops = single(model, &SplittingSpec::R0, fam, n);
                for order in ORDERS {
                    let r = reproduction_number(&ops, order).unwrap();
                    let h = next_generation_matrix(&ops, order).unwrap();
                    let again = repnum::spectral::residual(&h, r.eigenvalue, &r.eigenvector);
                    assert!(again <= 1e-8 * r.r_n.max(1.0));
                    assert!((again - r.residual).abs() <= 1e-15 + 1e-6 * r.residual);
                    let vmax = r.eigenvector.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    assert!((vmax - 1.0).abs() <= 1e-14);
                }
            }
        }
    }
}
