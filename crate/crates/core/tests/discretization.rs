use proptest::prelude::*;
use repnum::chebyshev::{differentiation_matrix, partial_integral_weights};
use repnum::quadrature::{clenshaw_curtis_rule, fejer1_rule};
use repnum::{CollocationMesh, NodeFamily};

const FAMILIES: [NodeFamily; 2] = [NodeFamily::ZerosPlusLeftEndpoint, NodeFamily::Extrema];
const LADDER: [usize; 5] = [2, 4, 8, 16, 32];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn mesh_examples() {
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 1, (0.0, 1.0)).unwrap();
    assert_eq!(m.nodes(), &[0.0, 0.5]);
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 2, (-1.0, 1.0)).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((m.interior_nodes()[0] + h).abs() < 1e-15);
    assert!((m.interior_nodes()[1] - h).abs() < 1e-15);
    let m = CollocationMesh::new(NodeFamily::Extrema, 2, (0.0, 2.0)).unwrap();
    assert_eq!(m.nodes(), &[0.0, 1.0, 2.0]);
}

#[test]
fn mesh_rejects_bad_input() {
    assert!(CollocationMesh::new(NodeFamily::Extrema, 0, (0.0, 1.0)).is_err());
    assert!(CollocationMesh::new(NodeFamily::Extrema, 4, (1.0, 1.0)).is_err());
    assert!(CollocationMesh::new(NodeFamily::Extrema, 4, (0.0, f64::NAN)).is_err());
}

#[test]
fn nodes_increase_from_left_endpoint() {
    for fam in FAMILIES {
        for n in 1..40 {
            let m = CollocationMesh::new(fam, n, (2.0, 7.5)).unwrap();
            assert_eq!(m.nodes()[0], 2.0);
            assert!(m.nodes().windows(2).all(|w| w[0] < w[1]));
            if fam == NodeFamily::Extrema {
                assert_eq!(*m.nodes().last().unwrap(), 7.5);
            }
        }
    }
}

#[test]
fn differentiation_examples() {
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 1, (0.0, 1.0)).unwrap();
    let d = differentiation_matrix(&m);
    assert!((d.entries()[(0, 0)] - 2.0).abs() < 1e-15);

    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 2, (0.0, 1.0)).unwrap();
    let d = differentiation_matrix(&m);
    let x = m.interior_nodes();
    let out = d.apply(&x.iter().map(|a| a * a).collect::<Vec<_>>());
    for (o, a) in out.iter().zip(x) {
        assert!((o - 2.0 * a).abs() <= 1e-12);
    }

    for fam in FAMILIES {
        let m = CollocationMesh::new(fam, 8, (0.0, 1.0)).unwrap();
        let d = differentiation_matrix(&m);
        let x = m.interior_nodes();
        let out = d.apply(&x.iter().map(|a| a.sin()).collect::<Vec<_>>());
        for (o, a) in out.iter().zip(x) {
            assert!((o - a.cos()).abs() <= 1e-8, "{fam:?} at {a}");
        }
    }
}

#[test]
fn differentiation_ladder() {
    for fam in FAMILIES {
        for n in LADDER {
            let m = CollocationMesh::new(fam, n, (0.0, 1.0)).unwrap();
            let d = differentiation_matrix(&m);
            let x = m.interior_nodes();
            for k in 1..=n as i32 {
                let out = d.apply(&x.iter().map(|a| a.powi(k)).collect::<Vec<_>>());
                for (o, a) in out.iter().zip(x) {
                    let want = k as f64 * a.powi(k - 1);
                    assert!(close(*o, want, 1e-10), "{fam:?} N={n} k={k}: {o} vs {want}");
                }
            }
        }
    }
}

#[test]
fn quadrature_ladders() {
    for n in LADDER {
        let f = fejer1_rule(n, (0.0, 1.0)).unwrap();
        let cc = clenshaw_curtis_rule(n, (0.0, 1.0)).unwrap();
        assert!(f.weights.iter().chain(&cc.weights).all(|&w| w > 0.0));
        assert!(close(f.weights.iter().sum(), 1.0, 1e-12));
        assert!(close(cc.weights.iter().sum(), 1.0, 1e-12));
        for k in 0..n as i32 {
            let got = f.integrate(|a| a.powi(k));
            assert!(close(got, 1.0 / (k + 1) as f64, 1e-13), "Fejér N={n} k={k}");
        }
        for k in 0..=n as i32 {
            let got = cc.integrate(|a| a.powi(k));
            assert!(close(got, 1.0 / (k + 1) as f64, 1e-13), "CC N={n} k={k}");
        }
    }
}

#[test]
fn quadrature_examples() {
    assert_eq!(fejer1_rule(1, (0.0, 3.5)).unwrap().weights, vec![3.5]);
    let f = fejer1_rule(3, (0.0, 1.0)).unwrap();
    assert!((f.integrate(|a| a * a) - 1.0 / 3.0).abs() < 1e-14);
    let cc = clenshaw_curtis_rule(1, (0.0, 1.0)).unwrap();
    assert_eq!(cc.nodes, vec![0.0, 1.0]);
    assert!((cc.weights[0] - 0.5).abs() < 1e-16 && (cc.weights[1] - 0.5).abs() < 1e-16);
    let cc = clenshaw_curtis_rule(2, (0.0, 1.0)).unwrap();
    assert!((cc.integrate(|a| a * a) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn partial_integral_ladder_and_row_sums() {
    for fam in FAMILIES {
        for n in LADDER {
            let m = CollocationMesh::new(fam, n, (0.0, 1.0)).unwrap();
            let p = partial_integral_weights(&differentiation_matrix(&m)).unwrap();
            let x = m.interior_nodes();
            for k in 0..n as i32 {
                let out = p.apply(&x.iter().map(|a| a.powi(k)).collect::<Vec<_>>());
                for (o, a) in out.iter().zip(x) {
                    let want = a.powi(k + 1) / (k + 1) as f64;
                    assert!(close(*o, want, 1e-10), "{fam:?} N={n} k={k}");
                }
            }
        }
    }
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 10, (0.0, 1.0)).unwrap();
    let p = partial_integral_weights(&differentiation_matrix(&m)).unwrap();
    for (i, a) in m.interior_nodes().iter().enumerate() {
        let s: f64 = (0..10).map(|j| p.entries()[(i, j)]).sum();
        assert!(close(s, *a, 1e-10));
    }
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 6, (0.0, 1.0)).unwrap();
    let p = partial_integral_weights(&differentiation_matrix(&m)).unwrap();
    let x = m.interior_nodes();
    let out = p.apply(&x.iter().map(|a| a.powi(3)).collect::<Vec<_>>());
    for (o, a) in out.iter().zip(x) {
        assert!((o - a.powi(4) / 4.0).abs() <= 1e-11);
    }
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 1, (0.0, 1.0)).unwrap();
    let p = partial_integral_weights(&differentiation_matrix(&m)).unwrap();
    assert!((p.entries()[(0, 0)] - 0.5).abs() < 1e-15);
}

#[test]
fn inverse_consistency() {
    for fam in FAMILIES {
        for n in [1, 5, 16, 33, 64] {
            let m = CollocationMesh::new(fam, n, (0.0, 3.0)).unwrap();
            let d = differentiation_matrix(&m);
            let p = partial_integral_weights(&d).unwrap();
            let prod = d.entries() * p.entries();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - want).abs() <= 1e-10, "{fam:?} N={n} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn interpolation_examples() {
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 5, (0.0, 1.0)).unwrap();
    let v: Vec<f64> = m.nodes().iter().map(|a| 3.0 * a).collect();
    assert!((m.interpolate(&v, 0.37).unwrap() - 1.11).abs() < 1e-14);
    for (i, &a) in m.nodes().iter().enumerate() {
        assert_eq!(m.interpolate(&v, a).unwrap(), v[i]);
    }
    let m = CollocationMesh::new(NodeFamily::Extrema, 16, (0.0, 1.0)).unwrap();
    let v: Vec<f64> = m.nodes().iter().map(|a| a.exp()).collect();
    assert!((m.interpolate(&v, 0.5).unwrap() - 0.5f64.exp()).abs() < 1e-12);
    assert!(m.interpolate(&v, 1.5).is_err());

    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 4, (0.0, 1.0)).unwrap();
    let sq: Vec<f64> = m.nodes().iter().map(|a| a * a).collect();
    assert!((m.interpolant_derivative(&sq, 0.3).unwrap() - 0.6).abs() < 1e-12);
    let ones = vec![2.5; m.nodes().len()];
    for x in [0.0, 0.2, 0.77, 1.0] {
        assert!(m.interpolant_derivative(&ones, x).unwrap().abs() < 1e-12);
    }
    let m = CollocationMesh::new(NodeFamily::ZerosPlusLeftEndpoint, 20, (0.0, 1.0)).unwrap();
    let s: Vec<f64> = m.nodes().iter().map(|a| a.sin()).collect();
    assert!((m.interpolant_derivative(&s, 0.9).unwrap() - 0.9f64.cos()).abs() < 1e-10);
}

#[test]
fn cardinal_functions_sum_to_one() {
    for fam in FAMILIES {
        let m = CollocationMesh::new(fam, 12, (0.0, 2.0)).unwrap();
        for x in [0.0, 0.013, 0.7, 1.99, 2.0] {
            let s: f64 = m.cardinal_values(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}

proptest! {
    #[test]
    fn interpolation_reproduces_polynomials(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..12),
        zeros in any::<bool>(),
        probe in 0.0f64..1.0,
    ) {
        let fam = if zeros { NodeFamily::ZerosPlusLeftEndpoint } else { NodeFamily::Extrema };
        let deg = coeffs.len() - 1;
        let n = deg.max(1);
        let m = CollocationMesh::new(fam, n, (0.0, 1.0)).unwrap();
        let p = |a: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * a + c);
        let v: Vec<f64> = m.nodes().iter().map(|&a| p(a)).collect();
        let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1e-3);
        prop_assert!((m.interpolate(&v, probe).unwrap() - p(probe)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn affine_covariance(n in 1usize..40, len in 0.1f64..100.0, zeros in any::<bool>()) {
        let fam = if zeros { NodeFamily::ZerosPlusLeftEndpoint } else { NodeFamily::Extrema };
        let unit = CollocationMesh::new(fam, n, (0.0, 1.0)).unwrap();
        let scaled = CollocationMesh::new(fam, n, (0.0, len)).unwrap();
        for (u, s) in unit.nodes().iter().zip(scaled.nodes()) {
            prop_assert!((u * len - s).abs() <= 1e-13 * len);
        }
        let du = differentiation_matrix(&unit);
        let ds = differentiation_matrix(&scaled);
        for i in 0..n {
            // rounding of scaled nodes is amplified by the ~1/N² node gaps
            let row = (0..n).fold(0.0f64, |m, j| m.max(du.entries()[(i, j)].abs())) / len;
            let tol = 1e-13_f64.max(4.0 * f64::EPSILON * (n * n) as f64) * row;
            for j in 0..n {
                let want = du.entries()[(i, j)] / len;
                prop_assert!((ds.entries()[(i, j)] - want).abs() <= tol);
            }
        }
        let (fu, fs) = if zeros {
            (fejer1_rule(n, (0.0, 1.0)).unwrap(), fejer1_rule(n, (0.0, len)).unwrap())
        } else {
            (clenshaw_curtis_rule(n, (0.0, 1.0)).unwrap(), clenshaw_curtis_rule(n, (0.0, len)).unwrap())
        };
        for (u, s) in fu.weights.iter().zip(&fs.weights) {
            prop_assert!((u * len - s).abs() <= 1e-13 * s.abs());
        }
    }

    #[test]
    fn differentiation_then_integration_is_identity(n in 1usize..30, zeros in any::<bool>(), seed in prop::collection::vec(-5.0f64..5.0, 30)) {
        let fam = if zeros { NodeFamily::ZerosPlusLeftEndpoint } else { NodeFamily::Extrema };
        let m = CollocationMesh::new(fam, n, (0.0, 2.0)).unwrap();
        let d = differentiation_matrix(&m);
        let p = partial_integral_weights(&d).unwrap();
        let v = &seed[..n];
        let back = p.apply(&d.apply(v));
        let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        for (b, x) in back.iter().zip(v) {
            prop_assert!((b - x).abs() <= 1e-10 * scale);
        }
    }
}
