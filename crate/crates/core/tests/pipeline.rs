//! Cross-module identities on the full tensor chain: route equivalence for
//! the spray, connection/curvature consistency, metricity, and the
//! Riemannian-limit oracle.

use frg_core::background::ScenarioBackground;
use frg_core::curvature::{
    chern_connection, chern_riemann, covariant_derivative, nonlinear_connection, ricci,
    MetricField,
};
use frg_core::linalg::{mat4, max_abs_m4, max_abs_t3, max_abs_v4, sum1, sum2, ten3, vec4};
use frg_core::randers::{cartan_tensor, fundamental_tensor_hessian, TangentPoint};
use frg_core::riemann;
use frg_core::spray::{berwald_report, spray_decomposed, spray_general};

/// Coupled scenario with non-unit mass and charge; the worst case for
/// factor bookkeeping.
fn coupled(m: f64, e: f64) -> ScenarioBackground {
    ScenarioBackground::weak_field(
        "eps*sin(x1)*cos(2*x2 + 0.5*x3)",
        m,
        e,
        1.0,
        &[("eps".to_string(), 0.01)],
    )
    .unwrap()
    .with_potential([
        "0.03*cos(x1)",
        "0.02*sin(x2 + 0.3*x0)",
        "0.011*sin(x3)",
        "0.015*sin(x1 + x3)",
    ])
    .unwrap()
}

fn probe() -> TangentPoint {
    TangentPoint::new([0.3, 0.7, -0.4, 0.9], [1.0, 0.31, -0.2, 0.12])
}

fn sample_points(seed: u64, n: usize) -> Vec<TangentPoint> {
    let mut state = seed;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let x = [
                next() * 2.0 - 1.0,
                next() * 2.0 - 1.0,
                next() * 2.0 - 1.0,
                next() * 2.0 - 1.0,
            ];
            // mildly relativistic velocities keep every probe timelike
            let y = [
                1.0 + 0.3 * next(),
                0.4 * (next() - 0.5),
                0.4 * (next() - 0.5),
                0.4 * (next() - 0.5),
            ];
            TangentPoint::new(x, y)
        })
        .collect()
}

#[test]
fn flat_vacuum_is_inert() {
    let bg = ScenarioBackground::minkowski(1.0, 1.0, 1.0);
    for p in sample_points(7, 20) {
        let g = spray_general(&bg, &p).unwrap();
        assert_eq!(max_abs_v4(&g), 0.0, "spray must vanish exactly");
        let n = nonlinear_connection(&bg, &p).unwrap();
        assert_eq!(max_abs_m4(&n), 0.0);
        let (gamma, gap) = chern_connection(&bg, &p).unwrap();
        assert_eq!(max_abs_t3(&gamma), 0.0);
        assert_eq!(gap, 0.0);
        let cr = chern_riemann(&bg, &p).unwrap();
        assert!(max_abs_t3(&cr.r_hv) < 1e-12);
        let r = ricci(&bg, &p).unwrap();
        assert!(r.ric.abs() < 1e-12);
        assert!(max_abs_m4(&r.ric_tensor) < 1e-12);
    }
}

#[test]
fn spray_routes_agree_on_coupled_background() {
    let bg = coupled(1.3, 0.7);
    for p in sample_points(11, 25) {
        let bundle = spray_decomposed(&bg, &p).unwrap();
        assert!(
            bundle.route_spread / bundle.route_scale < 1e-12,
            "route spread {} at x={:?}",
            bundle.route_spread,
            p.x
        );
    }
}

#[test]
fn spray_regression_value() {
    // Frozen from an independent exact-AD evaluation of the same analytic
    // scenario (m = 1.3, e = 0.7) at this fixed tangent point.
    let bg = coupled(1.3, 0.7);
    let g = spray_general(&bg, &probe()).unwrap();
    let want = [
        -2.08115247591157291e-3,
        -2.17189166163120340e-3,
        4.48308584639260828e-3,
        -4.26055060804888250e-5,
    ];
    for i in 0..4 {
        assert!(
            (g[i] - want[i]).abs() < 1e-14,
            "G[{i}] = {:.15e}, want {:.15e}",
            g[i],
            want[i]
        );
    }
}

#[test]
fn spray_two_homogeneity() {
    let bg = coupled(1.0, 1.0);
    for p in sample_points(23, 10) {
        let g1 = spray_general(&bg, &p).unwrap();
        for lam in [0.5, 2.0] {
            let scaled = TangentPoint::new(p.x, vec4(|i| lam * p.y[i]));
            let g2 = spray_general(&bg, &scaled).unwrap();
            let scale = max_abs_v4(&g1).max(1.0);
            for i in 0..4 {
                assert!(
                    (g2[i] - lam * lam * g1[i]).abs() / scale < 1e-10,
                    "homogeneity broken at lambda={lam}"
                );
            }
        }
    }
}

#[test]
fn nonlinear_connection_euler_identity() {
    // N^mu_nu y^nu = 2 G^mu for the 2-homogeneous spray.
    let bg = coupled(1.3, 0.7);
    for p in sample_points(31, 10) {
        let n = nonlinear_connection(&bg, &p).unwrap();
        let g = spray_general(&bg, &p).unwrap();
        let scale = max_abs_v4(&g).max(1.0);
        for m in 0..4 {
            let ny = sum1(|nu| n[m][nu] * p.y[nu]);
            assert!(
                (ny - 2.0 * g[m]).abs() / scale < 1e-10,
                "N y != 2G at component {m}"
            );
        }
    }
}

#[test]
fn geodesic_deviation_identity() {
    // gamma^mu yy - gammatilde^mu yy + B^mu = 0 (the closed-form deviation
    // against the route-3 contraction), including for non-unit mass.
    for (m, e) in [(1.0, 1.0), (1.3, 0.7)] {
        let bg = coupled(m, e);
        for p in sample_points(41, 10) {
            let bundle = spray_decomposed(&bg, &p).unwrap();
            let rep = berwald_report(&bg, &p).unwrap();
            let gamma_yy = vec4(|mu| 2.0 * bundle.g_christoffel[mu]);
            let gamma_tilde_yy =
                vec4(|mu| sum2(|j, k| bundle.gamma_tilde[mu][j][k] * p.y[j] * p.y[k]));
            let resid = vec4(|mu| gamma_yy[mu] - gamma_tilde_yy[mu] + rep.deviation[mu]);
            assert!(
                max_abs_v4(&resid) < 1e-8,
                "deviation identity residual {} (m={m}, e={e})",
                max_abs_v4(&resid)
            );
        }
    }
}

#[test]
fn chern_connection_properties() {
    let bg = coupled(1.0, 1.0);
    for p in sample_points(53, 8) {
        let (gamma, gap) = chern_connection(&bg, &p).unwrap();
        assert!(gap < 1e-8, "cross-check gap {gap}");
        // torsion freeness
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    assert!(
                        (gamma[l][m][n] - gamma[l][n][m]).abs() < 1e-14,
                        "Gamma not symmetric"
                    );
                }
            }
        }
        // Gamma^mu_{sigma nu} y^sigma = N^mu_nu
        let nc = nonlinear_connection(&bg, &p).unwrap();
        let scale = max_abs_m4(&nc).max(1.0);
        for mu in 0..4 {
            for nu in 0..4 {
                let gy = sum1(|s| gamma[mu][s][nu] * p.y[s]);
                assert!((gy - nc[mu][nu]).abs() / scale < 1e-10, "Gamma y != N");
            }
        }
    }
}

#[test]
fn metricity_identities() {
    // g_{mu nu | rho} = 0 and g_{mu nu ; rho} = 2 C_{mu nu rho}.
    let bg = coupled(1.0, 1.0);
    for p in sample_points(67, 8) {
        let (h, v) = covariant_derivative(&MetricField, &bg, &p).unwrap();
        let at = bg.background_at(p.x, 1).unwrap();
        let dg_scale = max_abs_t3(&at.dgtilde).max(1e-3);
        assert!(
            max_abs_t3(&h) < 1e-8 * dg_scale.max(1.0),
            "horizontal metricity violated: {}",
            max_abs_t3(&h)
        );
        let c = cartan_tensor(&bg, &p).unwrap();
        let resid = ten3(|i, j, k| v[i][j][k] - 2.0 * c[i][j][k]);
        assert!(
            max_abs_t3(&resid) < 1e-10,
            "vertical derivative != 2C: {}",
            max_abs_t3(&resid)
        );
    }
}

#[test]
fn hv_curvature_consistency_and_antisymmetry() {
    let bg = coupled(1.0, 1.0);
    for p in sample_points(71, 6) {
        let cr = chern_riemann(&bg, &p).unwrap();
        let scale = max_abs_t3(&cr.r_hv).max(1.0);
        assert!(
            cr.consistency_gap / scale < 1e-10,
            "y.R_full != R_hv: {}",
            cr.consistency_gap
        );
        for m in 0..4 {
            for n in 0..4 {
                for k in 0..4 {
                    assert!(
                        (cr.r_hv[m][n][k] + cr.r_hv[m][k][n]).abs() / scale < 1e-10,
                        "R_hv not antisymmetric in its lower pair"
                    );
                }
            }
        }
    }
}

#[test]
fn ricci_two_routes_and_euler() {
    let bg = coupled(1.3, 0.7);
    for p in sample_points(83, 6) {
        let r = ricci(&bg, &p).unwrap();
        let scale = r.ric.abs().max(1.0);
        assert!(r.route_gap / scale < 1e-7, "Ricci route gap {}", r.route_gap);
        // Ric = y Ric_tensor y (Euler identity on the 2-homogeneous scalar)
        let contracted = sum2(|m, n| p.y[m] * r.ric_tensor[m][n] * p.y[n]);
        assert!(
            (contracted - r.ric).abs() / scale < 1e-8,
            "y Ric y = {contracted} vs Ric = {}",
            r.ric
        );
        // trace of R^mu_nu is the scalar (definitional)
        let tr = sum1(|m| r.r_map[m][m]);
        assert!((tr - r.ric).abs() / scale < 1e-12);
    }
}

#[test]
fn ricci_regression_values() {
    // Frozen from an independent exact-AD evaluation at the fixed probe.
    let cases = [
        (1.0, 1.0, -4.8112372351e-2),
        (1.3, 0.7, -4.3157678432e-2),
        (1.3, 0.0, -3.7164669473e-2),
    ];
    for (m, e, want) in cases {
        let bg = coupled(m, e);
        let r = ricci(&bg, &probe()).unwrap();
        assert!(
            (r.ric - want).abs() < 1e-11,
            "Ric(m={m}, e={e}) = {:.10e}, want {want:.10e}",
            r.ric
        );
    }
}

#[test]
fn riemannian_limit_oracle() {
    // A = 0: the Chern connection is the Levi-Civita connection of gtilde,
    // and Ric equals the Riemannian Ricci contraction, computed here in
    // closed form from background derivatives without any Finsler step.
    let bg = coupled(1.3, 0.0);
    for p in sample_points(97, 8) {
        let (gamma, _) = chern_connection(&bg, &p).unwrap();
        let at = bg.background_at(p.x, 2).unwrap();
        let gamma_tilde = riemann::christoffel_tilde(&at).unwrap();
        let gap = max_abs_t3(&ten3(|i, j, k| gamma[i][j][k] - gamma_tilde[i][j][k]));
        assert!(gap < 1e-8, "Gamma != gammatilde in the Riemannian limit: {gap}");

        let ric_oracle = riemann::ricci_tilde(&at).unwrap();
        let want = sum2(|m, n| p.y[m] * ric_oracle[m][n] * p.y[n]);
        let r = ricci(&bg, &p).unwrap();
        assert!(
            (r.ric - want).abs() / want.abs().max(1.0) < 1e-6,
            "Ric {} vs Riemannian oracle {}",
            r.ric,
            want
        );
    }
}

#[test]
fn fundamental_tensor_riemannian_limit_is_scaled_metric() {
    let bg = coupled(1.3, 0.0);
    let p = probe();
    let g = fundamental_tensor_hessian(&bg, &p).unwrap();
    let gt = bg.gtilde_at(&p.x).unwrap();
    let m2 = 1.3 * 1.3;
    let diff = max_abs_m4(&mat4(|i, j| g[i][j] - m2 * gt[i][j]));
    assert!(diff < 1e-13, "g != m^2 gtilde in the vacuum limit: {diff}");
}
