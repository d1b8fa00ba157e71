//! Scenario loading, validation errors, report round-trips, and the CSV
//! trajectory format.

use frg_cli::report;
use frg_cli::runner;
use frg_cli::scenario::{self, ScenarioFile};
use std::path::Path;

fn scenarios_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn shipped_scenarios_load() {
    for name in [
        "flat_vacuum",
        "flat_constant_A",
        "flat_wave_A",
        "vacuum_weakfield",
        "coupled_weakfield",
    ] {
        let sc = scenario::load_scenario(&scenarios_dir().join(format!("{name}.json")))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(sc.file.name, name);
        let probes = sc.probes(Some(5), None);
        assert!(probes.len() >= 5, "{name}: expected probes");
    }
}

#[test]
fn flat_vacuum_catalog_content() {
    let sc = scenario::load_scenario(&scenarios_dir().join("flat_vacuum.json")).unwrap();
    assert_eq!(sc.background.m, 1.0);
    assert!(sc.background.potential_is_zero());
    let gt = sc.background.gtilde_at(&[0.3, 0.1, -0.5, 0.9]).unwrap();
    assert_eq!(gt[0][0], 1.0);
    assert_eq!(gt[1][1], -1.0);
    assert_eq!(gt[0][1], 0.0);
}

#[test]
fn asymmetric_metric_names_the_pair() {
    let json = r#"{
        "name": "bad",
        "metric": { "entries": [
            ["1", "x1", "0", "0"],
            ["0", "-1", "0", "0"],
            ["0", "0", "-1", "0"],
            ["0", "0", "0", "-1"]
        ]}
    }"#;
    let file: ScenarioFile = serde_json::from_str(json).unwrap();
    let err = scenario::compile(file).unwrap_err();
    let msg = err.to_string();
    assert!(
        msg.contains("[0][1]") && msg.contains("[1][0]"),
        "error should name the offending pair: {msg}"
    );
}

#[test]
fn undeclared_parameter_names_identifier() {
    let json = r#"{
        "name": "bad",
        "metric": { "catalog": "minkowski" },
        "potential": ["1 + 2*phi", "0", "0", "0"]
    }"#;
    let file: ScenarioFile = serde_json::from_str(json).unwrap();
    let err = scenario::compile(file).unwrap_err();
    assert!(
        err.to_string().contains("phi"),
        "error should name `phi`: {err}"
    );
}

#[test]
fn unknown_field_is_schema_error() {
    let json = r#"{ "name": "bad", "metric": { "catalog": "minkowski" }, "extra": 1 }"#;
    let err = serde_json::from_str::<ScenarioFile>(json).unwrap_err();
    assert!(err.to_string().contains("extra"));
}

#[test]
fn missing_file_reports_path() {
    let err = scenario::load_scenario(Path::new("/nonexistent/nothing.json")).unwrap_err();
    assert!(err.to_string().contains("nothing.json"));
}

#[test]
fn report_echo_reloads_equivalently() {
    let sc = scenario::load_scenario(&scenarios_dir().join("coupled_weakfield.json")).unwrap();
    let probes = sc.probes(Some(2), None);
    let rep = runner::run_inspect(&sc, &probes, 1);
    let bytes = report::to_json_bytes(&rep);
    let parsed: report::RunReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(parsed.scenario, sc.file);
    // and the echoed scenario compiles again
    let re = scenario::compile(parsed.scenario).unwrap();
    assert_eq!(re.file, sc.file);
}

#[test]
fn inspect_collects_domain_errors_per_probe() {
    let sc = scenario::load_scenario(&scenarios_dir().join("flat_vacuum.json")).unwrap();
    // one good probe, one spacelike probe
    let probes = vec![
        frg_core::randers::TangentPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]),
        frg_core::randers::TangentPoint::new([0.0; 4], [1.0, 2.0, 0.0, 0.0]),
    ];
    let rep = runner::run_inspect(&sc, &probes, 1);
    assert!(rep.probes[0].error.is_none());
    assert!(rep.probes[0].finsler.is_some());
    let msg = rep.probes[1].error.as_deref().unwrap();
    assert!(msg.contains("timelike"), "unexpected error: {msg}");
    assert!(rep.probes[1].finsler.is_none());
}

#[test]
fn validate_flags_spacelike_probes_as_skips() {
    let sc = scenario::load_scenario(&scenarios_dir().join("flat_vacuum.json")).unwrap();
    let probes = vec![
        frg_core::randers::TangentPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]),
        frg_core::randers::TangentPoint::new([0.0; 4], [0.5, 2.0, 0.0, 0.0]),
    ];
    let rep = runner::run_validate(&sc, &probes);
    assert!(rep.invariants.iter().all(|r| r.pass));
    assert!(rep.invariants.iter().all(|r| r.domain_skips == 1));
}

#[test]
fn geodesic_csv_format() {
    let sc = scenario::load_scenario(&scenarios_dir().join("flat_vacuum.json")).unwrap();
    let dir = std::env::temp_dir().join("frg_geo_test");
    std::fs::create_dir_all(&dir).unwrap();
    let rep = runner::run_geodesics(&sc, &dir).unwrap();
    assert_eq!(rep.trajectories.len(), 1);
    let t = &rep.trajectories[0];
    assert!(t.conservation_drift < 1e-10);
    let csv = std::fs::read_to_string(dir.join(&t.csv_file)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,x0,x1,x2,x3,y0,y1,y2,y3,L");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 10);
    assert_eq!(first[0], "0");
    // straight line: last row x1 = 0.3 * 10
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let x1: f64 = last[2].parse().unwrap();
    assert!((x1 - 3.0).abs() < 1e-10);
}

#[test]
fn corrupted_coupling_is_caught_by_route_equivalence() {
    // Rebuilding the spray with a corrupted S-tensor coefficient must blow
    // the route-equivalence budget; this is the mutation check that the
    // invariant suite has teeth.
    let sc = scenario::load_scenario(&scenarios_dir().join("coupled_weakfield.json")).unwrap();
    let bg = &sc.background;
    let p = frg_core::randers::TangentPoint::new([0.3, 0.7, -0.4, 0.9], [1.0, 0.31, -0.2, 0.12]);
    let t = frg_core::spray::decomposed_tensors::<f64>(bg, &p.x, &p.y, None).unwrap();
    let (l_unused, alpha, _, _) = frg_core::randers::finsler_function(bg, &p).unwrap();
    let _ = l_unused;
    let g = frg_core::randers::fundamental_tensor_hessian(bg, &p).unwrap();
    let (ginv, _) = frg_core::linalg::inv4(&g).unwrap();
    use frg_core::linalg::{sum1, vec4};
    // corrupt: drop the factor 2 on the first S coefficient
    let corrupt = |nu: usize, la: usize, s: usize| -> f64 {
        t.s_tensor[nu][la][s]
            - {
                // recompute the first term and halve it
                let at = bg.background_at(p.x, 1).unwrap();
                let av = at.a_val;
                let da = at.da;
                let e = bg.e;
                let d_aa = |i: usize, j: usize, sd: usize| da[i][sd] * av[j] + av[i] * da[j][sd];
                e * e * d_aa(nu, s, la) // remove half of the 2e^2 term
            }
    };
    let contract = vec4(|nu| {
        sum1(|s| {
            (-2.0 * bg.e * alpha * t.f_em[nu][s]
                + sum1(|la| {
                    (corrupt(nu, la, s) + t.q_tensor[nu][la][s] + t.m_tensor[nu][la][s]) * p.y[la]
                }))
                * p.y[s]
        })
    });
    let g_bad = vec4(|mu| 0.25 * sum1(|nu| ginv[mu][nu] * contract[nu]));
    let g_good = frg_core::spray::spray_general(bg, &p).unwrap();
    let spread = frg_core::linalg::max_abs_v4(&vec4(|i| g_bad[i] - g_good[i]));
    let scale = frg_core::linalg::max_abs_v4(&g_good).max(1.0);
    assert!(
        spread / scale > 1e-8,
        "corrupted coefficient slipped through route equivalence: {spread}"
    );
}
