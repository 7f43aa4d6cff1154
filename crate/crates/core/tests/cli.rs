use std::process::{Command, Output};

use natstar::cli::{star_report, Engine};
use natstar::geometry::{catalog, PhasePoint};

fn natstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natstar")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = args.to_vec();
    full.push("--json");
    let out = natstar(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(natstar(&["models"]).status.code(), Some(0));
    assert_eq!(natstar(&["--help"]).status.code(), Some(0));
    assert_eq!(natstar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(natstar(&["check", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(natstar(&["check", "--model", "no-such-model"]).status.code(), Some(2));

    let flat_on_sphere = natstar(&["check", "--model", "unit-sphere", "--suite", "flat"]);
    assert_eq!(flat_on_sphere.status.code(), Some(2));

    let ok = natstar(&["check", "--model", "euclidean-polar", "--suite", "moyal", "--samples", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    // an impossible tolerance makes checks fail with exit 1
    let strict = natstar(&["check", "--suite", "moyal", "--samples", "2", "--tol", "1e-300", "--model", "euclidean-polar"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn models_lists_catalog() {
    let out = String::from_utf8(natstar(&["models"]).stdout).unwrap();
    for name in ["euclidean-cartesian", "euclidean-polar", "euclidean-spherical", "unit-sphere", "hyperbolic-half-plane"] {
        assert!(out.lines().any(|l| l == name), "{name} missing from {out}");
    }
}

#[test]
fn moyal_bracket_of_position_and_momentum() {
    let v = json(&["star", "--engine", "moyal", "--f", "x1", "--g", "p1"]);
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms[0]["derivatives"]["1,0,1,0"], serde_json::json!([1.0, 0.0]));
    assert_eq!(terms[1]["derivatives"]["0,0,0,0"], serde_json::json!([0.0, 0.5]));
}

#[test]
fn star_output_matches_library() {
    let args = [
        "star", "--model", "unit-sphere", "--engine", "family-a", "--a", "0.5", "--f", "sin(theta)*p_phi", "--g",
        "p_theta^2 + cos(phi)", "--point", "1.1,0.4", "--momentum", "0.3,-0.7",
    ];
    let cli = json(&args);
    let model = catalog("unit-sphere").unwrap();
    let pt = PhasePoint {
        x: vec![1.1, 0.4],
        p: vec![0.3, -0.7],
    };
    let lib = star_report(
        &model,
        Engine::FamilyA,
        "sin(theta)*p_phi",
        "p_theta^2 + cos(phi)",
        &pt,
        8,
        3,
        0.5,
    )
    .unwrap();
    assert_eq!(cli, serde_json::to_value(&lib).unwrap());
    assert_eq!(cli["hbar_order"], 3);
}

#[test]
fn geometry_examples() {
    let polar = json(&["geometry", "--model", "euclidean-polar", "--point", "2,0.3"]);
    let g = &polar["christoffel"];
    // Γ^r_{θθ} = −r, Γ^θ_{rθ} = 1/r
    assert!((g[0][1][1].as_f64().unwrap() + 2.0).abs() < 1e-14);
    assert!((g[1][0][1].as_f64().unwrap() - 0.5).abs() < 1e-14);

    let sphere = json(&["geometry", "--model", "unit-sphere", "--point", "1.5707963267948966,0"]);
    let ric = &sphere["ricci"];
    assert!((ric[0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((ric[1][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(ric[0][1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn operator_reports() {
    let v = json(&["operator", "--model", "unit-sphere", "--natural", "--a", "0"]);
    assert!(v["relative_defect"].as_f64().unwrap() < 1e-8);
    let notes = v["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("0.25")), "{notes:?}");

    let quartic = natstar(&["operator", "--model", "euclidean-polar", "--symbol", "p_theta^4"]);
    assert_eq!(quartic.status.code(), Some(2));
    assert!(stderr(&quartic).contains("momentum degree 4 not supported"));
}

#[test]
fn parse_errors_point_at_the_input() {
    let out = natstar(&["star", "--f", "x1 + * p1", "--g", "p1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains('^'), "{}", stderr(&out));
}

#[test]
fn config_file_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "model = \"euclidean-polar\"\nsuite = \"moyal\"\nsamples = 2\nseed = 11\n",
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let run = natstar(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);
    assert_eq!(report["model"], "euclidean-polar");
    assert_eq!(report["suite"], "moyal");
    assert_eq!(report["passed"], true);
    assert_eq!(report["schema_version"], 1);

    std::fs::write(&cfg, "model = \"euclidean-polar\"\nbogus = 1\n").unwrap();
    let bad = natstar(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("bogus"), "{}", stderr(&bad));
}
