use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use natstar_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ns_last_error()) }.to_string_lossy().into_owned()
}

fn model(name: &str) -> *mut NsModel {
    let name = CString::new(name).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ns_model_catalog(name.as_ptr(), &mut m) }, NsStatus::Ok);
    m
}

#[test]
fn catalog_and_geometry() {
    let m = model("unit-sphere");
    unsafe {
        assert_eq!(ns_model_dimension(m), 2);
        let x = [std::f64::consts::FRAC_PI_2, 0.0];
        let mut ric = [0.0; 4];
        assert_eq!(ns_geometry_ricci(m, x.as_ptr(), 2, ric.as_mut_ptr(), 4), NsStatus::Ok);
        assert!((ric[0] - 1.0).abs() < 1e-12 && (ric[3] - 1.0).abs() < 1e-12 && ric[1].abs() < 1e-12);

        let mut small = [0.0; 3];
        let st = ns_geometry_ricci(m, x.as_ptr(), 2, small.as_mut_ptr(), 3);
        assert_eq!(st, NsStatus::InvalidArgument);
        assert!(last_error().contains("4 needed"), "{}", last_error());

        // θ = 0 is a coordinate singularity of the sphere chart
        let pole = [0.0, 0.0];
        let st = ns_geometry_ricci(m, pole.as_ptr(), 2, ric.as_mut_ptr(), 4);
        assert_eq!(st, NsStatus::DomainError, "{}", last_error());
        ns_model_free(m);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        let bad = CString::new("no-such-model").unwrap();
        assert_eq!(ns_model_catalog(bad.as_ptr(), &mut m), NsStatus::ModelError);
        assert!(m.is_null());
        assert!(last_error().contains("no-such-model"));
        assert_eq!(ns_model_catalog(ptr::null(), &mut m), NsStatus::InvalidArgument);
        assert_eq!(ns_model_dimension(ptr::null()), 0);
        assert_eq!(ns_report_passed(ptr::null()), -1);
        assert!(ns_report_json(ptr::null()).is_null());
        ns_model_free(ptr::null_mut());
        ns_report_free(ptr::null_mut());
        ns_string_free(ptr::null_mut());

        let m = model("euclidean-cartesian");
        let x = [0.1, 0.2];
        let mut out = [0.0; 8];
        let mut k = 0usize;
        let f = CString::new("x1 + * p1").unwrap();
        let g = CString::new("p1").unwrap();
        let st = ns_star(m, NS_ENGINE_MOYAL, f.as_ptr(), g.as_ptr(), x.as_ptr(), ptr::null(), 2, 3, 0.0, out.as_mut_ptr(), 8, &mut k);
        assert_eq!(st, NsStatus::ParseError);
        assert!(last_error().contains('^'));
        ns_model_free(m);

        let mut r = ptr::null_mut();
        let cfg = CString::new("model = [1, 2]").unwrap();
        assert_eq!(ns_check_run(cfg.as_ptr(), &mut r), NsStatus::ParseError);
        let cfg = CString::new("{\"samples\": 0}").unwrap();
        assert_eq!(ns_check_run(cfg.as_ptr(), &mut r), NsStatus::InvalidArgument);
        let cfg = CString::new("model = \"unit-sphere\"\nsuite = \"flat\"").unwrap();
        assert_eq!(ns_check_run(cfg.as_ptr(), &mut r), NsStatus::DomainError);
        assert!(r.is_null());
    }
}

#[test]
fn star_values_and_json() {
    let m = model("unit-sphere");
    let f = CString::new("sin(theta)*p_phi").unwrap();
    let g = CString::new("p_theta^2 + cos(phi)").unwrap();
    let (x, p) = ([1.1, 0.4], [0.3, -0.7]);
    unsafe {
        let mut out = [0.0; 10];
        let mut k = 0usize;
        let st = ns_star(m, NS_ENGINE_FAMILY_A, f.as_ptr(), g.as_ptr(), x.as_ptr(), p.as_ptr(), 2, 4, 0.5, out.as_mut_ptr(), 10, &mut k);
        assert_eq!(st, NsStatus::Ok, "{}", last_error());
        // family-a is defined through ħ³
        assert_eq!(k, 4);

        let mut json = ptr::null_mut();
        let st = ns_star_json(m, NS_ENGINE_FAMILY_A, f.as_ptr(), g.as_ptr(), x.as_ptr(), p.as_ptr(), 2, 4, 0.5, &mut json);
        assert_eq!(st, NsStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        ns_string_free(json);
        for (i, t) in v["terms"].as_array().unwrap().iter().enumerate() {
            let z = &t["derivatives"]["0,0,0,0"];
            assert_eq!(z[0].as_f64().unwrap(), out[2 * i]);
            assert_eq!(z[1].as_f64().unwrap(), out[2 * i + 1]);
        }
        ns_model_free(m);
    }
}

#[test]
fn custom_model_and_checks() {
    let spec = r#"
name = "scaled-plane"
dimension = 2
variables = ["u", "v"]
metric = [["4", "0"], ["1"]]
to_cartesian = ["2*u", "v"]
flat = true
sample_box = [[-1, 1], [-1, 1]]
"#;
    let spec = CString::new(spec).unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(ns_model_from_config(spec.as_ptr(), &mut m), NsStatus::Ok, "{}", last_error());
        assert_eq!(ns_model_dimension(m), 2);
        let mut gamma = [1.0; 8];
        assert_eq!(ns_geometry_christoffel(m, [0.3, 0.1].as_ptr(), 2, gamma.as_mut_ptr(), 8), NsStatus::Ok);
        assert!(gamma.iter().all(|g| g.abs() < 1e-15));
        ns_model_free(m);

        let mut r = ptr::null_mut();
        let cfg = CString::new("model = \"euclidean-polar\"\nsuite = \"moyal\"\nsamples = 2\ntolerance = 1e-300").unwrap();
        assert_eq!(ns_check_run(cfg.as_ptr(), &mut r), NsStatus::CheckFailed);
        assert_eq!(ns_report_passed(r), 0);
        let json = ns_report_json(r);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["passed"], false);
        ns_string_free(json);
        ns_report_free(r);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/natstar.h")).unwrap();
    for name in [
        "ns_last_error", "ns_model_catalog", "ns_model_from_config", "ns_model_free", "ns_model_dimension",
        "ns_geometry_christoffel", "ns_geometry_ricci", "ns_star", "ns_star_json", "ns_check_run",
        "ns_report_passed", "ns_report_json", "ns_report_free", "ns_string_free", "typedef struct NsModel NsModel",
        "NS_STATUS_CHECK_FAILED",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles tests/smoke.c against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libnatstar_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
