use std::process::Command;

use serde_json::Value;
use swl_core::cli::run;

fn swl(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("swl").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("not JSON ({e}): {s}"))
}

#[test]
fn haar_wavelet_passes_and_scaling_fails() {
    let (code, out, _) = swl(&["check-wavelet", "--basis", "haar", "--function", "haar_wavelet", "--pq", "3", "--window", "6"]);
    assert_eq!(code, 0);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["report"]["verdict"], "pass");
    assert_eq!(doc["config"]["pq"], 3);
    assert_eq!(doc["config"]["window"]["dil_labels"]["hi"], 127);

    let (code, out, _) = swl(&["check-wavelet", "--basis", "haar", "--function", "haar_scaling", "--pq", "3", "--window", "6"]);
    assert_eq!(code, 1);
    let doc = json(&out);
    let at = doc["report"]["details"].as_array().unwrap().iter().find(|d| d["index"] == "wavelet_orthonormality:(p=1,q=0)").unwrap();
    assert!((at["residual"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
}

#[test]
fn alpha_row_lists_geometric_tail() {
    let (code, out, _) = swl(&["alpha", "--basis", "haar", "--row", "i=1", "n=0", "--mmax", "4"]);
    assert_eq!(code, 0);
    let doc = json(&out);
    let e = doc["entries"].as_array().unwrap();
    let ms: Vec<i64> = e.iter().map(|x| x["m"].as_i64().unwrap()).collect();
    assert_eq!(ms, vec![1, 2, 3, 4]);
    assert!(e.iter().all(|x| x["s"] == "+" && x["j"] == 0));
    let re: Vec<f64> = e.iter().map(|x| x["value"][0].as_f64().unwrap()).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (got, want) in re.iter().zip([-h, 0.5, 0.5 * h, 0.25]) {
        assert!((got - want).abs() < 1e-15);
    }
    assert!((doc["tail_sq"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-15);

    let (code, out, _) = swl(&["alpha", "--basis", "exponential", "--entry", "i=0", "n=0", "s=+", "j=0", "m=0"]);
    assert_eq!(code, 0);
    assert!(json(&out)["entry"]["value"].is_array());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["check-wavelet", "--basis", "cubic", "--function", "haar_wavelet"],
        vec!["check-wavelet", "--function", "haar_wavelet("],
        vec!["check-wavelet", "--function", "haar_wavelet", "--fset", "+0,x"],
        vec!["coords", "--function", "haar_wavelet", "--n-range", "3:1"],
        vec!["alpha", "--row", "i=-1", "n=0"],
        vec!["alpha"],
        vec!["frobnicate"],
        vec!["filter", "mirror", "--filter", "/no/such/file.json"],
    ] {
        let (code, out, err) = swl(&args);
        assert_eq!(code, 2, "{args:?}: {out}");
        assert!(out.is_empty(), "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    let (code, out, _) = swl(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("check-wavelet"));
}

#[test]
fn act_matches_oracle_both_orders() {
    for order in ["dt", "td"] {
        for model in ["f", "g"] {
            let (code, out, err) = swl(&["act", "--function", "haar_wavelet", "--p", "-1", "--q", "2", "--order", order, "--model", model]);
            assert_eq!(code, 0, "{order} {model}: {err}");
            let doc = json(&out);
            assert!(doc["report"]["max_residual"].as_f64().unwrap() <= 1e-9);
            assert_eq!(doc["result"]["model"], model.to_uppercase());
        }
    }
}

#[test]
fn coefficient_files_feed_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.json");
    let p = path.to_str().unwrap();
    let (code, _, _) = swl(&["coords", "--function", "dt(0,1,haar_wavelet)", "--model", "g", "--out", p]);
    assert_eq!(code, 0);
    let doc = json(&std::fs::read_to_string(&path).unwrap());
    let g = doc["g"].clone();
    std::fs::write(&path, serde_json::to_string(&g).unwrap()).unwrap();

    let (code, out, err) = swl(&["check-wavelet", "--coeffs", p, "--example1", "--fset", "+0,+1,-1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["report"]["check_name"], "example1");

    let (code, _, err) = swl(&["check-wavelet", "--basis", "exponential", "--coeffs", p]);
    assert_eq!(code, 2);
    assert!(err.contains("family"));
}

#[test]
fn scaling_fourier_and_filters() {
    assert_eq!(swl(&["check-scaling", "--function", "haar_scaling"]).0, 0);
    assert_eq!(swl(&["check-scaling", "--function", "indicator(0,2)"]).0, 1);
    assert_eq!(swl(&["fourier-check", "--function", "shannon_scaling", "--check", "scaling"]).0, 0);
    assert_eq!(swl(&["fourier-check", "--function", "haar_scaling", "--check", "translates", "--k", "64", "--grid", "512"]).0, 0);
    assert_eq!(swl(&["fourier-check", "--function", "haar_wavelet", "--check", "shift", "--shift", "-3"]).0, 0);
    assert_eq!(swl(&["fourier-check", "--function", "indicator(-1,1)", "--check", "translates"]).0, 1);

    let (code, out, _) = swl(&["filter", "extract", "--function", "haar_scaling"]);
    assert_eq!(code, 0);
    let h = json(&out)["filter"].clone();
    assert!((h["0"][0].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

    let inline = serde_json::to_string(&h).unwrap();
    let (code, out, _) = swl(&["filter", "mirror", "--filter", &inline]);
    assert_eq!(code, 0);
    assert!(json(&out)["filter"]["0"][0].as_f64().unwrap() < 0.0);

    assert_eq!(swl(&["filter", "check-pair", "--filter", "d4"]).0, 0);
    assert_eq!(swl(&["filter", "check-pair", "--filter", "haar", "--g", "haar"]).0, 1);
    let (code, out, _) = swl(&["filter", "prop27", "--filter", "haar", "--tol", "1e-10"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["report"]["metrics"]["matches_haar_wavelet:sign"].as_f64().unwrap().abs(), 1.0);
}

#[test]
fn binary_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_swl");
    let args = ["check-wavelet", "--function", "haar_wavelet", "--pq", "2"];
    let a = Command::new(bin).args(args).env("SWL_THREADS", "1").output().unwrap();
    let b = Command::new(bin).args(args).env("SWL_THREADS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"tol\": 1.0000000000000001e-9"));

    let bad = Command::new(bin).args(["check-wavelet", "--basis", "nope", "--function", "haar_wavelet"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
}
