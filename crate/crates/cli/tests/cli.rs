use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_margin-guard"));
    c.env_remove("MARGIN_GUARD_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

/// Two separated clusters in the plane with a group column.
fn write_dataset(dir: &Path) -> PathBuf {
    let mut s = String::from("x1,x2,label,group\n");
    for i in 0..40 {
        let t = i as f64 / 40.0;
        let (a, b) = ((t * 7.0).sin() * 0.3, (t * 11.0).cos() * 0.3);
        s += &format!(
            "{},{},1,{}\n",
            0.4 + a,
            b,
            if i % 3 == 0 { "a" } else { "b" }
        );
        s += &format!(
            "{},{},-1,{}\n",
            -0.4 + a,
            b,
            if i % 2 == 0 { "a" } else { "b" }
        );
    }
    let p = dir.join("data.csv");
    std::fs::write(&p, s).unwrap();
    p
}

#[test]
fn analytic_planar_half() {
    let v = json(&run(&[
        "analytic",
        "--d",
        "2",
        "--alpha",
        "0.7071067811865476",
        "--r",
        "0.7653668647301796",
    ]));
    assert!(close(&v["pi"], 0.5, 1e-6), "{v}");
    assert_eq!(v["saturated"], false);
}

#[test]
fn analytic_saturates_when_band_covers_cap() {
    let v = json(&run(&[
        "analytic", "--d", "5", "--phi", "0.2", "--psi", "0.5",
    ]));
    assert_eq!(v["pi"].as_f64(), Some(1.0));
    assert_eq!(v["saturated"], true);
}

#[test]
fn analytic_reports_alpha_for_kappa() {
    let v = json(&run(&[
        "analytic", "--d", "3", "--alpha", "0.5", "--psi", "0.2", "--kappa", "0.1",
    ]));
    assert!(v.get("alpha_for_kappa").is_some(), "{v}");
}

#[test]
fn analytic_rejects_cutoff_above_one() {
    let out = run(&["analytic", "--d", "2", "--alpha", "1.2", "--psi", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn counterexample_verdicts() {
    let v = json(&run(&["counterexample", "off-sphere"]));
    assert_eq!(v["nonmonotone"], true);
    assert!(close(&v["pi_alpha1"], 0.625, 1e-12) && close(&v["pi_alpha2"], 0.6, 1e-12));

    let v = json(&run(&[
        "counterexample",
        "affine-mixture",
        "--gamma",
        "0.7853981633974483",
        "--psi",
        "0.7853981633974483",
    ]));
    assert_eq!(v["at_least_one_third"], true);

    let v = json(&run(&[
        "counterexample",
        "skewed-prior",
        "--seed",
        "1",
        "--n",
        "20000",
    ]));
    assert_eq!(v["pi1_exceeds_pi2"], true);

    let v = json(&run(&[
        "counterexample",
        "threshold-1d",
        "--x-minus",
        "0",
        "--x-plus",
        "1",
        "--x",
        "0.25",
        "--x-prime",
        "0.75",
    ]));
    assert!(close(&v["pi"], 0.5, 1e-12));
}

#[test]
fn data_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out = run(&[
        "curve",
        "--dataset",
        data.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = bin()
        .args(["analytic", "--d", "2", "--alpha", "0.5", "--psi", "0.1"])
        .env("MARGIN_GUARD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curve_then_search_on_written_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let d = dir.path().to_str().unwrap();
    let v = json(&run(&[
        "curve",
        "--dataset",
        data.to_str().unwrap(),
        "--seed",
        "4",
        "--r",
        "0.3",
        "--grid",
        "0",
        "--samples",
        "200",
        "--repeats",
        "2",
        "--method",
        "k-medoid",
        "--k",
        "10",
        "--output-dir",
        d,
    ]));
    assert!(v["files"].as_array().unwrap().len() >= 4, "{v}");
    let curve = dir.path().join("curve_max_r0.3.csv");
    let text = std::fs::read_to_string(&curve).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(dir.path().join("curve_report.json").exists());

    let v = json(&run(&[
        "search",
        "--curve",
        curve.to_str().unwrap(),
        "--kappa",
        "1.5",
        "--output-dir",
        d,
    ]));
    assert_eq!(v["tables"][0]["rows"].as_array().unwrap().len(), 1);
    assert!(dir.path().join("difference_max_r0.3.csv").exists());
}

#[test]
fn search_reports_hand_traced_difference_and_missing_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("c.csv");
    std::fs::write(
        &curve,
        "percentile,value,stddev,metric,r,repeats\n\
         0,0.9,0,max,0.1,1\n5,0.3,0,max,0.1,1\n10,0.6,0,max,0.1,1\n15,0.5,0,max,0.1,1\n20,0.2,0,max,0.1,1\n",
    )
    .unwrap();
    let d = dir.path().to_str().unwrap();
    json(&run(&[
        "search",
        "--curve",
        curve.to_str().unwrap(),
        "--kappa",
        "0.4",
        "--output-dir",
        d,
    ]));
    let table = std::fs::read_to_string(dir.path().join("difference_max_r0.1.csv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("0.4,20,5,15"));

    json(&run(&[
        "search",
        "--curve",
        curve.to_str().unwrap(),
        "--kappa",
        "0.1",
        "--output-dir",
        d,
    ]));
    let table = std::fs::read_to_string(dir.path().join("difference_max_r0.1.csv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("0.1,NA,NA,NA"));
}

#[test]
fn audit_explain_fit_and_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let d = dir.path().to_str().unwrap();

    let weights = dir.path().join("w.json");
    let v = json(&run(&[
        "fit",
        "--dataset",
        data.to_str().unwrap(),
        "--out",
        weights.to_str().unwrap(),
    ]));
    assert!(v["training_accuracy"].as_f64().unwrap() > 0.9, "{v}");

    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "dataset": data,
            "weights": weights,
            "r_values": [0.2, 0.5],
            "seed": 3,
            "explanations": {"method": "k-medoid", "k": 8},
        })
        .to_string(),
    )
    .unwrap();

    let v = json(&run(&[
        "audit",
        "--config",
        cfg.to_str().unwrap(),
        "--r",
        "0.5",
    ]));
    assert_eq!(v["model_source"], "weights");
    assert_eq!(v["runs"].as_array().unwrap().len(), 1);
    assert!(v["overall"].get("a").is_some(), "{v}");

    let out = dir.path().join("expl.csv");
    let v = json(&run(&[
        "explain",
        "--config",
        cfg.to_str().unwrap(),
        "--percentile",
        "50",
        "--out",
        out.to_str().unwrap(),
        "--output-dir",
        d,
    ]));
    assert_eq!(v["selected"], 8);
    assert_eq!(v["released"], 4);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);
}
