use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdsp_core::applications::{CrwRow, DeltaRow};
use qdsp_core::io::{read_rows, CharFnRow, PmfRow};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn qdsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsp"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_documents_flags() {
    let out = qdsp(&["charfn", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--model",
        "--method",
        "--shots",
        "--ae-m",
        "--seed",
        "--L",
        "--P",
        "--threads",
        "--output",
        "--config",
    ] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    let delta = String::from_utf8(qdsp(&["delta", "--help"]).stdout).unwrap();
    assert!(delta.contains("--params") && delta.contains("--K") && delta.contains("--n"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(qdsp(&["charfn", "--bogus"]).status.code(), Some(1));
    assert_eq!(qdsp(&["charfn"]).status.code(), Some(1));
    let crw = scenario("crw.json");
    assert_eq!(
        qdsp(&["charfn", "--model", s(&crw), "--shots", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qdsp(&["charfn", "--model", s(&crw), "--P", "-3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qdsp(&["charfn", "--model", s(&crw), "--threads", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_model_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let r = qdsp(&[
        "charfn",
        "--model",
        "/nonexistent/model.json",
        "-o",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!String::from_utf8(r.stderr).unwrap().is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"kind": "independent", "x0": 0, "levels": [{"values": [1, 2], "probs": [0.9, 0.9]}]}"#,
    )
    .unwrap();
    assert_eq!(qdsp(&["charfn", "--model", s(&bad)]).status.code(), Some(2));
}

#[test]
fn charfn_grid_has_2l_plus_1_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let r = qdsp(&[
        "charfn",
        "--model",
        s(&scenario("crw.json")),
        "--method",
        "exact",
        "--L",
        "100",
        "--P",
        "100",
        "-o",
        s(&out),
    ]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 202);
    let rows: Vec<CharFnRow> = read_rows(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 201);
    assert!((rows[100].v).abs() < 1e-15 && (rows[100].re - 1.0).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[0].v < w[1].v));
}

#[test]
fn delta_row_for_one_strike() {
    let r = qdsp(&[
        "delta",
        "--params",
        s(&scenario("call_delta.json")),
        "--K",
        "110",
        "--method",
        "exact",
    ]);
    assert!(r.status.success());
    let rows: Vec<DeltaRow> = read_rows(r.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].reference - 0.925277838329513).abs() < 1e-12);
    assert!((rows[0].estimate_re - 0.9137222182932522).abs() < 1e-10);
}

#[test]
fn delta_uses_strikes_from_file() {
    let r = qdsp(&[
        "delta",
        "--params",
        s(&scenario("call_delta.json")),
        "--L",
        "10",
    ]);
    assert!(r.status.success());
    assert_eq!(
        read_rows::<DeltaRow>(r.stdout.as_slice()).unwrap().len(),
        12
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"params": {:?}, "L": 8, "P": 60, "method": "shots", "seed": 3}}"#,
            s(&scenario("crw_params.json"))
        ),
    )
    .unwrap();
    let r = qdsp(&["crw", "--config", s(&cfg), "--L", "4"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows: Vec<CrwRow> = read_rows(r.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!((rows[5].v - 2.0 * std::f64::consts::PI / 60.0).abs() < 1e-15);
    assert_ne!(rows[5].re, rows[5].oracle_re);
    std::fs::write(&cfg, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(qdsp(&["crw", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn ae_demo_pmf_sums_to_one() {
    let r = qdsp(&[
        "ae-demo",
        "--model",
        s(&scenario("toy.json")),
        "--ae-m",
        "5",
    ]);
    assert!(r.status.success());
    let rows: Vec<PmfRow> = read_rows(r.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 32);
    assert!((rows.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs() < 1e-10);
    assert!(String::from_utf8(r.stderr).unwrap().contains("a_hat"));
}

#[test]
fn seed_changes_sampled_output() {
    let run = |seed: &str| {
        qdsp(&[
            "charfn",
            "--model",
            s(&scenario("toy.json")),
            "--method",
            "shots",
            "--L",
            "3",
            "--seed",
            seed,
        ])
        .stdout
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}
