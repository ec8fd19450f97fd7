use std::path::Path;
use std::process::{Command, Output};

use lpplab::fredholm::{u_beta_cdf, DetOptions, UPath};

fn lpplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpplab")).args(args).output().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn fredholm_row_matches_library() {
    let out = lpplab(&["fredholm", "--beta", "0", "--xi", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "xi,cdf,err_estimate"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let cdf: f64 = rows[0][1].parse().unwrap();
    let lib = u_beta_cdf(0.0, 0.0, UPath::Bessel, &DetOptions::default())
        .unwrap()
        .value;
    assert_eq!(cdf, lib);
}

#[test]
fn simulate_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpplab(&[
        "simulate",
        "--N",
        "10",
        "--alpha",
        "0.5",
        "--samples",
        "5",
        "--seed",
        "42",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header
        .iter()
        .any(|l| l.contains("\"seed\":42") && l.contains("\"alpha\":0.5")));
    assert!(!text.contains("workers"));
    assert_eq!(*header.last().unwrap(), "# seed,substream,value");
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], "42");
        assert_eq!(r[1], k.to_string());
        assert!(r[2].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "seq": {"kind": "linear", "beta": 1.0}, "n": 6, "seed": 3, "samples": 2}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let a = String::from_utf8(lpplab(&["simulate", "--config", c]).stdout).unwrap();
    let b = String::from_utf8(lpplab(&["simulate", "--config", c, "--seed", "4"]).stdout).unwrap();
    assert!(a.contains("\"seed\":3") && a.contains("\"beta\":1.0"));
    assert!(b.contains("\"seed\":4"));
    assert_ne!(data_rows(&a), data_rows(&b));
}

#[test]
fn sidecars_carry_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(lpplab(&[
        "kernel",
        "--name",
        "bessel",
        "--params",
        r#"{"nu":2.0}"#,
        "--x-grid",
        "0.5:1.5:0.5",
        "--out",
        d
    ])
    .status
    .success());
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["kernel"], "bessel");
    assert_eq!(side["symmetric"], true);
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 9);

    assert!(lpplab(&["dist-table", "--xi-grid", "-2:0:1", "--out", d])
        .status
        .success());
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dist.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["distribution"], "tracy_widom");
    assert_eq!(side["orders"].as_array().unwrap().len(), 3);
}

#[test]
fn dist_table_is_monotone() {
    let text = String::from_utf8(lpplab(&["dist-table", "--beta", "1", "--xi-grid", "-3:3:0.5"]).stdout).unwrap();
    let cdf: Vec<f64> = data_rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(cdf.len(), 13);
    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
    assert!(cdf.iter().all(|&c| (0.0..=1.0).contains(&c)));
}

fn code(args: &[&str]) -> (i32, String) {
    let out = lpplab(args);
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"schema_version\": 1,\n  \"samples\": 2,\n  \"sede\": 1\n}").unwrap();
    let (c, err) = code(&["simulate", "--N", "4", "--config", cfg.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert!(err.contains("sede") && err.contains("line 4"), "{err}");

    assert_eq!(code(&["experiment", "nope"]).0, 2);
    assert_eq!(code(&["fredholm", "--beta", "-3", "--xi", "0"]).0, 1);
    assert_eq!(code(&["fredholm", "--beta", "-0.5", "--xi", "-1"]).0, 0);
    assert_eq!(code(&["kernel", "--name", "airy", "--x-grid", "0:1:1e-7"]).0, 4);
    let missing = dir.path().join("none.json");
    assert_eq!(code(&["simulate", "--config", missing.to_str().unwrap()]).0, 2);
}

#[test]
fn nonconvergence_is_exit_three() {
    // centered x below -c_{N,0} leaves the contour integrand without decay
    let (c, err) = code(&[
        "kernel",
        "--name",
        "finite-n",
        "--params",
        r#"{"seq":{"kind":"linear","beta":0.0},"n":10,"r":0,"s":0}"#,
        "--x-grid",
        "-40:-40:1",
    ]);
    assert_eq!(c, 3, "{err}");
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpplab(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(dir.path()).join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}
