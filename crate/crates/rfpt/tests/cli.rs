use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rfpt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfpt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV file written by the tool, split into numbers.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn ifpt_uniform_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfpt(&["ifpt", "--preset", "example1"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = rows(&dir.path().join("density.csv"));
    let worst = r[1..r.len() - 1]
        .iter()
        .map(|row| (row[1] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3);
    let d = json_file(&dir.path().join("diagnostics.json"));
    assert_eq!(d["verdict"], "valid");
    assert_eq!(d["seed"], 20_240_617);
}

#[test]
fn ifpt_gamma_has_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfpt(&["ifpt", "--preset", "gamma_counterexample"], dir.path());
    assert!(out.status.success());
    let d = json_file(&dir.path().join("diagnostics.json"));
    assert_eq!(d["verdict"], "no_solution");
    let codes: Vec<&str> = d["reasons"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"second_moment_nonpositive"), "{codes:?}");
    assert!(d["reasons"][0]["message"]
        .as_str()
        .unwrap()
        .contains("second moment nonpositive"));
}

#[test]
fn ifpt_g2k_mean() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rfpt(&["ifpt", "--preset", "g2k(2)"], dir.path())
        .status
        .success());
    let d = json_file(&dir.path().join("diagnostics.json"));
    let m = d["compatibility"]["mean_tau"].as_f64().unwrap();
    assert!((m - 29.0 / 42.0).abs() < 1e-6, "{m}");
}

#[test]
fn direct_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "kind = \"direct\"\n[geometry]\nx = 1.0\n[numerics]\nx_points = 3\n",
    )
    .unwrap();
    let out = rfpt(
        &["direct", "--config", cfg.to_str().unwrap()],
        &dir.path().join("o"),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = rows(&dir.path().join("o/moments.csv"));
    assert_eq!(m[2], vec![1.0, 0.0, 0.0, 0.0]);
    assert!((m[0][1] - 1.0).abs() < 1e-15 && (m[0][3] - 2.0 / 3.0).abs() < 1e-15);
    let s = json_file(&dir.path().join("o/summary.json"));
    assert_eq!(s["mean"], 0.0);
    let t = rows(&dir.path().join("o/transform.csv"));
    assert!(t.iter().all(|r| r[1] == 1.0 && r[2] == 1.0));
}

#[test]
fn direct_preset_mean() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rfpt(&["direct", "--preset", "reflected_bm"], dir.path())
        .status
        .success());
    let s = json_file(&dir.path().join("summary.json"));
    assert_eq!(s["mean"], 1.0);
    assert_eq!(s["engines"]["fhat_bvp"], "finite differences");
}

#[test]
fn verify_point_mass_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfpt(
        &["verify", "--preset", "trivial_point_mass", "--paths", "100"],
        dir.path(),
    );
    assert!(out.status.success());
    let r = rows(&dir.path().join("samples.csv"));
    assert_eq!(r.len(), 100);
    assert!(r.iter().all(|row| row[1] == 0.0 && row[2] == 0.0));
}

#[test]
fn verify_fails_with_too_few_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfpt(
        &[
            "verify", "--preset", "example1", "--paths", "20", "--dt", "1e-2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let v = json_file(&dir.path().join("verify.json"));
    assert_eq!(v["pass"], false);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "verify", "--preset", "example5", "--paths", "400", "--dt", "1e-3", "--seed", "99",
    ];
    assert!(rfpt(&args, &dir.path().join("a")).status.code().is_some());
    assert!(rfpt(&args, &dir.path().join("b")).status.code().is_some());
    for f in ["samples.csv", "verify.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let text = std::fs::read_to_string(dir.path().join("a/samples.csv")).unwrap();
    assert!(text.contains("\"seed\":99") && text.contains("# seed: 99"));
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"direct\"\nbogus = 3\n").unwrap();
    let out = rfpt(&["direct", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = rfpt(&["ifpt", "--preset", "reflected_bm"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = rfpt(
        &["direct", "--preset", "reflected_bm", "--paths", "0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kind_must_match_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("x.toml");
    std::fs::write(&cfg, "kind = \"ifpt\"\n[target]\npreset = \"example1\"\n").unwrap();
    let out = rfpt(&["direct", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rfpt"))
        .args(["jump", "--preset", "example5"])
        .env("RFPT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("diagnostics.json").exists());
}

#[test]
fn conjugated_preset() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        rfpt(&["conjugated", "--preset", "cir_conjugation"], dir.path())
            .status
            .success()
    );
    let s = json_file(&dir.path().join("summary.json"));
    assert!((s["uniform_image_mass"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(s["transformed"]["verdict"], "valid");
}
