//! End-to-end CLI behavior through the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rfs-fusion")
}

fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rfs-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn simulate_writes_expected_files_and_metadata() {
    let out = tmp_dir("simulate");
    let output = run(&[
        "simulate",
        "--config",
        manifest_path("scenarios/example1.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "3",
        "--runs",
        "2",
        "--set",
        "sensors.*.detection_probability=0.78",
        "--set",
        "duration=8",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    for name in [
        "local.csv",
        "r_gci.csv",
        "classical_gci.csv",
        "aggregate.csv",
        "summary.csv",
        "diagnostics.csv",
        "metadata.json",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let metadata = std::fs::read_to_string(out.join("metadata.json")).unwrap();
    assert!(metadata.contains("sensors.*.detection_probability=0.78"));
    assert!(metadata.contains("config_hash"));
    assert!(metadata.contains("\"seed\": 3"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn simulate_rejects_zero_runs() {
    let out = tmp_dir("zero-runs");
    let output = run(&[
        "simulate",
        "--config",
        manifest_path("scenarios/example1.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--runs",
        "0",
    ]);
    assert!(!output.status.success());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn simulate_rejects_unknown_override_key() {
    let out = tmp_dir("bad-key");
    let output = run(&[
        "simulate",
        "--config",
        manifest_path("scenarios/example1.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "no_such_field=1",
    ]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown key"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn fuse_identical_inputs_is_idempotent() {
    let out = tmp_dir("fuse-idem");
    let fixture = manifest_path("fixtures/example1/sensor1.json");
    let output = run(&[
        "fuse",
        "--weights",
        "0.5,0.5",
        "--home",
        "1",
        "--out",
        out.to_str().unwrap(),
        fixture.to_str().unwrap(),
        fixture.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let fused = rfs_fusion::density_fmt::read_density(&out.join("fused.json")).unwrap();
    let original = rfs_fusion::density_fmt::read_density(&fixture).unwrap();
    let (fused_lmb, original_lmb) = match (fused, original) {
        (rfs_fusion::density_fmt::Density::Glmb(g), rfs_fusion::density_fmt::Density::Lmb(l)) => {
            (g.to_lmb().unwrap(), l)
        }
        _ => panic!("unexpected kinds"),
    };
    for c in original_lmb.components() {
        let f = fused_lmb.get(&c.label).expect("label kept");
        assert!((f.existence - c.existence).abs() < 1e-9);
        let (_, g0) = &c.density.components()[0];
        let (_, g1) = &f.density.components()[0];
        for i in 0..4 {
            assert!((g0.mean()[i] - g1.mean()[i]).abs() < 1e-9);
            assert!((g0.cov()[(i, i)] - g1.cov()[(i, i)]).abs() < 1e-9);
        }
    }
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn fuse_example1_fixtures_reports_object() {
    let out = tmp_dir("fuse-ex1");
    let output = run(&[
        "fuse",
        "--weights",
        "0.5,0.5",
        "--out",
        out.to_str().unwrap(),
        manifest_path("fixtures/example1/sensor1.json").to_str().unwrap(),
        manifest_path("fixtures/example1/sensor2.json").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let line = stdout
        .lines()
        .find(|l| l.starts_with("fused yes-object probability:"))
        .expect("probability line");
    let p: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(p > 0.5, "fused yes-object probability {p}");
    assert!(out.join("fuse_diagnostics.csv").exists());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn fuse_rejects_bad_weights() {
    let out = tmp_dir("fuse-bad");
    let output = run(&[
        "fuse",
        "--weights",
        "0.6,0.5",
        "--out",
        out.to_str().unwrap(),
        manifest_path("fixtures/example1/sensor1.json").to_str().unwrap(),
        manifest_path("fixtures/example1/sensor2.json").to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("sum to one"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn diagnose_example1_reaches_upper_bound() {
    let output = run(&[
        "diagnose",
        "--weights",
        "0.5,0.5",
        manifest_path("fixtures/example1/sensor1.json").to_str().unwrap(),
        manifest_path("fixtures/example1/sensor2.json").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let row = stdout.lines().nth(1).expect("csv row");
    let fields: Vec<f64> = row
        .split(',')
        .map(|v| v.parse::<f64>().unwrap())
        .collect();
    // time, G_labeled, G_unlabeled, d_G, d_G_upper, p_yes_labeled, p_yes_unlabeled
    let d_g = fields[3];
    let upper = fields[4];
    assert!((d_g - upper).abs() <= 1e-6 * upper, "d_G {d_g} vs upper {upper}");
    let _ = fields;
}

#[test]
fn ospa_prints_zero_for_identical_sets() {
    let dir = tmp_dir("ospa");
    let file = dir.join("set.json");
    std::fs::write(
        &file,
        r#"{"states": [[0.0, 0.0, 1.0, 1.0], [100.0, -50.0, 0.0, 0.0]]}"#,
    )
    .unwrap();
    let output = run(&["ospa", file.to_str().unwrap(), file.to_str().unwrap()]);
    assert!(output.status.success());
    assert_eq!(String::from_utf8(output.stdout).unwrap().trim(), "0");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_exits_zero() {
    let output = run(&["validate"]);
    assert!(
        output.status.success(),
        "{}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.ends_with(": ok")).count() >= 8);
}
