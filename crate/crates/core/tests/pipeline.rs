use std::path::Path;
use std::process::Command;

use np_plasmon::geometry::SurfaceKind;
use np_plasmon::pipeline::{compare_report, run_pipeline, RunConfig, Stage};

fn small_sphere(out: &Path) -> RunConfig {
    RunConfig {
        n_u: Some(12),
        n_v: Some(24),
        j_max: 60,
        out: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn cached_operators_reproduce_the_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sphere(dir.path());
    let first = run_pipeline(&config, Stage::Report).unwrap();
    assert_eq!(first.cache_hit, Some(false));
    let csvs = ["spectrum.csv", "norms.csv", "calr.csv", "region.csv"];
    let before: Vec<Vec<u8>> = csvs.iter().map(|f| read(dir.path(), f)).collect();

    let second = run_pipeline(&config, Stage::Report).unwrap();
    assert_eq!(second.cache_hit, Some(true));
    for (name, old) in csvs.iter().zip(&before) {
        assert_eq!(&read(dir.path(), name), old, "{name} changed on a cache hit");
    }
}

#[test]
fn manifest_hashes_match_the_files() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let summary = run_pipeline(&small_sphere(dir.path()), Stage::Decay).unwrap();
    let files = summary.manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"norms.csv") && names.contains(&"decay.json"));
    for (name, file) in names.iter().zip(files) {
        let digest = hex::encode(Sha256::digest(read(dir.path(), name)));
        assert_eq!(file["sha256"].as_str().unwrap(), digest, "{name}");
    }
}

#[test]
fn sphere_spectrum_starts_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        n_u: Some(24),
        n_v: Some(48),
        cache: false,
        ..small_sphere(dir.path())
    };
    run_pipeline(&config, Stage::Spectrum).unwrap();
    let text = String::from_utf8(read(dir.path(), "spectrum.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,lambda,is_negative"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    let lambda: f64 = row[1].parse().unwrap();
    assert!((lambda - 0.5).abs() < 0.01, "{lambda}");
    assert_eq!(row[2], "0");
}

#[test]
fn self_compare_has_no_differences() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&small_sphere(dir.path()), Stage::Report).unwrap();
    let report = compare_report(dir.path(), dir.path()).unwrap();
    assert!(report["differences"].as_object().unwrap().is_empty());
    assert!(report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn compare_truncates_to_the_common_j_max() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let torus = |out: &Path, j_max| RunConfig {
        surface: SurfaceKind::CliffordTorus,
        n_u: Some(12),
        n_v: Some(30),
        j_max,
        cache: false,
        out: out.to_path_buf(),
        ..RunConfig::default()
    };
    run_pipeline(&torus(a.path(), 60), Stage::Decay).unwrap();
    run_pipeline(&torus(b.path(), 90), Stage::Decay).unwrap();
    let report = compare_report(a.path(), b.path()).unwrap();
    assert_eq!(report["j_max"], 60);
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(report["side_by_side"]["a"]["outlier_count"], report["side_by_side"]["b"]["outlier_count"]);
}

#[test]
fn decay_needs_enough_modes() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        j_max: 20,
        ..small_sphere(dir.path())
    };
    let err = run_pipeline(&config, Stage::Decay).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_np-plasmon"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn cli_rejects_a_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"surface": "sphere", "n_u": 12, "colour": "red"}"#).unwrap();
    let output = cli(&["mesh", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("colour"));
}

#[test]
fn cli_stage_failure_removes_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = dir.path().join("on_surface.json");
    std::fs::write(
        &config,
        r#"{"surface": "sphere", "n_u": 12, "n_v": 24, "j_max": 60, "cache": false, "source": [1.0, 0.0, 0.0]}"#,
    )
    .unwrap();
    let output = cli(&["calr", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("calr"));
    assert!(!out.join("spectrum.csv").exists());
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn cli_mesh_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let output = cli(&["mesh", "--out", out.to_str().unwrap(), "--no-cache"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(out.join("mesh.txt").exists());
    assert!(out.join("manifest.json").exists());

    let missing = cli(&["compare", out.to_str().unwrap(), dir.path().join("nowhere").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}
