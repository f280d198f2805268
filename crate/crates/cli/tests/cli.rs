use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn csv_column(text: &str, column: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn eps_of_drude_aluminium_at_plasma_frequency() {
    let out = casimir(&["eps", "--material", "drude:al", "--xi", "12.5eV"]);
    assert!(out.status.success());
    let eps = csv_column(&stdout(&out), 1)[0];
    assert!((eps - 1.994_985).abs() < 1e-5, "{eps}");
}

#[test]
fn eps_default_grid_is_monotone() {
    let out = casimir(&["eps", "--material", "drude:au", "--per-decade", "4"]);
    let eps = csv_column(&stdout(&out), 1);
    assert_eq!(eps.len(), 41);
    assert!(eps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn force_reports_correction_factor() {
    let out = casimir(&["force", "--geom", "ss", "--material", "drude:al", "--a", "500nm"]);
    assert!(out.status.success());
    let factor = csv_column(&stdout(&out), 3)[0];
    assert!(factor > 0.8 && factor < 0.87, "{factor}");
}

#[test]
fn exit_codes() {
    let bare = casimir(&["force", "--geom", "ss", "--material", "drude:al", "--a", "500"]);
    assert_eq!(bare.status.code(), Some(2));
    let unknown = casimir(&["force", "--geom", "ss", "--material", "drude:cu", "--a", "5nm"]);
    assert_eq!(unknown.status.code(), Some(2));
    let missing = casimir(&["force", "--geom", "ss", "--material", "table:al:/does/not/exist.csv", "--a", "5nm"]);
    assert_eq!(missing.status.code(), Some(3));
    let usage = casimir(&["force", "--geom", "xx"]);
    assert_eq!(usage.status.code(), Some(2));
    let small = casimir(&["scan", "--geom", "ss", "--material", "drude:al", "--grid", "0.4nm,1nm"]);
    assert_eq!(small.status.code(), Some(2));
}

#[test]
fn warnings_go_to_stderr() {
    let out = casimir(&["force", "--geom", "sl", "--R", "10um", "--material", "drude:au", "--a", "2um"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("proximity force"));
    assert!(err.contains("finite-temperature"));
}

#[test]
fn scan_json_mirrors_csv() {
    let base = ["scan", "--geom", "ss", "--material", "drude:au", "--grid", "10nm,20nm,40nm"];
    let csv = casimir(&base);
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let json = casimir(&json_args);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    let forces = csv_column(&stdout(&csv), 1);
    for (i, p) in v["points"].as_array().unwrap().iter().enumerate() {
        assert_eq!(p["force"].as_f64().unwrap(), forces[i]);
    }
}

#[test]
fn hamaker_from_saved_scan_matches_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scan_path = dir.path().join("scan.csv");
    let scan = casimir(&[
        "scan", "--geom", "ss", "--material", "drude:al", "--grid", "vdw",
        "--output", scan_path.to_str().unwrap(),
    ]);
    assert!(scan.status.success());
    let text = std::fs::read_to_string(&scan_path).unwrap();
    assert!(text.starts_with("a_nm,force,correction_factor,quad_error\n"));
    assert_eq!(text.lines().count(), 51);

    let from_csv = casimir(&[
        "hamaker", "--from-csv", scan_path.to_str().unwrap(), "--geom", "ss", "--format", "json",
    ]);
    assert!(from_csv.status.success(), "{}", String::from_utf8_lossy(&from_csv.stderr));
    let pipeline = casimir(&["hamaker", "--material", "drude:al", "--format", "json"]);
    assert!(pipeline.status.success());

    let a: Value = serde_json::from_slice(&from_csv.stdout).unwrap();
    let b: Value = serde_json::from_slice(&pipeline.stdout).unwrap();
    assert_eq!(a["fits"][0], b["fits"][0]);
    assert_eq!(b["fits"][1]["geometry"], "sl");
    assert!(b["combined"]["rounded_h"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "force", "geom": "ss", "material": "drude:al", "a": "500nm", "threads": 2}"#,
    )
    .unwrap();
    let from_cfg = casimir(&["--config", cfg.to_str().unwrap()]);
    assert!(from_cfg.status.success(), "{}", String::from_utf8_lossy(&from_cfg.stderr));
    let direct = casimir(&["force", "--geom", "ss", "--material", "drude:al", "--a", "500nm"]);
    assert_eq!(stdout(&from_cfg), stdout(&direct));

    // Later flags override the config.
    let overridden = casimir(&["--config", cfg.to_str().unwrap(), "--a", "1um"]);
    assert!(stdout(&overridden).lines().nth(1).unwrap().starts_with("1000,"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{not json").unwrap();
    assert_eq!(casimir(&["--config", broken.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn synthetic_tables_reproduce_drude_factors() {
    let tab = casimir(&[
        "table1",
        "--al", &format!("table:al:{}", data("al_drude_synthetic.csv")),
        "--au", &format!("table:au:{}", data("au_drude_synthetic.csv")),
    ]);
    assert!(tab.status.success(), "{}", String::from_utf8_lossy(&tab.stderr));
    let drude = casimir(&["table1"]);
    let t = csv_column(&stdout(&tab), 3);
    let d = csv_column(&stdout(&drude), 3);
    assert_eq!(t.len(), 13);
    for (x, y) in t.iter().zip(&d) {
        assert!((x - y).abs() < 2e-3, "{x} vs {y}");
    }
}

#[test]
fn coated_stack_runs() {
    let out = casimir(&[
        "force", "--geom", "ss", "--material", "drude:al", "--coating", "drude:au",
        "--thickness", "20nm", "--a", "300nm",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("coating thickness"));
    let missing_thickness = casimir(&["force", "--geom", "ss", "--material", "drude:al", "--coating", "drude:au", "--a", "300nm"]);
    assert_eq!(missing_thickness.status.code(), Some(2));
}
