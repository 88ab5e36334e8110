use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmgd"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("spawn lmgd")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let (header, rows) = csv(path);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.into_iter().map(|r| r[i].clone()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["fixed-points", "--delta", "0", "--lambda-ratio", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_bounds_exit_with_error() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["bounds", "--delta", "1", "--lambda-ratio", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no real bounds"));
}

#[test]
fn bistable_fixed_points() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["fixed-points", "--delta", "0", "--lambda-ratio", "6", "--k", "10"]);
    let z = column(&dir.path().join("fixed_points.csv"), "z");
    assert_eq!(z.len(), 4);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["subcommand"], "fixed-points");
    assert_eq!(m["parameters"]["model"]["k"], 10.0);
    assert_eq!(m["outputs"][0]["rows"], 4);
}

#[test]
fn uncoupled_fixed_points_share_a_population() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["fixed-points", "--delta", "0", "--lambda-ratio", "0", "--k", "0.1"]);
    let z = column(&dir.path().join("fixed_points.csv"), "z");
    assert_eq!(z.len(), 2);
    assert!((num(&z[0]) - num(&z[1])).abs() < 1e-12, "{z:?}");
}

#[test]
fn critical_and_bounds_values() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["critical", "--lambda-ratio", "6", "1"]);
    let path = dir.path().join("critical.csv");
    let zc = column(&path, "z_c");
    let lo = column(&path, "k_c_minus");
    let hi = column(&path, "k_c_plus");
    assert!((num(&zc[0]) - 1.0 / 3.0).abs() < 1e-15);
    assert!(num(&zc[1]) > 1.0);
    assert!(0.0 < num(&lo[0]) && num(&lo[0]) < num(&hi[0]));
    assert_eq!(lo[1], "");
    assert_eq!(hi[1], "");

    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["bounds", "--delta", "0", "--lambda-ratio", "6"]);
    let path = dir.path().join("bounds.csv");
    let (zm, zp) = (num(&column(&path, "z_minus")[0]), num(&column(&path, "z_plus")[0]));
    assert!(zm.abs() < 1e-15 && (zp - 1.0 / 9.0).abs() < 1e-15, "{zm} {zp}");
}

#[test]
fn trajectory_conserves_energy() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["trajectory", "--delta", "0", "--lambda-ratio", "6", "--k", "10", "--z0", "0.5"]);
    let e = column(&dir.path().join("trajectory.csv"), "energy");
    let tau = column(&dir.path().join("trajectory.csv"), "tau");
    assert!((num(tau.last().unwrap()) - 100.0).abs() < 1e-9);
    let (first, last) = (num(&e[0]), num(e.last().unwrap()));
    assert!((last - first).abs() <= 1e-8 * first.abs().max(1.0), "{first} {last}");
}

#[test]
fn classify_reports_bistability() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["classify", "--delta", "0", "--lambda-ratio", "6", "--k", "10"]);
    let r = json(&dir.path().join("regime.json"));
    assert_eq!(r["regime"], "josephson_bistable");
    assert_eq!(json(&dir.path().join("manifest.json"))["outputs"][0]["file"], "regime.json");
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["fixed-points", "--delta", "0.1", "--lambda-ratio", "6", "--k", "10"];
    let a = TempDir::new().unwrap();
    ok(a.path(), &args);
    let b = TempDir::new().unwrap();
    let mut with_json = args.to_vec();
    with_json.extend(["--format", "json"]);
    ok(b.path(), &with_json);
    let (header, rows) = csv(&a.path().join("fixed_points.csv"));
    let j = json(&b.path().join("fixed_points.json"));
    let cols: Vec<&str> = j["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cols, header);
    let jrows = j["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (r, jr) in rows.iter().zip(jrows) {
        for i in 0..3 {
            assert_eq!(num(&r[i]), jr[i].as_f64().unwrap());
        }
        assert_eq!(r[3], jr[3].as_str().unwrap());
    }
}

#[test]
fn portrait_layout() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "portrait", "--delta", "0", "--lambda-ratio", "6", "--k", "10", "--samples", "5", "--tau-max", "10",
            "--landscape-phi", "21", "--landscape-z", "11",
        ],
    );
    let root = dir.path().join("portrait");
    for f in ["fixed_points.csv", "survey.csv", "trajectories.csv", "landscape.csv", "separatrix.csv", "manifest.json"] {
        assert!(root.join(f).is_file(), "missing {f}");
    }
    assert_eq!(column(&root.join("landscape.csv"), "z").len(), 21 * 11);
    let m = json(&root.join("manifest.json"));
    assert_eq!(m["subcommand"], "portrait");
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["file"] == "landscape.csv" && o["rows"] == 231));
}
