// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SMALL: &str = r#"{
  "package": {"name": "quad", "interposer_width": 20, "interposer_height": 20, "min_spacing": 1, "ambient": 45},
  "chiplets": [
    {"name": "a", "kind": "compute", "width": 4, "height": 6, "power": 6, "ports": [{"peer": "d", "weight": 2}]},
    {"name": "b", "kind": "gpu", "width": 5, "height": 5, "power": 6, "ports": [{"peer": "d"}]},
    {"name": "c", "kind": "memory", "width": 3, "height": 7, "power": 1.5, "ports": [{"peer": "d"}]},
    {"name": "d", "kind": "noc", "width": 3, "height": 3, "power": 1.5}
  ],
  "process": {"n_connections": 2000, "soc_area": 80},
  "anneal": {"seed": 5, "max_iterations": 15}
}"#;

fn chipdse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chipdse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_spec(dir: &Path) -> PathBuf {
    let p = dir.join("spec.json");
    fs::write(&p, SMALL).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn phy_prints_max_length_and_writes_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("phy");
    let o = chipdse(&["phy", "--clock", "2e9", "--sf", "1.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("max_trace_length_mm = "))
        .unwrap()
        .to_string();
    let v: f64 = line
        .trim_start_matches("max_trace_length_mm = ")
        .parse()
        .unwrap();
    assert!((v - 36.5).abs() < 0.1, "{line}");
    let curve = fs::read_to_string(out.join("phy_curve.csv")).unwrap();
    assert!(curve.starts_with("length_mm,log10_bw_hz,log10_target_hz\n"));
    assert_eq!(curve.lines().count(), 101);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn phy_override_changes_length() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chipdse(&["phy", "--sf", "6", "--out", s(&tmp.path().join("p"))]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("max_trace_length_mm = 18.259"));
}

#[test]
fn cost_writes_csv_and_manifest_with_input_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let out = tmp.path().join("cost");
    let o = chipdse(&["cost", "--spec", s(&spec), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("cost.csv")).unwrap();
    assert!(table.starts_with("item,area_mm2,count,"));
    assert_eq!(table.lines().count(), 6);
    assert!(stdout(&o).contains("cost_ratio = "));
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "cost");
    assert_eq!(m["inputs"][0]["path"], s(&spec));
    assert_eq!(
        m["inputs"][0]["sha256"],
        hex::encode(Sha256::digest(SMALL.as_bytes()))
    );
    assert!(m["timestamp"].as_u64().unwrap() > 0);
    assert!(m["version"].is_string());
}

#[test]
fn missing_spec_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere.json");
    let o = chipdse(&[
        "cost",
        "--spec",
        s(&missing),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains(s(&missing)), "{}", stderr(&o));
}

#[test]
fn invalid_spec_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("bad.json");
    fs::write(&spec, SMALL.replace(r#""width": 4"#, r#""width": -4"#)).unwrap();
    let o = chipdse(&[
        "cost",
        "--spec",
        s(&spec),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bad.json") && err.contains("width"), "{err}");
}

#[test]
fn unknown_subcommand_and_flag_print_usage() {
    for args in [&["frobnicate"][..], &["cost", "--bogus"][..]] {
        let o = chipdse(args);
        assert!(!o.status.success());
        assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    }
}

#[test]
fn power_without_tiles_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let o = chipdse(&[
        "power",
        "--spec",
        s(&spec),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("tiles"));
}

#[test]
fn perf_reads_config_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let rows = tmp.path().join("configs.csv");
    fs::write(
        &rows,
        "name,cost,throughput,latency\nC1,129.6854,1.95e9,30.311\nC2,177.3822,1.97e9,43.234\nC3,136.7064,1.92e9,30.763\n",
    )
    .unwrap();
    let out = tmp.path().join("perf");
    let o = chipdse(&["perf", "--configs", s(&rows), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("perf.csv")).unwrap();
    let names: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(names, ["C1", "C3", "C2"]);
    assert_eq!(manifest(&out)["inputs"][0]["path"], s(&rows));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn place_is_byte_identical_under_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    for (dir, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        let o = chipdse(&["place", "--spec", s(&spec), "--seed", seed, "--out", s(dir)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let fa = files(&a);
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "floorplan.json",
            "floorplan.svg",
            "history.csv",
            "initial_floorplan.svg"
        ]
    );
    assert_eq!(fa, files(&b));
    assert_ne!(fa, files(&c));
    assert_eq!(manifest(&a)["seed"], 11);
    let svg = String::from_utf8(fa[1].1.clone()).unwrap();
    assert!(svg.contains(r#"version="1.1""#) && svg.contains("°)"));
}

#[test]
fn thermal_solves_a_placed_floorplan() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let placed = tmp.path().join("placed");
    assert!(chipdse(&["place", "--spec", s(&spec), "--out", s(&placed)])
        .status
        .success());
    let out = tmp.path().join("th");
    let plan = placed.join("floorplan.json");
    let o = chipdse(&[
        "thermal",
        "--spec",
        s(&spec),
        "--floorplan",
        s(&plan),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("peak_c "));
    let field = fs::read_to_string(out.join("temperature.csv")).unwrap();
    assert!(field.starts_with("layer,x_mm,y_mm,t_c\n"));
    assert_eq!(manifest(&out)["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn thermal_compare_soc_reports_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = chipdse(&["thermal", "--compare-soc", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("soc_comparison.csv")).unwrap();
    let delta: f64 = table
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(delta >= 2.0);
}

#[test]
fn calibrate_and_sweep_write_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let cal = tmp.path().join("cal");
    let o = chipdse(&[
        "calibrate-k",
        "--spec",
        s(&spec),
        "--k0-values",
        "0.05,0.5",
        "--out",
        s(&cal),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(cal.join("calibration.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    let sw = tmp.path().join("sw");
    let o = chipdse(&[
        "sweep",
        "--spec",
        s(&spec),
        "--sides",
        "9,20",
        "--max-iterations",
        "5",
        "--out",
        s(&sw),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("side 9 mm: infeasible"));
    assert_eq!(
        fs::read_to_string(sw.join("sweep.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
}

#[test]
fn rerun_from_manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let first = tmp.path().join("first");
    assert!(chipdse(&[
        "place",
        "--spec",
        s(&spec),
        "--seed",
        "4",
        "--out",
        s(&first)
    ])
    .status
    .success());
    let again = tmp.path().join("again");
    let m = first.join("manifest.json");
    let o = chipdse(&["rerun", "--manifest", s(&m), "--out", s(&again)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files(&first), files(&again));

    fs::write(&spec, SMALL.replace(r#""power": 6"#, r#""power": 7"#)).unwrap();
    let o = chipdse(&[
        "rerun",
        "--manifest",
        s(&m),
        "--out",
        s(&tmp.path().join("x")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("changed"), "{}", stderr(&o));
}
