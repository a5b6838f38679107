use std::fs;
use std::path::Path;
use std::process::Command;

use hdx_core::complex::petersen_graph;
use hdx_core::expansion::{exp_b, Budget};
use serde_json::Value;

fn hdx(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_matches_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hdx(&["build", "--construction", "unip_fq", "--n", "3", "--q", "3"], dir.path()), 0);
    let golden = include_str!("golden/build_unip_fq_n3_q3.json");
    assert_eq!(fs::read_to_string(dir.path().join("build.json")).unwrap(), golden);
    let report = read(&dir.path().join("build.json"));
    assert_eq!(report["data"]["face_counts"], serde_json::json!([135, 729, 729]));
    assert!(dir.path().join("complex.json").exists());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["all", "--q", "2", "--seed", "7"];
    // Sys_1 of this complex exceeds the default budget, so the run is partial
    let code = hdx(&args, a.path());
    assert_eq!(code, 3);
    assert_eq!(hdx(&args, b.path()), code);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
    let hash = read(&a.path().join("summary.json"))["config_hash"].clone();
    for stage in ["build", "cones", "expansion", "presentation"] {
        let r = read(&a.path().join(format!("{stage}.json")));
        assert_eq!(r["config_hash"], hash);
        assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(r["artifact"], "hdx");
    }
}

#[test]
fn file_complex_witness_is_reproduced() {
    let dir = tempfile::tempdir().unwrap();
    let x = petersen_graph();
    let file = dir.path().join("petersen.json");
    fs::write(&file, x.to_json()).unwrap();
    let args = ["expansion", "--construction", "file", "--complex", file.to_str().unwrap(), "--k", "0"];
    let (o1, o2) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(hdx(&args, &o1), 0);
    assert_eq!(hdx(&args, &o2), 0);
    let r1 = read(&o1.join("expansion.json"));
    let r2 = read(&o2.join("expansion.json"));
    assert_eq!(r1, r2);
    let expected = exp_b(&x, 0, Budget::default()).unwrap().unwrap();
    let witness: Vec<Vec<u32>> = expected.witness.faces(&x).map(|s| s.vertices().to_vec()).collect();
    let report = &r1["data"]["report"];
    assert_eq!(report["exp_b"], hdx_core::rational::to_text(&expected.value));
    assert_eq!(report["witness"], serde_json::to_value(witness).unwrap());
    assert_eq!(r1["data"]["chung"]["status"], "ok");
}

#[test]
fn invalid_configurations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["build", "--q", "6"][..],
        &["build", "--n", "1"],
        &["xsq", "--s", "4"],
        &["build", "--construction", "file"],
        &["build", "--construction", "nope"],
    ] {
        assert_eq!(hdx(args, dir.path()), 2, "{args:?}");
    }
}

#[test]
fn size_cap_exceedance_exits_3_with_partial_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hdx(&["all", "--size-cap-log2", "8"], dir.path()), 3);
    let build = read(&dir.path().join("build.json"));
    assert_eq!(build["status"], "too_large");
    assert_eq!(build["data"]["group_too_large"]["cap"], 256);
    let summary = read(&dir.path().join("summary.json"));
    assert_eq!(summary["exit_code"], 3);
    let stages = summary["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 8);
    assert!(stages[1..].iter().all(|s| s["status"] == "skipped"));
}

#[test]
fn oversized_k_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hdx(&["cones", "--q", "2", "--k", "5"], dir.path()), 2);
}
