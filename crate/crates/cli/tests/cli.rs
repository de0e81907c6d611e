use std::process::{Command, Output};

use minorant_core::sticks::{intensity_mass, Region, Weight};
use minorant_core::LevyModel;

const BIN: &str = env!("CARGO_BIN_EXE_levy-minorant");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("LEVY_MINORANT_SEED").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn sample_path_csv_shape() {
    let s = stdout(&["sample-path", "--n", "8", "--t", "2"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "time,value");
    assert_eq!(lines.len(), 10);
    assert!(lines[9].starts_with("2.0000000000000000e0,"));
    assert!(!s.contains('\r'));
}

#[test]
fn minorant_writes_faces_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("brownian.json");
    std::fs::write(&model, r#"{"family":"brownian","sigma":1.0,"drift":0.5}"#).unwrap();
    let out = dir.path().join("faces.csv");
    stdout(&["minorant", "--model", model.to_str().unwrap(), "--n", "4096", "--seed", "7", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("g,d,length,increment,slope"));
    let mut last_d = 0.0;
    let mut last_slope = f64::NEG_INFINITY;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[0], last_d);
        assert!(f[4] > last_slope);
        last_d = f[1];
        last_slope = f[4];
    }
    assert_eq!(last_d, 1.0);
}

#[test]
fn minorant_of_a_given_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, "time,value\n0,0\n0.5,1\n1,0\n").unwrap();
    let s = stdout(&["minorant", "--input", path.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["faces"].as_array().unwrap().len(), 1);
    assert_eq!(v["faces"][0]["slope"], 0.0);
}

#[test]
fn transform_preserves_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, "time,value\n0,0\n1,0\n2,1\n3,1\n4,2\n5,2\n6,2\n").unwrap();
    let s = stdout(&["transform", "--input", path.to_str().unwrap(), "--u", "2.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    let values = v["path"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 7);
    assert_eq!(values[0], 0.0);
    assert_eq!(values[6], 2.0);
}

#[test]
fn discover_lists_steps() {
    let s = stdout(&["discover", "--n", "1024", "--k", "3", "--seed", "3"]);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("step,relative_length,g,d,length,increment,slope"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty() && rows.len() <= 3);
}

#[test]
fn sticks_and_ppp() {
    let s = stdout(&["sticks", "--reps", "3", "--n-sticks", "5"]);
    assert_eq!(s.lines().next(), Some("replicate,i,length,increment,slope"));
    assert_eq!(s.lines().count(), 16);
    let p = stdout(&["ppp", "--reps", "2", "--n-sticks", "4", "--theta", "2"]);
    assert_eq!(p.lines().next(), Some("replicate,horizon,i,length,increment,slope"));
    assert_eq!(p.lines().count(), 9);
}

#[test]
fn intensity_delegates_to_quadrature() {
    let s = stdout(&["intensity", "--theta", "1", "--t", "0.5", "1.5", "--x", "-1", "0"]);
    let got: f64 = s.trim().parse().unwrap();
    let model = LevyModel::brownian(1.0, 0.0).unwrap();
    let want = intensity_mass(&model, &Region { t1: 0.5, t2: 1.5, x1: -1.0, x2: 0.0 }, Weight::ExpDecay { theta: 1.0 }).unwrap();
    assert_eq!(got, want);
}

#[test]
fn seed_from_environment() {
    let a = Command::new(BIN).args(["sample-path", "--n", "4"]).env("LEVY_MINORANT_SEED", "9").output().unwrap();
    let b = stdout(&["sample-path", "--n", "4", "--seed", "9"]);
    let c = stdout(&["sample-path", "--n", "4"]);
    assert_eq!(String::from_utf8(a.stdout).unwrap(), b);
    assert_ne!(b, c);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["sample-path", "--n", "abc"]).status.code(), Some(2));
    let bad_model = run(&["sample-path", "--model", r#"{"family":"brownian","sigma":-1}"#]);
    assert_eq!(bad_model.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_model.stderr).contains("sigma"));
    assert_eq!(run(&["intensity", "--t", "2", "1", "--x", "0", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "no_such_check"]).status.code(), Some(2));
    assert_eq!(run(&["ppp", "--theta", "0"]).status.code(), Some(2));
}

#[test]
fn every_subcommand_documents_its_output() {
    for sub in ["sample-path", "minorant", "sticks", "ppp", "transform", "discover", "verify", "intensity"] {
        let help = stdout(&[sub, "--help"]);
        assert!(help.contains("CSV") || help.contains("JSON") || help.contains("Prints"), "{sub}");
    }
}

#[test]
fn verify_writes_json_lines_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let table = stdout(&["verify", "face_count", "--reps", "2000", "--out", out.to_str().unwrap()]);
    assert!(table.contains("face_count/brownian/n=10"));
    let text = std::fs::read_to_string(&out).unwrap();
    let reports: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["n_replicates"], 2000);
    assert!(reports.iter().all(|r| r["pass"].as_bool().is_some()));
}

#[test]
fn negative_controls_do_not_fail_the_run() {
    let out = run(&["verify", "cauchy_independence/brownian/n_grid=4096", "--reps", "3000"]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["negative_control"], true);
    assert_eq!(r["pass"], false);
}
