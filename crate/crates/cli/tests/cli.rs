//! The `clef` binary: exit codes, outputs and replay of recorded runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[link]
rho = 12500000.0

[detector]
kinds = ["clef", "amf-fm"]
m = 32

[grid]
rates_gamma = [6.0, 60.0]
thetas = [0.5]
t_b_seconds = [1.0]

[run]
horizon_seconds = 8.0
repeats = 2
seed = 5
"#;

fn clef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clef")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nrepeat = 3\n");
    let o = clef(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("repeat"));
}

#[test]
fn empty_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nthetas = []\n");
    let o = clef(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid"));
}

#[test]
fn unwritable_out_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let o = clef(&["bounds", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn corrupt_trace_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut text = String::from("flow_id,timestamp_ns,size_bytes\n");
    for i in 1..16 {
        text.push_str(&format!("{i},{},100\n", i * 1000));
    }
    text.push_str("16,not_a_time,100\n");
    let trace = dir.path().join("bad.csv");
    fs::write(&trace, text).unwrap();
    let out = dir.path().join("o");
    let o = clef(&["replay", "--config", &cfg, "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 17"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn out_of_order_trace_is_a_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let trace = dir.path().join("t.csv");
    fs::write(&trace, "1,500,100\n2,400,100\n").unwrap();
    let out = dir.path().join("o");
    let o = clef(&["replay", "--config", &cfg, "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn replay_matches_simulated_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sim");
    let o = clef(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--traces"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = data_lines(&out.join("runs.csv"));
    assert_eq!(runs.len(), 1 + 8);
    for id in [0usize, 3] {
        let trace = out.join("traces").join(format!("run_{id}.csv"));
        let rep = dir.path().join(format!("rep{id}"));
        let o = clef(&[
            "replay",
            "--config",
            &cfg,
            "--out",
            rep.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
            "--run-id",
            &id.to_string(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("packets_per_second="));
        let got = data_lines(&rep.join("replay.csv"));
        assert_eq!(got[0], runs[0]);
        assert_eq!(got[1], runs[1 + id]);
    }
}

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--repeats", "1"];
        args.extend_from_slice(extra);
        assert!(clef(&args).status.success());
        data_lines(&out.join("runs.csv"))
    };
    let a = run("a", &["--workers", "1"]);
    let b = run("b", &["--workers", "3"]);
    let c = run("c", &["--seed", "6"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bounds_and_oracle_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[oracle]\nm = [32]\nn = [1000]\ntrials = 300\n");
    let out = dir.path().join("o");
    let o = clef(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(data_lines(&out.join("bounds.csv")).len() > 1);
    let o = clef(&["oracle", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&out.join("oracle.csv")).len(), 1 + 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rows satisfy the bound"));
}

#[test]
fn bad_arguments_are_rejected() {
    assert_ne!(code(&clef(&["simulate", "--repeats", "lots"])), 0);
    assert!(clef(&["--version"]).status.success());
}
