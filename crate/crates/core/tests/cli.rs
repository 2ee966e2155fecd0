use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lindescent");

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("LINDESCENT_OUTPUT_DIR")
        .output()
        .expect("spawn lindescent")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn solve_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", &config("sphere_cosine.toml"), "--output", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("sphere_cosine.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("# lindescent-trace v1"));
    assert!(lines.next().unwrap().starts_with("iter,t_n,d_n,F,x0"));
    assert!(trace.trim_end().ends_with("# stop=ToleranceReached") || trace.contains("# stop=ExactCriticalPoint"));
    assert!(dir.path().join("sphere_cosine.txt").exists());
}

#[test]
fn iteration_limit_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", &config("torus_height.toml"), "--output", out, "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let trace = fs::read_to_string(dir.path().join("torus_height.csv")).unwrap();
    assert!(trace.contains("# stop=MaxIterations"));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "manifold.kind = \"klein-bottle\"\n").unwrap();
    let o = run(&["solve", bad.to_str().unwrap(), "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    fs::write(&bad, "seed = \"seven\"\n").unwrap();
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["solve", "/nonexistent/config.toml"]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_lists_and_passes() {
    let o = run(&["check", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(names.len(), lindescent::cli::CHECKS.len());

    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in &names {
        assert!(text.contains(&format!("check: {name} pass")), "{name}");
    }
    assert!(text.ends_with("verdict: PASS\n"));
}

#[test]
fn every_injected_fault_is_caught() {
    for fault in lindescent::cli::FAULTS {
        let o = run(&["check", "--inject", fault]);
        assert_eq!(o.status.code(), Some(1), "{fault}");
        assert!(stdout(&o).contains("verdict: FAIL"), "{fault}");
    }
    assert_eq!(run(&["check", "--inject", "nope"]).status.code(), Some(1));
}

#[test]
fn metric_audit_rejects_signed_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["metric", &config("metric_sphere.toml"), "--output", out]).status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("metric_pairs.csv")).unwrap();
    assert!(table.lines().count() > 1);
    let o = run(&["metric", &config("metric_signed_gap.toml"), "--output", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("item: gap_definite\nstatus: fail"));
}

#[test]
fn fixed_point_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["fixed-point", &config("contraction.toml"), "--output", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("fixed_point_found: true"));

    let o = run(&["fixed-point", &config("half_turn.toml"), "--output", out]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("iterations: 0"));
    assert!(text.contains("no fixed point found"));

    // a descent problem is not a fixed-point problem
    assert_eq!(run(&["fixed-point", &config("sphere_cosine.toml"), "--output", out]).status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = run(&["solve", &config("torus_height.toml"), "--output", out.to_str().unwrap(), "--seed", "17"]);
        assert_eq!(o.status.code(), Some(0));
        traces.push(fs::read(out.join("torus_height.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);

    let out = dir.path().join("c");
    run(&["solve", &config("torus_height.toml"), "--output", out.to_str().unwrap(), "--seed", "18"]);
    assert_ne!(fs::read(out.join("torus_height.csv")).unwrap(), traces[0]);
}

#[test]
fn loop_problem_writes_final_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", &config("loop_circle.toml"), "--output", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let map = fs::read_to_string(dir.path().join("final_map.csv")).unwrap();
    assert!(map.starts_with("t,a0"));
    assert_eq!(map.lines().count(), 257);
}
