use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.odesys"))
}

fn complin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_complin"))
        .args(args)
        .current_dir(dir)
        .env_remove("COMPLIN_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Run with `--json` and parse stdout.
fn report(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = complin(dir, &all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    (code(&o), v)
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[test]
fn classify_labels_match_expectations() {
    let dir = TempDir::new().unwrap();
    let cases = [("sys2", "Y2"), ("sys3", "Y3"), ("sys6", "Y3"), ("noncr", "CR-fail"), ("free", "Y2"), ("sys1", "Y1-solvable")];
    for (name, label) in cases {
        let (c, v) = report(dir.path(), &["classify", corpus(name).to_str().unwrap()]);
        assert_eq!(c, 0, "{name}");
        assert_eq!(v["classification"]["label"], label, "{name}");
    }
    let (_, v) = report(dir.path(), &["classify", corpus("sys6").to_str().unwrap()]);
    assert_eq!(v["classification"]["symmetry"]["dimension"], 1);
}

#[test]
fn every_corpus_file_classifies_and_finds_symmetries() {
    let dir = TempDir::new().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut n = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "odesys") {
            let start = std::time::Instant::now();
            for cmd in ["classify", "symmetries"] {
                let o = complin(dir.path(), &[cmd, p.to_str().unwrap()]);
                assert_eq!(code(&o), 0, "{cmd} {}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
            }
            assert!(start.elapsed().as_secs_f64() < 10.0, "{} too slow", p.display());
            n += 1;
        }
    }
    assert!(n >= 9);
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.odesys"), "system bad\nw1: f1 + $\n").unwrap();
    let o = complin(dir.path(), &["classify", "bad.odesys"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.odesys:2:10"));
    assert_eq!(code(&complin(dir.path(), &["classify", "missing.odesys"])), 2);
    assert_eq!(code(&complin(dir.path(), &["symmetries", corpus("sys3").to_str().unwrap(), "--degree", "0"])), 2);
    let sys3 = corpus("sys3");
    let o = complin(dir.path(), &["solve", sys3.to_str().unwrap(), "--param", "a=2", "--grid", "0:1:0.1"]);
    assert_eq!(code(&o), 2, "missing binding for b");
}

#[test]
fn symmetry_examples() {
    let dir = TempDir::new().unwrap();
    let (c, v) = report(dir.path(), &["symmetries", corpus("sys4").to_str().unwrap(), "--degree", "2"]);
    assert_eq!(c, 0);
    assert_eq!(v["symmetries"]["dimension"], 3);
    assert_eq!(v["symmetries"]["abelian"], true);

    let (_, v) = report(dir.path(), &["symmetries", corpus("sys3").to_str().unwrap(), "--degree", "2"]);
    assert_eq!(v["symmetries"]["dimension"], 4);
    let brackets: Vec<String> = v["symmetries"]["brackets"].as_array().unwrap().iter().map(|b| b.as_str().unwrap().to_string()).collect();
    assert!(brackets.contains(&"[X1,X4] = 2*X1".to_string()), "{brackets:?}");

    let (_, v) = report(dir.path(), &["symmetries", corpus("free").to_str().unwrap(), "--degree", "2"]);
    assert_eq!(v["symmetries"]["dimension"], 15);
    assert_eq!(v["symmetries"]["jacobi"], true);
}

#[test]
fn solve_sys3_and_verify() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let sys3 = corpus("sys3");
    let args = ["solve", sys3.to_str().unwrap(), "--param", "a=2+0.5i", "--param", "b=0", "--grid", "0:0.4:0.001", "--report", "s3.json"];
    let (c, v) = report(d, &args);
    assert_eq!(c, 0);
    assert!(v["verification"]["deviation"].as_f64().unwrap() <= 1e-7);
    assert_eq!(v["solution"]["run"]["points"], 401);
    assert!(d.join("sys3.trajectory.csv").is_file());
    assert_eq!(strip_timings(v), strip_timings(serde_json::from_str(&std::fs::read_to_string(d.join("s3.json")).unwrap()).unwrap()));

    let (c, v) = report(d, &["verify", sys3.to_str().unwrap(), "--solution", "s3.json", "--grid", "0:0.4:0.001"]);
    assert_eq!(c, 0);
    assert!(v["verification"]["deviation"].as_f64().unwrap() <= 1e-6);
    assert!(d.join("sys3.residuals.csv").is_file());

    let o = complin(d, &["verify", sys3.to_str().unwrap(), "--solution", "s3.json", "--grid", "0:0.5:0.001"]);
    assert_eq!(code(&o), 6, "grid mismatch");
}

#[test]
fn solve_sys7_matches_rational_solution() {
    let dir = TempDir::new().unwrap();
    let (c, v) = report(dir.path(), &["solve", corpus("sys7").to_str().unwrap(), "--param", "a1=0,a2=0,b1=1,b2=1", "--grid", "1:2:0.001"]);
    assert_eq!(c, 0);
    assert!(v["verification"]["passed"].as_bool().unwrap());
    // With a = 0, b = 1 + i the Emden relation gives u = 2x / (x^2 - 2b).
    let csv = std::fs::read_to_string(dir.path().join("sys7.trajectory.csv")).unwrap();
    let mut worst: f64 = 0.0;
    for line in csv.lines().skip(1) {
        let r: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let x = r[0];
        let (dr, di) = (x * x - 2.0, -2.0);
        let den = dr * dr + di * di;
        let (u1, u2) = (2.0 * x * dr / den, -2.0 * x * di / den);
        worst = worst.max((r[1] - u1).abs()).max((r[2] - u2).abs());
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn sys6_needs_to_stop_before_the_fold() {
    let dir = TempDir::new().unwrap();
    let sys6 = corpus("sys6");
    let o = complin(dir.path(), &["solve", sys6.to_str().unwrap(), "--param", "c1=1,c2=0", "--grid", "0:1:0.001", "--series-order", "24"]);
    assert_eq!(code(&o), 5);
    let (c, v) = report(dir.path(), &["solve", sys6.to_str().unwrap(), "--param", "c1=1,c2=0", "--grid", "0:0.45:0.001", "--series-order", "24"]);
    assert_eq!(c, 0);
    assert!(v["verification"]["residual_max"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn no_recipe_exits_4() {
    let dir = TempDir::new().unwrap();
    let o = complin(dir.path(), &["solve", corpus("noncr").to_str().unwrap(), "--grid", "0:1:0.1"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn free_particle_verifies_exactly() {
    let dir = TempDir::new().unwrap();
    let free = corpus("free");
    let o = complin(dir.path(), &["solve", free.to_str().unwrap(), "--param", "a=1,b=0", "--grid", "0:1:0.01", "--report", "f.json", "-q"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let (c, v) = report(dir.path(), &["verify", free.to_str().unwrap(), "--solution", "f.json"]);
    assert_eq!(c, 0);
    assert!(v["verification"]["deviation"].as_f64().unwrap() < 1e-14);
}

#[test]
fn corrupted_solution_exits_6() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let sys3 = corpus("sys3");
    let s = sys3.to_str().unwrap();
    let o = complin(d, &["solve", s, "--param", "a=2+0.5i,b=0", "--grid", "0:0.4:0.001", "--report", "s3.json", "-q"]);
    assert_eq!(code(&o), 0);

    let csv = d.join("sys3.trajectory.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cols: Vec<String> = lines[100].split(',').map(String::from).collect();
    cols[1] = format!("{}", cols[1].parse::<f64>().unwrap() + 1e-3);
    lines[100] = cols.join(",");
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&complin(d, &["verify", s, "--solution", "s3.json"])), 6);

    std::fs::write(&csv, "x,f1\n0,1\n").unwrap();
    assert_eq!(code(&complin(d, &["verify", s, "--solution", "s3.json"])), 6);

    std::fs::write(d.join("junk.json"), "{ not json").unwrap();
    assert_eq!(code(&complin(d, &["verify", s, "--solution", "junk.json"])), 6);

    let o = complin(d, &["verify", corpus("sys7").to_str().unwrap(), "--solution", "s3.json"]);
    assert_eq!(code(&o), 6, "report belongs to another file");
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let sys4 = corpus("sys4");
    let runs: Vec<Value> = (0..2)
        .map(|_| report(d, &["solve", sys4.to_str().unwrap(), "--param", "a=1,b=1+i", "--grid", "0:1:0.001"]).1)
        .map(strip_timings)
        .collect();
    assert_eq!(serde_json::to_string(&runs[0]).unwrap(), serde_json::to_string(&runs[1]).unwrap());
    let classify: Vec<String> = (0..2)
        .map(|_| serde_json::to_string(&strip_timings(report(d, &["classify", corpus("sys7").to_str().unwrap()]).1)).unwrap())
        .collect();
    assert_eq!(classify[0], classify[1]);
}

#[test]
fn config_precedence() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let sys3 = corpus("sys3");
    let s = sys3.to_str().unwrap();
    let degree = |v: &Value| v["symmetries"]["degree_cap"].as_u64().unwrap();

    assert_eq!(degree(&report(d, &["symmetries", s]).1), 2);

    std::fs::write(d.join("complin.toml"), "[symmetry]\ndegree = 1\n").unwrap();
    assert_eq!(degree(&report(d, &["symmetries", s]).1), 1);
    assert_eq!(degree(&report(d, &["symmetries", s, "--degree", "3"]).1), 3);

    std::fs::write(d.join("other.toml"), "[symmetry]\ndegree = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_complin"))
        .args(["--json", "symmetries", s])
        .current_dir(d)
        .env("COMPLIN_CONFIG", d.join("other.toml"))
        .output()
        .unwrap();
    assert_eq!(degree(&serde_json::from_slice(&o.stdout).unwrap()), 3);
    assert_eq!(degree(&report(d, &["--config", "other.toml", "symmetries", s]).1), 3);

    std::fs::write(d.join("complin.toml"), "[tolerances]\ndeviation = 1e-20\n").unwrap();
    let o = complin(d, &["solve", s, "--param", "a=2+0.5i,b=0", "--grid", "0:0.4:0.001"]);
    assert_eq!(code(&o), 6, "tightened tolerance comes from the file");

    std::fs::write(d.join("complin.toml"), "[symmetry]\ndegre = 1\n").unwrap();
    assert_eq!(code(&complin(d, &["symmetries", s])), 2);
}

#[test]
fn plot_planes_writes_geometry() {
    let dir = TempDir::new().unwrap();
    let (c, v) = report(dir.path(), &["plot-planes", "--coeffs", "1,2,3,4", "--out", "p.json"]);
    assert_eq!(c, 0);
    assert_eq!(v["planes"]["dot"].as_f64().unwrap(), 0.0);
    let plot: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(plot["n1"], v["planes"]["n1"]);
    assert_eq!(code(&complin(dir.path(), &["plot-planes", "--coeffs", "0,0,0,0"])), 2);
    assert_eq!(code(&complin(dir.path(), &["plot-planes", "--coeffs", "1,2"])), 2);
}
