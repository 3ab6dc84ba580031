use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqa"))
        .args(args)
        .env_remove("PQA_WORKERS")
        .output()
        .expect("binary runs")
}

fn hub5(dir: &Path) -> PathBuf {
    let path = dir.join("hub5.txt");
    fs::write(&path, "5 5\n0 1\n0 2\n0 3\n0 4\n3 4\n").unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_direct_on_the_five_vertex_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = hub5(dir.path());
    let row = json(&pqa(&["solve", "--graph", g.to_str().unwrap(), "--algorithm", "ds", "-p", "1", "--seed", "1"]));
    assert_eq!(row["algorithm"], "ds");
    assert_eq!(row["F_max"], 3.0);
    let ar = row["AR"].as_f64().unwrap();
    assert!((0.0..=1.0 + 1e-9).contains(&ar));
    assert_eq!(row["qubits_peak"], 6);
}

#[test]
fn solve_forced_initial_exit() {
    let dir = tempfile::tempdir().unwrap();
    let g = hub5(dir.path());
    let row = json(&pqa(&[
        "solve",
        "--graph",
        g.to_str().unwrap(),
        "--algorithm",
        "pqa",
        "--delta-init",
        "1e9",
        "--seed",
        "4",
    ]));
    assert_eq!(row["exit_flag"], "init_exit");
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = hub5(dir.path());
    let out = pqa(&["solve", "--graph", g.to_str().unwrap(), "--algorithm", "qaoa"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown algorithm"));
}

#[test]
fn missing_graph_file_fails() {
    let out = pqa(&["solve", "--graph", "/nonexistent/graph.txt", "--algorithm", "ds"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_writes_regular_graphs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = pqa(&[
        "gen",
        "--graph-type",
        "reg3",
        "--n",
        "14",
        "--graphs-per-type",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let entries = manifest.as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for e in entries {
        let text = fs::read_to_string(dir.path().join(e["file"].as_str().unwrap())).unwrap();
        let mut degree = [0usize; 14];
        for line in text.lines().skip(1) {
            for v in line.split_whitespace() {
                degree[v.parse::<usize>().unwrap()] += 1;
            }
        }
        assert!(degree.iter().all(|&d| d == 3));
    }
}

#[test]
fn benchmark_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = pqa(&[
        "benchmark",
        "--preset",
        "smoke",
        "--algorithms",
        "pqa,ds,qls",
        "--runs-per-depth",
        "2",
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let results = out_dir.join("results.csv");
    assert_eq!(fs::read_to_string(&results).unwrap().lines().count(), 1 + 4 * 3 * 2 * 2);

    let report = pqa(&["report", "--input", results.to_str().unwrap(), "--targets", "0.9,0.95"]);
    assert!(report.status.success());
    let text = String::from_utf8(report.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    assert!(text.lines().any(|l| l.starts_with("er05,ds,0.95,")));

    let broken = dir.path().join("broken.csv");
    let mut lines: Vec<String> = fs::read_to_string(&results).unwrap().lines().map(String::from).collect();
    lines[3] = "pqa,not,enough,fields".into();
    fs::write(&broken, lines.join("\n")).unwrap();
    let report = pqa(&["report", "--input", broken.to_str().unwrap()]);
    assert!(!report.status.success());
    assert!(String::from_utf8_lossy(&report.stderr).contains("line 4"));
}

#[test]
fn config_file_and_preset_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(&cfg, "graph_types = [\"er04\"]\nn = 6\ngraphs_per_type = 1\ndepths = [1]\nruns_per_depth = 1\n").unwrap();
    let out = pqa(&["benchmark", "--preset", "smoke", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());

    let out_dir = dir.path().join("run");
    let out = pqa(&["benchmark", "--config", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
}
