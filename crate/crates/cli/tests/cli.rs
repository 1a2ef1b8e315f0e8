//! End-to-end runs of the binary: generate, cover, verify, and the
//! determinism contract on reports.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_treecover")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_on_six_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("c6.txt");
    run_ok(&["gen", "cycle", "--n", "6", "--out", path_str(&metric)]);
    let out = run_ok(&["stats", "--input", path_str(&metric)]);
    let stats: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stats prints JSON");
    assert_eq!(stats["points"], 6);
    assert_eq!(stats["aspect_ratio"], 3.0);
    assert!(stats["doubling_constant_estimate"].as_u64().unwrap() >= 1);
}

#[test]
fn doubling_cover_line_verifies_and_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("line16.txt");
    // A 16-point line as a path graph.
    let mut text = String::from("16 15\n");
    for i in 0..15 {
        text.push_str(&format!("{i} {} 1\n", i + 1));
    }
    std::fs::write(&metric, text).unwrap();
    let out_dir = dir.path().join("cover");
    run_ok(&[
        "cover",
        "doubling",
        "--eps",
        "0.25",
        "--input",
        path_str(&metric),
        "--out",
        path_str(&out_dir),
    ]);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["schema"], 1);
    let distortion = report["verification"]["plain_distortion"].as_f64().unwrap();
    assert!(distortion <= 1.25 * (1.0 + 1e-9));

    // Standalone re-verification reproduces the same number.
    let verify_out = run_ok(&[
        "verify",
        "--cover",
        path_str(&out_dir),
        "--input",
        path_str(&metric),
    ]);
    let reverified: serde_json::Value = serde_json::from_slice(&verify_out.stdout).unwrap();
    assert_eq!(
        reverified["plain_distortion"].as_f64().unwrap(),
        distortion,
        "re-verification must reproduce the distortion bit-for-bit"
    );
}

#[test]
fn ramsey_cover_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("z.txt");
    run_ok(&[
        "gen",
        "composition",
        "--n",
        "4",
        "--k",
        "2",
        "--beta",
        "0.5",
        "--out",
        path_str(&metric),
    ]);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "cover",
            "ramsey",
            "--k",
            "2",
            "--seed",
            "7",
            "--input",
            path_str(&metric),
            "--out",
            path_str(out),
        ]);
    }
    let a = std::fs::read_to_string(out_a.join("report.json")).unwrap();
    let b = std::fs::read_to_string(out_b.join("report.json")).unwrap();
    assert_eq!(a, b, "identical config and seed must give identical reports");
}

#[test]
fn planar_cover_on_grid_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("grid.txt");
    // 4x4 grid.
    let mut edges = Vec::new();
    for r in 0..4usize {
        for c in 0..4usize {
            let id = r * 4 + c;
            if c + 1 < 4 {
                edges.push((id, id + 1));
            }
            if r + 1 < 4 {
                edges.push((id, id + 4));
            }
        }
    }
    let mut text = format!("16 {}\n", edges.len());
    for (u, v) in edges {
        text.push_str(&format!("{u} {v} 1\n"));
    }
    std::fs::write(&graph, text).unwrap();
    let out_dir = dir.path().join("cover");
    run_ok(&[
        "cover",
        "planar",
        "--eps",
        "0.5",
        "--seed",
        "3",
        "--input",
        path_str(&graph),
        "--out",
        path_str(&out_dir),
    ]);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    assert!(report["verification"]["plain_distortion"].as_f64().unwrap() <= 1.5 + 1e-9);
    assert_eq!(report["verification"]["domination_ok"], true);
}

#[test]
fn verify_rejects_mismatched_input() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("c8.txt");
    run_ok(&["gen", "cycle", "--n", "8", "--out", path_str(&metric)]);
    let out_dir = dir.path().join("cover");
    run_ok(&[
        "cover",
        "ramsey",
        "--k",
        "1",
        "--seed",
        "1",
        "--input",
        path_str(&metric),
        "--out",
        path_str(&out_dir),
    ]);
    // Verifying against a different-size metric must fail loudly.
    let other = dir.path().join("c6.txt");
    run_ok(&["gen", "cycle", "--n", "6", "--out", path_str(&other)]);
    let out = run(&[
        "verify",
        "--cover",
        path_str(&out_dir),
        "--input",
        path_str(&other),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mismatch"), "stderr: {stderr}");
}

#[test]
fn gen_recursive_cycle_graph_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    run_ok(&[
        "gen",
        "recursive-cycle",
        "--n",
        "2",
        "--k",
        "2",
        "--out",
        path_str(&graph),
    ]);
    let out = run_ok(&["stats", "--input", path_str(&graph)]);
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Diameter (3N)^k = 36 over d_min 1.
    assert_eq!(stats["d_max"], 36.0);
}
