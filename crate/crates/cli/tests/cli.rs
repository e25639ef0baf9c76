use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn levytree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levytree"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = levytree(args);
    assert!(
        out.status.success(),
        "levytree {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CHAIN: &str = r#"{
  "family": "hr",
  "tree": [[1, 2], [2, 3]],
  "edge_params": {"1-2": 1.0, "2-3": 2.0},
  "m": {"1-2": 0.8, "2-3": 0.5}
}"#;

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("model.json");
    fs::write(&path, CHAIN).unwrap();
    path
}

fn simulate(dir: &Path, name: &str, seed: &str) -> std::path::PathBuf {
    let cfg = write_config(dir);
    let out = dir.join(name);
    ok(&["simulate", "--config", p(&cfg), "--n", "600", "--eps", "0.05", "--seed", seed, "--out", p(&out)]);
    out
}

#[test]
fn simulation_is_reproducible_from_the_seed() {
    let dir = TempDir::new().unwrap();
    let a = simulate(dir.path(), "a", "11");
    let b = simulate(dir.path(), "b", "11");
    let c = simulate(dir.path(), "c", "12");
    for file in ["increments.csv", "paths.csv", "metadata.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    assert_ne!(fs::read(a.join("increments.csv")).unwrap(), fs::read(c.join("increments.csv")).unwrap());

    let meta: serde_json::Value = serde_json::from_slice(&fs::read(a.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["flags"]["seed"], 11);
    assert_eq!(meta["flags"]["step"], "unit");
    assert_eq!(meta["model_hash"].as_str().unwrap().len(), 64);

    let inc = fs::read_to_string(a.join("increments.csv")).unwrap();
    assert!(inc.starts_with("t,X1,X2,X3\n"));
    assert_eq!(inc.lines().count(), 601);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path());
    for (name, threads) in [("one", "1"), ("three", "3")] {
        let out = dir.path().join(name);
        ok(&[
            "--threads", threads, "simulate", "--config", p(&cfg), "--n", "300", "--eps", "0.05", "--seed", "4",
            "--out", p(&out),
        ]);
    }
    assert_eq!(
        fs::read(dir.path().join("one/increments.csv")).unwrap(),
        fs::read(dir.path().join("three/increments.csv")).unwrap()
    );
}

#[test]
fn estimate_then_learn_matches_direct_learn() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sim", "5");
    let inc = sim.join("increments.csv");
    let chi = dir.path().join("chi");
    ok(&["estimate", "--input", p(&inc), "--k", "60", "--out", p(&chi)]);
    for f in ["chi.csv", "chi_pp.csv", "chi_pm.csv", "chi_mp.csv", "chi_mm.csv"] {
        assert!(chi.join(f).exists(), "{f}");
    }
    let direct = dir.path().join("direct");
    let via = dir.path().join("via");
    ok(&["learn", "--input", p(&inc), "--k", "60", "--out", p(&direct)]);
    ok(&["learn", "--chi-dir", p(&chi), "--out", p(&via)]);
    for f in ["tree.dot", "edges.csv"] {
        assert_eq!(fs::read(direct.join(f)).unwrap(), fs::read(via.join(f)).unwrap(), "{f}");
    }
    let dot = fs::read_to_string(direct.join("tree.dot")).unwrap();
    assert!(dot.starts_with("graph levytree {"));
    assert!(dot.contains("gamma_hat="));
    assert!(fs::read_to_string(direct.join("edges.csv")).unwrap().starts_with("i,j,gamma,m\n"));
}

#[test]
fn k_grid_writes_one_directory_per_k() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sim", "6");
    let out = dir.path().join("grid");
    ok(&["estimate", "--input", p(&sim.join("increments.csv")), "--k-grid", "30,60", "--out", p(&out)]);
    assert!(out.join("k_30/chi.csv").exists());
    assert!(out.join("k_60/chi_mm.csv").exists());
    let grid = fs::read_to_string(out.join("chi_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 2 * 3);
}

#[test]
fn stability_frequencies_are_written() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sim", "7");
    let out = dir.path().join("learn");
    ok(&[
        "learn", "--input", p(&sim.join("increments.csv")), "--k", "60", "--stability", "10", "--seed", "3",
        "--out", p(&out),
    ]);
    let text = fs::read_to_string(out.join("stability.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,frequency"));
    // Each subsample tree has two edges among the three pairs.
    let total: f64 = lines.map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 2.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_study_always_recovers() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("study");
    ok(&[
        "study", "--d", "2", "--n-grid", "50,200", "--q-grid", "0.8,0.9", "--reps", "4", "--seed", "1", "--out",
        p(&out),
    ]);
    let text = fs::read_to_string(out.join("recovery.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,q,proportion"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",1")), "{text}");
}

#[test]
fn comonotone_data_warns_and_breaks_ties_lexicographically() {
    let dir = TempDir::new().unwrap();
    let inc = dir.path().join("como.csv");
    let mut text = String::from("t,X1,X2,X3\n");
    for t in 1..=40 {
        let v = (t as f64 - 20.5).powi(3);
        text.push_str(&format!("{t},{v},{v},{v}\n"));
    }
    fs::write(&inc, text).unwrap();
    let mut dots = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let res = ok(&["learn", "--input", p(&inc), "--k", "10", "--out", p(&out)]);
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert!(stderr.contains("not unique"), "{stderr}");
        dots.push(fs::read_to_string(out.join("tree.dot")).unwrap());
    }
    assert_eq!(dots[0], dots[1]);
    assert!(dots[0].contains("1 -- 2") && dots[0].contains("1 -- 3"), "{}", dots[0]);
}

#[test]
fn verify_reports_on_a_chain() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path());
    let out = levytree(&[
        "verify", "--config", p(&cfg), "--a", "1", "--b", "3", "--c", "2", "--lower", "1,-2,1", "--upper", "2,-1,2",
        "--resolution", "16",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["factorization_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn ingest_and_couple() {
    let dir = TempDir::new().unwrap();
    let prices = dir.path().join("prices.csv");
    fs::write(&prices, "date,AAA,BBB\n2024-01-02,100,50\n2024-01-03,110,50\n2024-01-04,99,55\n").unwrap();
    let returns = dir.path().join("returns.csv");
    ok(&["ingest", "--prices", p(&prices), "--out", p(&returns)]);
    let text = fs::read_to_string(&returns).unwrap();
    assert!(text.starts_with("t,AAA,BBB\n"));
    let first: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 1.1f64.ln()).abs() < 1e-15);

    let std = dir.path().join("std.csv");
    fs::write(&std, "t,X1,X2\n1,-3.0,2.0\n2,5.0,-1.0\n").unwrap();
    let coupled = dir.path().join("coupled.csv");
    ok(&["couple", "--std", p(&std), "--observed", p(&returns), "--out", p(&coupled)]);
    let text = fs::read_to_string(&coupled).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    // Smaller standardized value takes the smaller observed return.
    assert!(rows[0][0] < rows[1][0]);
    assert!(rows[0][1] > rows[1][1]);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,AAA\n2024-01-02,100\n2024-01-03,-1\n").unwrap();
    let res = levytree(&["ingest", "--prices", p(&bad), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3, AAA"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(levytree(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(levytree(&["simulate", "--bogus"]).status.code(), Some(2));

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"family": "hr", "tree": [[1, 2]], "edge_params": {"1-2": -1.0}}"#).unwrap();
    let res = levytree(&[
        "simulate", "--config", p(&cfg), "--n", "10", "--eps", "0.1", "--seed", "1", "--out", p(&dir.path().join("o")),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("edge_params"));

    // No joint exceedances at k = 1: the χ̂ graph is disconnected.
    let inc = dir.path().join("sep.csv");
    fs::write(&inc, "t,X1,X2,X3\n1,9,0,0\n2,0,9,0\n3,0,0,9\n4,0.1,0.2,0.3\n").unwrap();
    let res = levytree(&["learn", "--input", p(&inc), "--k", "1", "--out", p(&dir.path().join("l"))]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("learn"));
}
