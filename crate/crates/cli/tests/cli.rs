use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");

fn graphw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphw"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = graphw(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    graphw(dir, args).status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(FIXTURE_DIR).join(name)
}

#[test]
fn sample_writes_header_and_edges() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--model", "er", "--v", "10", "--p", "0.5", "--n", "20", "--seed", "7", "--out", "s.txt"]);
    let text = read(dir.path(), "s.txt");
    let lines = data_lines(&text);
    assert_eq!(lines[0], "graphsample v=10 n=20 base=0");
    assert!(lines.len() > 1);
    for l in &lines[1..] {
        let f: Vec<usize> = l.split(' ').map(|x| x.parse().unwrap()).collect();
        assert!(f[0] < 20 && f[1] < f[2] && f[2] < 10);
    }

    ok(dir.path(), &["sample", "--model", "er", "--v", "10", "--p", "0", "--n", "20", "--out", "empty.txt"]);
    assert_eq!(data_lines(&read(dir.path(), "empty.txt")), ["graphsample v=10 n=20 base=0"]);
}

#[test]
fn outputs_reference_their_manifest() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--model", "ergm-2star", "--v", "6", "--theta1", "-0.5", "--theta2", "0.1", "--n", "5", "--seed", "3", "--out", "e.txt"]);
    let text = read(dir.path(), "e.txt");
    assert_eq!(text.lines().nth(1), Some("# manifest=e.txt.manifest.json"));
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "e.txt.manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["command"]["sample"]["model"], "ergm-2star");
    assert_eq!(manifest["command"]["sample"]["theta1"], -0.5);
    assert!(manifest["started"].is_string() && manifest["finished"].is_string());

    ok(dir.path(), &["summary", "--sample", "e.txt", "--k", "3", "--out", "top.csv", "--manifest", "run.json"]);
    assert!(read(dir.path(), "top.csv").starts_with("# manifest=run.json\ni,j,count,frequency\n"));
    assert!(dir.path().join("run.json").exists());
}

#[test]
fn two_sample_test_against_itself() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--model", "er", "--v", "8", "--p", "0.4", "--n", "15", "--out", "s.txt"]);
    let text = ok(dir.path(), &["test", "--sample", "s.txt", "--sample2", "s.txt", "--out", "r.csv"]);
    assert!(text.contains("W = 0\n") && text.contains("p-value = 1 "), "{text}");
    let rows = data_lines(&read(dir.path(), "r.csv")).join("\n");
    assert_eq!(
        rows,
        "test,n,m,v,w,alpha,critical_value,p_value,reject,replications,seed\n\
         two-sample,15,15,8,0,0.05,,1,false,1000,1"
    );
}

#[test]
fn one_sample_test_of_complete_graphs_rejects() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("graphsample v=10 n=20 base=0\n");
    for k in 0..20 {
        for i in 0..10 {
            for j in (i + 1)..10 {
                text += &format!("{k} {i} {j}\n");
            }
        }
    }
    fs::write(dir.path().join("full.txt"), text).unwrap();
    let out = ok(dir.path(), &["test", "--sample", "full.txt", "--null", "er", "--p", "0.5", "--replications", "500"]);
    assert!(out.contains("W = 22.5\n") && out.contains("  reject H0"), "{out}");
}

#[test]
fn supplied_marginals_unlock_large_ergm_nulls() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--model", "ergm-triangle", "--v", "8", "--theta1", "-1", "--theta2", "0.2", "--n", "10", "--out", "s.txt"]);
    ok(dir.path(), &["summary", "--sample", "s.txt", "--k", "28", "--out", "m.csv"]);
    let args = ["test", "--sample", "s.txt", "--null", "ergm-triangle", "--theta1", "-1", "--theta2", "0.2", "--replications", "100"];
    let refused = graphw(dir.path(), &args);
    assert_eq!(refused.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--null-marginals"));
    let mut with = args.to_vec();
    with.extend(["--null-marginals", "m.csv"]);
    let out = ok(dir.path(), &with);
    assert!(out.contains("null marginals from m.csv"), "{out}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let csv = fixture("three_channel.csv");
    let csv = csv.to_str().unwrap();
    assert_eq!(code(dir.path(), &["build-graphs", "--input", csv]), 2);
    assert_eq!(code(dir.path(), &["sample", "--model", "er", "--v", "5", "--n", "3"]), 2);
    assert_eq!(code(dir.path(), &["sample", "--model", "er", "--v", "5", "--n", "3", "--p", "1.5"]), 4);
    assert_eq!(code(dir.path(), &["frobnicate"]), 2);

    fs::write(dir.path().join("bad.txt"), "graphsample v=3 n=2 base=0\n0 0 1\n1 2 2\n").unwrap();
    let out = graphw(dir.path(), &["summary", "--sample", "bad.txt", "--k", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(code(dir.path(), &["summary", "--sample", "missing.txt", "--k", "1"]), 3);
}

#[test]
fn build_graphs_reproduces_fixture() {
    let dir = TempDir::new().unwrap();
    let csv = fixture("three_channel.csv");
    let out = ok(dir.path(), &[
        "build-graphs", "--input", csv.to_str().unwrap(), "--sampling-rate", "1000",
        "--width-ms", "5", "--step-ms", "5", "--c", "0.5", "--out", "g.txt",
    ]);
    assert!(out.contains("windows: 4"));
    let expected = fs::read_to_string(fixture("three_channel.graphs")).unwrap();
    assert_eq!(data_lines(&read(dir.path(), "g.txt")), data_lines(&expected));
}

#[test]
fn identical_channels_give_complete_graphs() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("a,b,c,d\n");
    for t in 0..40 {
        let x = ((t * 7) % 13) as f64 + 0.5 * t as f64;
        text += &format!("{x},{x},{x},{x}\n");
    }
    fs::write(dir.path().join("same.csv"), text).unwrap();
    ok(dir.path(), &["build-graphs", "--input", "same.csv", "--sampling-rate", "100", "--width-ms", "100", "--step-ms", "50", "--out", "g.txt"]);
    let lines = data_lines(&read(dir.path(), "g.txt")).len();
    // 7 windows of 10 samples, 6 pairs each.
    assert_eq!(lines, 1 + 7 * 6);
}

#[test]
fn summary_lists_every_pair_and_full_frequencies() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("same.txt"), "graphsample v=4 n=3 base=1\n0 1 2\n1 1 2\n2 1 2\n0 3 4\n1 3 4\n2 3 4\n").unwrap();
    ok(dir.path(), &["summary", "--sample", "same.txt", "--k", "6", "--base", "1", "--out", "all.csv"]);
    let text = read(dir.path(), "all.csv");
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[1], "1,2,3,1");
    assert_eq!(rows[2], "3,4,3,1");
    assert!(rows[3..].iter().all(|r| r.ends_with(",0,0")));
}

#[test]
fn power_csv_schema() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &[
        "power", "--model", "er", "--v", "8", "--grid", "0.5,0.8", "--replications", "400",
        "--quantile-replications", "2000", "--baseline", "bonferroni", "--out", "p.csv",
    ]);
    let text = read(dir.path(), "p.csv");
    let rows = data_lines(&text);
    assert_eq!(rows[0], "param,power_w,power_bc,replications");
    assert_eq!(rows.len(), 3);
    let null: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(null[0], 0.5);
    assert!((null[1] - 0.05).abs() < 0.04, "{}", rows[1]);
    assert!(rows[2].starts_with("0.8,1,"));
}

#[test]
fn density_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(dir.path(), &["density-sweep", "--stats", "2star", "--v", "5", "--theta1", "-1", "--grid", "-0.2,0", "--n", "200"]);
    let rows = data_lines(&stdout);
    assert_eq!(rows[0], "theta1,theta2,density,exact_density,degenerate");
    assert!(rows[1].starts_with("-1,-0.2,"));
    assert_eq!(rows.len(), 3);
}

/// Every randomized command, writing into `dir`.
fn randomized_runs(dir: &Path, threads: &str) {
    let t = ["--threads", threads];
    let run = |args: &[&str]| {
        let mut all = args.to_vec();
        all.extend(t);
        ok(dir, &all);
    };
    run(&["sample", "--model", "modified-er", "--v", "9", "--p", "0.8", "--q", "0.3", "--n", "12", "--seed", "5", "--out", "a.txt"]);
    run(&["sample", "--model", "ergm-triangle", "--v", "7", "--theta1", "-1", "--theta2", "0.3", "--n", "12", "--seed", "5", "--out", "b.txt"]);
    run(&["test", "--sample", "a.txt", "--null", "er", "--p", "0.5", "--replications", "3000", "--seed", "5", "--out", "t1.csv"]);
    run(&["test", "--sample", "a.txt", "--sample2", "a.txt", "--permutations", "300", "--seed", "5", "--out", "t2.csv"]);
    run(&["power", "--model", "modified-er", "--v", "8", "--q", "0.5", "--grid", "0.3,0.6", "--replications", "300", "--quantile-replications", "1000", "--baseline", "bonferroni", "--seed", "5", "--out", "p.csv"]);
    run(&["power", "--null", "ergm-2star", "--theta1", "-0.5", "--null-theta2", "0", "--model", "ergm-2star", "--v", "5", "--grid", "0,0.2", "--replications", "100", "--quantile-replications", "200", "--burn-in", "20", "--thinning", "2", "--seed", "5", "--out", "pe.csv"]);
    run(&["density-sweep", "--stats", "triangle", "--v", "7", "--theta1", "-1", "--grid", "0,0.4", "--n", "200", "--seed", "5", "--out", "d.csv"]);
}

const OUTPUTS: [&str; 7] = ["a.txt", "b.txt", "t1.csv", "t2.csv", "p.csv", "pe.csv", "d.csv"];

#[test]
fn same_seed_gives_identical_files_for_any_thread_count() {
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    randomized_runs(dirs[0].path(), "1");
    randomized_runs(dirs[1].path(), "1");
    randomized_runs(dirs[2].path(), "4");
    for name in OUTPUTS {
        let reference = fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(fs::read(d.path().join(name)).unwrap(), reference, "{name} differs");
        }
    }
}

#[test]
fn different_seed_changes_samples() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--model", "er", "--v", "8", "--p", "0.5", "--n", "10", "--seed", "1", "--out", "x.txt"]);
    ok(dir.path(), &["sample", "--model", "er", "--v", "8", "--p", "0.5", "--n", "10", "--seed", "2", "--out", "y.txt"]);
    assert_ne!(data_lines(&read(dir.path(), "x.txt")), data_lines(&read(dir.path(), "y.txt")));
}
