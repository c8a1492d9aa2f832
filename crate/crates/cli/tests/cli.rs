use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dpmatch::io::{parse_match_csv, parse_truth_csv};

fn dpmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpmatch"))
        .args(args)
        .output()
        .expect("spawn dpmatch")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FIVE: &str = "# five points\n10 12 0.2\n40 80 1.4\n75 30 3.0\n55 55 4.4\n20 65 5.9\n";

#[test]
fn identical_files_match_onto_themselves() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    fs::write(&a, FIVE).unwrap();
    let out = dpmatch(&["match", path(&a), path(&a), "--k", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed = parse_match_csv(&stdout(&out)).unwrap();
    assert_eq!(parsed.pairs, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    let t = parsed.transform.unwrap();
    assert!(t.max_abs_diff(&dpmatch::RigidTransform::IDENTITY) < 1e-6);
    assert!(stdout(&out).starts_with("i,j,score\n"));
}

#[test]
fn malformed_line_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, FIVE).unwrap();
    fs::write(&b, "1 2 3\n4 5 6\n7 eight 9\n").unwrap();
    let out = dpmatch(&["match", path(&a), path(&b)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn single_point_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, FIVE).unwrap();
    fs::write(&b, "1 2 3\n").unwrap();
    assert_eq!(
        dpmatch(&["match", path(&a), path(&b)]).status.code(),
        Some(3)
    );
}

#[test]
fn missing_file_exits_2() {
    let out = dpmatch(&["match", "/nonexistent/a.txt", "/nonexistent/b.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_counts_and_determinism() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let flags = [
        "--n",
        "50",
        "--outlier",
        "0.2",
        "--jitter",
        "0.08",
        "--seed",
        "42",
    ];
    for d in [&d1, &d2] {
        let mut args = vec!["generate", "--out-dir", path(d.path())];
        args.extend(flags);
        let out = dpmatch(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let points = |p: &Path| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .count()
    };
    assert_eq!(points(&d1.path().join("a.txt")), 50);
    assert_eq!(points(&d1.path().join("b.txt")), 50);
    let truth = parse_truth_csv(&fs::read_to_string(d1.path().join("truth.csv")).unwrap()).unwrap();
    assert_eq!(truth.len(), 50);
    assert_eq!(truth.iter().filter(|r| r.2).count(), 10);
    for name in ["a.txt", "b.txt", "truth.csv"] {
        assert_eq!(
            fs::read(d1.path().join(name)).unwrap(),
            fs::read(d2.path().join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

#[test]
fn generate_rejects_bad_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpmatch(&[
        "generate",
        "--outlier",
        "1.5",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("a.txt").exists());
}

#[test]
fn generate_then_match_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let out = dpmatch(&[
        "generate",
        "--n",
        "40",
        "--seed",
        "3",
        "--transform",
        "0.7,-12,30",
        "--out-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let pairs = dir.path().join("pairs.csv");
    let out = dpmatch(&[
        "match",
        path(&dir.path().join("a.txt")),
        path(&dir.path().join("b.txt")),
        "--out",
        path(&pairs),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let parsed = parse_match_csv(&fs::read_to_string(&pairs).unwrap()).unwrap();
    let truth =
        parse_truth_csv(&fs::read_to_string(dir.path().join("truth.csv")).unwrap()).unwrap();
    let expected: Vec<(usize, usize)> = truth.iter().map(|r| (r.0, r.1)).collect();
    assert_eq!(parsed.pairs, expected);
    let planted = dpmatch::RigidTransform::new(0.7, -12.0, 30.0);
    assert!(parsed.transform.unwrap().max_abs_diff(&planted) < 1e-6);

    let out = dpmatch(&["acppr", path(&pairs), path(&dir.path().join("truth.csv"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "acppr 1 (40/40 true pairs)");
}

#[test]
fn dump_scores_writes_one_file_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    assert!(
        dpmatch(&["generate", "--n", "12", "--outlier", "0.25", "--out-dir", d])
            .status
            .success()
    );
    let dumps = dir.path().join("dumps");
    let out = dpmatch(&[
        "match",
        path(&dir.path().join("a.txt")),
        path(&dir.path().join("b.txt")),
        "--k",
        "3",
        "--max-iter",
        "4",
        "--tol",
        "0",
        "--dump-scores",
        path(&dumps),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(&dumps)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "scores_iter001.csv",
            "scores_iter002.csv",
            "scores_iter003.csv",
            "scores_iter004.csv"
        ]
    );
    let first = fs::read_to_string(dumps.join("scores_iter001.csv")).unwrap();
    assert_eq!(first.lines().count(), 12);
    assert!(first.lines().all(|l| l.split(',').count() == 12));
}

#[test]
fn single_cell_bench() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpmatch(&[
        "bench",
        "--trials",
        "1",
        "--k-list",
        "12",
        "--outlier-list",
        "0.2",
        "--jitter-list",
        "0.08",
        "--emit-fig",
        "1,2,3",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("acppr_k12.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "outlier_pct\\jitter_pct,8,average");
    assert!(lines[1].starts_with("20,"));
    for fig in 1..=3 {
        let csv = fs::read_to_string(dir.path().join(format!("fig{fig}.csv"))).unwrap();
        assert!(csv.starts_with("x,curve_label,y\n"));
        assert_eq!(csv.lines().count(), 2);
    }
    assert!(stderr(&out).contains("K=12"));
}

#[test]
fn bench_rejects_bad_figure_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpmatch(&[
        "bench",
        "--trials",
        "1",
        "--k-list",
        "4",
        "--emit-fig",
        "7",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_feeds_match() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    fs::write(&a, FIVE).unwrap();
    let conf = dir.path().join("m.conf");
    fs::write(&conf, "k = 2\ntau = 0.5\n").unwrap();
    let out = dpmatch(&["match", path(&a), path(&a), "--config", path(&conf)]);
    assert!(out.status.success(), "{}", stderr(&out));
    fs::write(&conf, "k = 0\n").unwrap();
    let out = dpmatch(&["match", path(&a), path(&a), "--config", path(&conf)]);
    assert_eq!(out.status.code(), Some(2));
    // Flag beats the bad file value.
    let out = dpmatch(&[
        "match",
        path(&a),
        path(&a),
        "--config",
        path(&conf),
        "--k",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}
