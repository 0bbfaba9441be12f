use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn illposed(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illposed"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ILLPOSED_REF_POINTS")
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn solve_rank_one_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let out = illposed(&["solve", "--problem", "rank1-sine", "--n", "16"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(summary.len(), 1);
    assert!(column(&summary, 5)[0] <= 1e-6);
    assert!(column(&summary, 6)[0] <= 1e-6);
    let solution = read_csv(&dir.path().join("solution_16.csv"));
    assert_eq!(solution.len(), 256);
    for row in &solution {
        let (x, truth): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((x - truth).abs() < 1e-6);
    }
}

#[test]
fn solve_with_noise_is_bytewise_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve",
        "--problem",
        "green-m1",
        "--n",
        "8,16",
        "--delta",
        "1e-3",
        "--seed",
        "42",
    ];
    for sub in ["a", "b"] {
        assert_eq!(illposed(&args, &dir.path().join(sub)).status.code(), Some(0));
    }
    for file in ["summary.csv", "solution_8.csv", "solution_16.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let summary = read_csv(&dir.path().join("a/summary.csv"));
    assert!(summary.iter().all(|r| !r[7].is_empty()));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--config", missing.to_str().unwrap()],
        vec!["solve", "--problem", "no-such-problem", "--n", "8"],
        vec!["solve", "--problem", "green-m1", "--n", "16,8"],
        vec!["solve", "--problem", "green-m1", "--n", "128"],
        vec!["solve", "--n", "8"],
        vec!["study", "--problem", "green-m1", "--n", "8", "--scheme", "galerkin"],
        vec!["verify", "--problem", "green-m1", "--n", "8", "--delta", "-1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = illposed(&args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"problem": "rank3-decay", "scheme": "interpolatory", "n": [4, 8], "alpha": 1e-3, "ref_points": 128}"#,
    )
    .unwrap();
    let out = illposed(
        &["study", "--config", config.to_str().unwrap(), "--n", "16"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("convergence.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "16");
    assert_eq!(column(&rows, 3)[0], 1e-3);
}

#[test]
fn env_var_overrides_ref_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_illposed"))
        .args(["solve", "--problem", "rank1-sine", "--n", "4", "--out"])
        .arg(dir.path())
        .env("ILLPOSED_REF_POINTS", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_csv(&dir.path().join("solution_4.csv")).len(), 64);
}

#[test]
fn study_green_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = illposed(&["study", "--problem", "green-m1", "--n", "8,16,32,64"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("convergence.csv"));
    assert_eq!(rows.len(), 4);
    for idx in [1, 5, 6] {
        let col = column(&rows, idx);
        assert!(col.windows(2).all(|w| w[1] < w[0]), "column {idx}: {col:?}");
    }
}

#[test]
fn study_fans_out_over_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let out = illposed(
        &["study", "--problem", "green-m1", "--n", "8", "--scheme", "all"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    for scheme in ["collocation", "interpolatory", "ortho-pc"] {
        let rows = read_csv(&dir.path().join(format!("convergence_{scheme}.csv")));
        assert_eq!(rows.len(), 1, "{scheme}");
    }
    assert!(!dir.path().join("convergence.csv").exists());
}

#[test]
fn verify_with_huge_noise_skips() {
    let dir = tempfile::tempdir().unwrap();
    let out = illposed(
        &[
            "verify",
            "--problem",
            "green-m1",
            "--scheme",
            "ortho-pc",
            "--n",
            "8",
            "--delta",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("bounds.csv"));
    assert!(rows.iter().any(|r| r[9] == "skipped"));
    assert!(rows.iter().all(|r| r[9] != "false"));
}

#[test]
fn matrix_dump_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cell = ["--problem", "rank3-decay", "--scheme", "ortho-pc", "--n", "8"];
    let solve: Vec<&str> = ["solve"]
        .iter()
        .chain(&cell)
        .copied()
        .chain(["--dump-matrix"])
        .collect();
    assert_eq!(illposed(&solve, dir.path()).status.code(), Some(0));
    let dump = dir.path().join("matrix_8.csv");

    let replay = |path: &Path| {
        let mut args: Vec<&str> = ["verify"].iter().chain(&cell).copied().collect();
        args.extend(["--replay", path.to_str().unwrap()]);
        illposed(&args, &dir.path().join("replay"))
    };
    let ok = replay(&dump);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let text = fs::read_to_string(&dump).unwrap();
    let corrupted = dir.path().join("corrupted.csv");
    fs::write(&corrupted, text.replacen(',', ",not-a-number", 2)).unwrap();
    assert_eq!(replay(&corrupted).status.code(), Some(3));

    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    let truncated = dir.path().join("truncated.csv");
    fs::write(&truncated, lines.join("\n")).unwrap();
    assert_eq!(replay(&truncated).status.code(), Some(3));

    let asymmetric = dir.path().join("asymmetric.csv");
    let mut rows: Vec<String> = text.lines().map(String::from).collect();
    let mut first: Vec<&str> = rows[1].split(',').collect();
    first[1] = "1e3";
    rows[1] = first.join(",");
    fs::write(&asymmetric, rows.join("\n")).unwrap();
    assert_eq!(replay(&asymmetric).status.code(), Some(3));
}
