use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SWEEP_HEADER: &str = "noise_level,image_label,template_label,filtered,p_accept_mean,p_accept_stderr,second_try_accept_mean,inconclusive_mean,trials,seed";

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn qtemplate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtemplate"))
        .args(args)
        .env_remove("QTEMPLATE_THREADS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn match_exact_rotation() {
    let q = fixture("quadrant_16.pbm");
    let out = qtemplate(&["match", "--image", path_str(&q), "--template", path_str(&q), "--no-filter"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "p_reflect,p_filter,p_accept,iterations\n0.250000000000,1.000000000000,1.000000000000,2\n"
    );
    assert!(stderr(&out).contains("p_accept=1.000000000000"));
}

#[test]
fn match_with_second_template_and_sample() {
    let a = fixture("A_32.pbm");
    let b = fixture("B_32.pbm");
    let out = qtemplate(&[
        "match",
        "--image",
        path_str(&a),
        "--template",
        path_str(&a),
        "--template2",
        path_str(&b),
        "--noise",
        "0.1",
        "--seed",
        "4",
        "--sample",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p_reflect,p_filter,p_accept,iterations,p_accept_second,p_inconclusive,outcome"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 7);
    assert!(["absorbed", "filter_rejected", "accepted", "rejected"].contains(&row[6]));
}

#[test]
fn missing_file_exits_2() {
    let q = fixture("quadrant_16.pbm");
    let out = qtemplate(&["match", "--image", "does/not/exist.pbm", "--template", path_str(&q)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("does/not/exist.pbm"));
}

#[test]
fn malformed_pbm_exits_2_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pbm");
    std::fs::write(&bad, b"P1\n3 2\n0 1 0\n1 0 1\n").unwrap();
    let q = fixture("quadrant_16.pbm");
    let out = qtemplate(&["match", "--image", path_str(&bad), "--template", path_str(&q)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.pbm") && err.contains("byte"), "{err}");
}

#[test]
fn zero_cutoff_exits_3() {
    let a = fixture("A_32.pbm");
    let out = qtemplate(&["match", "--image", path_str(&a), "--template", path_str(&a), "--k-max", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("post-selection"));
}

#[test]
fn size_mismatch_exits_4() {
    let a = fixture("A_32.pbm");
    let b = fixture("B_64.pbm");
    let out = qtemplate(&["match", "--image", path_str(&a), "--template", path_str(&b)]);
    assert_eq!(out.status.code(), Some(4));
}

fn sweep(out_dir: &Path, threads: Option<&str>) -> String {
    let a = fixture("A_32.pbm");
    let b = fixture("B_32.pbm");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qtemplate"));
    cmd.args([
        "sweep",
        "--template",
        path_str(&a),
        "--template2",
        path_str(&b),
        "--noise",
        "0",
        "--noise",
        "0.1",
        "--trials",
        "5",
        "--seed",
        "17",
        "--out",
        path_str(out_dir),
    ]);
    match threads {
        Some(t) => cmd.env("QTEMPLATE_THREADS", t),
        None => cmd.env_remove("QTEMPLATE_THREADS"),
    };
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap()
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = sweep(&dir.path().join("one"), None);
    let second = sweep(&dir.path().join("two"), Some("1"));
    assert_eq!(first, second);
    assert!(!first.contains('\r'));
    let mut lines = first.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 2 levels x 4 combinations x {filtered, unfiltered}
    assert_eq!(rows.len(), 16);
    for row in &rows {
        assert_eq!(row.len(), 10);
        assert_eq!(row[8], "5");
        assert_eq!(row[9], "17");
        if row[0] == "0" {
            assert_eq!(row[5], "0.000000000000");
        }
    }
    assert!(rows.iter().any(|r| r[3] == "true") && rows.iter().any(|r| r[3] == "false"));
}

#[test]
fn sweep_without_filter_has_only_unfiltered_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture("A_32.pbm");
    let b = fixture("B_32.pbm");
    let out = qtemplate(&[
        "sweep",
        "--template",
        path_str(&a),
        "--template2",
        path_str(&b),
        "--noise",
        "0",
        "--trials",
        "1",
        "--no-filter",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("false")));
}

#[test]
fn invalid_thread_count_exits_2() {
    let q = fixture("quadrant_16.pbm");
    let out = Command::new(env!("CARGO_BIN_EXE_qtemplate"))
        .args(["match", "--image", path_str(&q), "--template", path_str(&q)])
        .env("QTEMPLATE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn discriminate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture("A_32.pbm");
    let b = fixture("B_32.pbm");
    let out = qtemplate(&[
        "discriminate",
        "--template",
        path_str(&a),
        "--template2",
        path_str(&b),
        "--noise",
        "0",
        "--noise",
        "0.2",
        "--trials",
        "3",
        "--prior-a",
        "0.3",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("discrimination.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "noise_level,filtered,p_a,p_b,helstrom_bound,algorithm_error,naive_projector_error_a,naive_projector_error_b,extended_error,p_inconclusive"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row[2], "0.300000000000");
        assert_eq!(row[3], "0.700000000000");
        let algorithm: f64 = row[5].parse().unwrap();
        let extended: f64 = row[8].parse().unwrap();
        assert!(extended <= algorithm);
    }
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn optics_report() {
    let out = qtemplate(&["optics", "--schedule", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "n=3: prep=7 qft=12"));
    assert!(text.lines().any(|l| l == "n=1: prep=1 qft=1"));
    assert!(text.contains("shifter_phases_over_pi=0.25 0.5 0.75"));
    for n in 1..=6 {
        let line = text.lines().find(|l| l.starts_with(&format!("n={n}: qft_deviation="))).unwrap();
        let dev: f64 = line.split(['=', ' ']).nth(3).unwrap().parse().unwrap();
        assert!(dev <= 1e-12, "{line}");
    }
}

#[test]
fn fixtures_command_reproduces_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtemplate(&["fixtures", "--out", path_str(dir.path()), "--noise", "0.05", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for name in ["A_32.pbm", "B_64.pbm", "A_512.pbm", "quadrant_16.pbm"] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(fixture(name)).unwrap(),
            "{name}"
        );
    }
    assert!(dir.path().join("A_64_5_7.pbm").exists());
    assert!(dir.path().join("B_64_5_7.pbm").exists());
}

#[test]
fn render_writes_graymap() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture("A_32.pbm");
    for (stage, extra) in [("input", vec![]), ("filtered", vec![]), ("rotated", vec!["--template", path_str(&a)])] {
        let target = dir.path().join(format!("{stage}.pgm"));
        let mut args = vec![
            "render",
            "--image",
            path_str(&a),
            "--stage",
            stage,
            "--noise",
            "0.1",
            "--highlight",
            "--out",
            path_str(&target),
        ];
        args.extend(extra);
        let out = qtemplate(&args);
        assert_eq!(out.status.code(), Some(0), "{stage}: {}", stderr(&out));
        let bytes = std::fs::read(&target).unwrap();
        assert!(bytes.starts_with(b"P2\n32 32\n255\n"), "{stage}");
    }
    let out = qtemplate(&[
        "render",
        "--image",
        path_str(&a),
        "--stage",
        "rotated",
        "--out",
        path_str(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
