//! End-to-end CLI tests: subcommands, file formats, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn hypertree() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypertree"))
}

fn run(args: &[&str]) -> Output {
    hypertree().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn sample_writes_a_spanning_tree() {
    let out = run(&["sample", "-n", "6", "-d", "1", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let complex = hypertree::simplicial::Complex::parse(&text).unwrap();
    assert_eq!(complex.vertex_count(), 6);
    assert_eq!(complex.dim(), 1);
    assert_eq!(complex.face_count(), 5);
    assert!(hypertree::homology::is_hypertree(&complex));
}

#[test]
fn sample_union_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("union.cplx");
    let out = run(&[
        "sample",
        "-n",
        "20",
        "-d",
        "2",
        "-k",
        "5",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let complex = hypertree::simplicial::Complex::read_file(&path).unwrap();
    assert!(complex.face_count() <= 5 * 171);
    assert!(complex.face_count() >= 171);
    // Stdout mentions the face count.
    assert!(stdout(&out).contains(&complex.face_count().to_string()));
}

#[test]
fn sample_both_backends_emits_two_files_and_a_note() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draw.cplx");
    let out = run(&[
        "sample",
        "-n",
        "6",
        "-d",
        "2",
        "-l",
        "1",
        "--seed",
        "3",
        "--backend",
        "both",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("draw.kernel").exists());
    assert!(dir.path().join("draw.percolation").exists());
    let note = String::from_utf8_lossy(&out.stderr);
    assert!(note.contains("backend note"), "stderr: {note}");
}

#[test]
fn sample_rejects_bad_parameters() {
    let out = run(&["sample", "-n", "3", "-d", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(64));
    let out = run(&["sample", "-n", "6"]);
    assert_eq!(out.status.code(), Some(64)); // missing -d
    let out = run(&["sample", "-n", "6", "-d", "1", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn help_everywhere() {
    for args in [
        &["--help"][..],
        &["sample", "--help"],
        &["expansion", "--help"],
        &["verify", "--help"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(stdout(&out).contains("Usage"));
    }
}

#[test]
fn expansion_of_k4_reports_four_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k4.cplx");
    std::fs::write(&path, "4 1\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n").unwrap();
    let out = run(&["expansion", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let stats = reports[0]["statistics"].as_array().unwrap();
    let h0 = stats
        .iter()
        .find(|s| s["name"] == "h_0")
        .expect("h_0 present");
    assert_eq!(h0["value"], "4/3");
    let h = stats.iter().find(|s| s["name"] == "h").unwrap();
    assert_eq!(h["value"], "4/3");
    assert!(stats.iter().any(|s| s["name"] == "skeleton_alpha"));
}

#[test]
fn expansion_reports_zero_for_the_projective_plane() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rp2.cplx");
    hypertree::homology::projective_plane()
        .write_file(&path)
        .unwrap();
    let out = run(&["expansion", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let stats = reports[0]["statistics"].as_array().unwrap();
    // H¹(F₂) ≠ 0 forces 𝔥₁ = 0.
    let h1 = stats.iter().find(|s| s["name"] == "h_1").unwrap();
    assert_eq!(h1["value"], "0");
    let d1 = stats
        .iter()
        .find(|s| s["name"] == "cohomology_dim_1")
        .unwrap();
    assert_eq!(d1["value"], "1");
}

#[test]
fn expansion_capacity_gives_exit_three_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.cplx");
    // 2-complex on 9 vertices: dim C¹ = 36 exceeds an ambient cap of 20.
    let complex = hypertree::kernels::sample_hypertree(
        9,
        2,
        0,
        5,
        hypertree::kernels::Backend::Percolation,
        &hypertree::Caps::default(),
    )
    .unwrap();
    complex.write_file(&path).unwrap();
    let out = run(&[
        "--caps",
        "ambient=20",
        "expansion",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let stats = reports[0]["statistics"].as_array().unwrap();
    let h1 = stats.iter().find(|s| s["name"] == "h_1").unwrap();
    assert!(h1["value"].as_str().unwrap().contains("capacity"));
    assert_eq!(reports[0]["verdict"], "inconclusive");
}

#[test]
fn expansion_on_missing_or_empty_input() {
    let out = run(&["expansion", "/nonexistent.cplx"]);
    assert_eq!(out.status.code(), Some(1)); // io error
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cplx");
    std::fs::write(&path, "5 1\n").unwrap();
    let out = run(&["expansion", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64)); // degenerate input is a usage error
}

#[test]
fn verify_measure_exit_codes_and_reproducibility() {
    let out = run(&["verify", "measure", "-n", "5", "-d", "2"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["verdict"], "pass");

    // Unknown suite is a usage error.
    let out = run(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(64));

    // Capacity exceeded: exit 3.
    let out = run(&["--caps", "enum=10", "verify", "measure", "-n", "5", "-d", "2"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn verify_marginals_reports_are_byte_identical_across_runs() {
    let args = [
        "verify",
        "marginals",
        "-n",
        "8",
        "-d",
        "2",
        "--samples",
        "5000",
        "--seed",
        "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    // Strip the wall_time fields before comparing.
    let mut ja: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let mut jb: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    for j in [&mut ja, &mut jb] {
        for r in j.as_array_mut().unwrap() {
            r["wall_time_ms"] = 0.into();
        }
    }
    assert_eq!(ja, jb);
}

#[test]
fn verify_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&[
        "verify",
        "counts",
        "-n",
        "6",
        "-d",
        "2",
        "--samples",
        "4000",
        "--csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("experiment,statistic,value"));
    assert!(text.contains("counts,verdict,pass"));
}

#[test]
fn verify_trend_quick() {
    let out = run(&[
        "verify",
        "trend",
        "-d",
        "1",
        "-k",
        "4",
        "--grid",
        "6,8",
        "--samples",
        "40",
        "--seed",
        "2",
    ]);
    assert!(out.status.success(), "{out:?}");
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["verdict"], "pass");
}

#[test]
fn threads_flag_does_not_change_results() {
    let base = run(&[
        "verify",
        "links",
        "-n",
        "5",
        "-d",
        "2",
        "--samples",
        "4000",
        "--seed",
        "11",
    ]);
    let threaded = run(&[
        "--threads",
        "3",
        "verify",
        "links",
        "-n",
        "5",
        "-d",
        "2",
        "--samples",
        "4000",
        "--seed",
        "11",
    ]);
    assert!(base.status.success() && threaded.status.success());
    let mut ja: serde_json::Value = serde_json::from_str(&stdout(&base)).unwrap();
    let mut jb: serde_json::Value = serde_json::from_str(&stdout(&threaded)).unwrap();
    for j in [&mut ja, &mut jb] {
        for r in j.as_array_mut().unwrap() {
            r["wall_time_ms"] = 0.into();
            r["params"]["config"]["threads"] = serde_json::Value::Null;
        }
    }
    assert_eq!(ja, jb);
}

#[test]
fn caps_env_variable_is_honored() {
    let out = hypertree()
        .env("HYPERTREE_CAPS", "enum=10")
        .args(["verify", "measure", "-n", "5", "-d", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(Path::new(env!("CARGO_BIN_EXE_hypertree")).exists());
}
