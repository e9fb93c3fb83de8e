//! End-to-end CLI checks: byte-identical reruns (criterion 9), file formats, and
//! exit-code contracts.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geomtree"))
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = bin().args(args).current_dir(dir).output().expect("spawn geomtree");
    assert!(
        out.status.success(),
        "geomtree {args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Sweep rows with the wallclock column blanked: timing is measured, everything
/// else must reproduce byte for byte.
fn mask_wallclock(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut f: Vec<&str> = line.split(',').collect();
            if f.len() == 11 && f[8].chars().all(|c| c.is_ascii_digit()) {
                f[8] = "-";
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_9_cli_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // gen-tree twice
    run_ok(&["gen-tree", "--kind", "binary", "--height", "5", "--out", "t1.json"], d);
    run_ok(&["gen-tree", "--kind", "binary", "--height", "5", "--out", "t2.json"], d);
    let t1 = std::fs::read(d.join("t1.json")).unwrap();
    let t2 = std::fs::read(d.join("t2.json")).unwrap();
    assert_eq!(t1, t2, "gen-tree must be byte-identical across reruns");

    run_ok(
        &["gen-tree", "--kind", "random", "--n", "40", "--delta", "4", "--seed", "9", "--out", "r1.json"],
        d,
    );
    run_ok(
        &["gen-tree", "--kind", "random", "--n", "40", "--delta", "4", "--seed", "9", "--out", "r2.json"],
        d,
    );
    assert_eq!(
        std::fs::read(d.join("r1.json")).unwrap(),
        std::fs::read(d.join("r2.json")).unwrap()
    );

    // embed twice (resampling strategy)
    for out in ["e1.csv", "e2.csv"] {
        run_ok(
            &[
                "embed", "--tree", "t1.json", "--norm", "lp:2", "--seed", "5", "--strategy",
                "mt", "--out", out,
            ],
            d,
        );
    }
    let e1 = std::fs::read(d.join("e1.csv")).unwrap();
    let e2 = std::fs::read(d.join("e2.csv")).unwrap();
    assert_eq!(e1, e2, "embedding files must be byte-identical across reruns");

    // sweep twice; body identical modulo the measured wallclock column
    let config = serde_json::json!({
        "norms": ["lp:inf"],
        "n_grid": [31],
        "delta_grid": [3],
        "m_grid": [12],
        "mode": "practical",
        "trials": 2,
        "master_seed": 17,
        "tree_kind": "binary"
    });
    std::fs::write(d.join("sweep.json"), serde_json::to_string_pretty(&config).unwrap()).unwrap();
    run_ok(&["sweep", "--config", "sweep.json", "--out", "s1.csv"], d);
    run_ok(&["sweep", "--config", "sweep.json", "--out", "s2.csv"], d);
    let s1 = std::fs::read_to_string(d.join("s1.csv")).unwrap();
    let s2 = std::fs::read_to_string(d.join("s2.csv")).unwrap();
    assert_eq!(mask_wallclock(&s1), mask_wallclock(&s2), "sweep bodies must reproduce");
    assert!(s1.lines().next().unwrap().starts_with("norm,N,delta,m,mode,seed,success"));
    assert_eq!(s1.lines().count(), 3, "header + one row per trial");
}

#[test]
fn verify_cli_accepts_its_own_embeddings_and_rejects_bad_maps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["gen-tree", "--kind", "binary", "--height", "4", "--out", "t.json"], d);
    run_ok(
        &["embed", "--tree", "t.json", "--norm", "lp:1", "--seed", "3", "--strategy", "mt", "--out", "e.csv"],
        d,
    );
    let stdout = run_ok(
        &[
            "verify", "--tree", "t.json", "--embedding", "e.csv", "--margin", "1e-9",
            "--report", "rep.json",
        ],
        d,
    );
    assert!(stdout.contains("\"embeds\":true") || stdout.contains("\"embeds\": true"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("rep.json")).unwrap()).unwrap();
    assert_eq!(report["edge_violations"].as_array().unwrap().len(), 0);

    // A map that collapses everything to the origin violates every non-edge.
    let n = 31; // matches the height-4 binary tree
    let mut bad = String::from("# n=31, m=2, norm=lp:2, seed=0, mode=practical\n");
    for v in 0..n {
        bad.push_str(&format!("{v},0,0\n"));
    }
    std::fs::write(d.join("bad.csv"), bad).unwrap();
    let out = bin()
        .args(["verify", "--tree", "t.json", "--embedding", "bad.csv", "--norm", "lp:2"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "violations must exit nonzero");
}

#[test]
fn check_cli_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["gen-tree", "--kind", "part-a", "--delta", "3", "--n", "40", "--out", "pa.json"], d);

    let out = run_ok(&["check", "--what", "claim42", "--tree", "pa.json", "--delta", "3"], d);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);

    let out = run_ok(&["check", "--what", "lll-condition", "--N", "1000", "--delta", "3"], d);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["holds"], serde_json::json!(false), "desk scale fails condition (c)");

    // The N0 search twice: identical reports (criterion 10 at the CLI surface).
    let a = run_ok(&["check", "--what", "lll-condition", "--find-n0", "--delta", "3"], d);
    let b = run_ok(&["check", "--what", "lll-condition", "--find-n0", "--delta", "3"], d);
    assert_eq!(a, b);

    let out = run_ok(&["check", "--lemma", "3.1", "--p", "2", "--m-list", "1,2,8,64"], d);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["bounded"], serde_json::json!(true));

    let out = run_ok(
        &[
            "check", "--lemma", "cases", "--tree", "pa.json", "--norm", "lp:2", "--dim", "8",
            "--trials", "2000", "--seed", "4",
        ],
        d,
    );
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4, "one report per distance regime");

    // Packing certificate rider.
    let out = run_ok(
        &[
            "check", "--lemma", "3.1", "--p", "2", "--m-list", "4", "--N", "1000000",
            "--claimed-m", "2", "--delta", "3",
        ],
        d,
    );
    assert!(out.contains("\"below_bound\": true"));
    assert!(out.contains("\"volume_inequality_violated\": true"));
    assert!(out.contains("part-a"));
}

#[test]
fn embed_cli_draw_strategy_and_mode_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["gen-tree", "--kind", "path", "--n", "12", "--out", "p.json"], d);
    run_ok(
        &["embed", "--tree", "p.json", "--norm", "lp:inf", "--dim", "6", "--seed", "2", "--out", "draw.csv"],
        d,
    );
    let text = std::fs::read_to_string(d.join("draw.csv")).unwrap();
    assert!(text.starts_with("# n=12, m=6, norm=lp:inf, seed=2, mode=practical"));
    assert!(text.lines().nth(1).unwrap().starts_with("# params: delta="));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12);

    // Theory mode rejects overrides.
    let out = bin()
        .args([
            "embed", "--tree", "p.json", "--norm", "lp:2", "--mode", "theory", "--dim", "4",
            "--seed", "1", "--out", "x.csv",
        ])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(!out.status.success());
}
