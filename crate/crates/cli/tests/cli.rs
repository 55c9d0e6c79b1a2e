use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dyngossip::model::io::{matrix_to_json, schedule_from_json, sequence_from_json};
use dyngossip::{TokenId, TokenMatrix};
use dyngossip_cli::run_cli_with;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dyngossip").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_connected_rounds() {
    let dir = TempDir::new().unwrap();
    let seq = path(&dir, "seq.json");
    let (code, _, err) = run(&[
        "gen",
        "--model",
        "gnp",
        "--p",
        "0.1",
        "--n",
        "64",
        "--rounds",
        "500",
        "--seed",
        "1",
        "--out",
        s(&seq),
    ]);
    assert_eq!(code, 0, "{err}");
    let parsed = sequence_from_json(&fs::read_to_string(&seq).unwrap()).unwrap();
    assert_eq!(parsed.recorded_len(), Some(500));
    assert!((1..=500).all(|r| parsed.graph(r).unwrap().is_connected()));
}

#[test]
fn lowerbound_record_has_the_expected_fields() {
    let dir = TempDir::new().unwrap();
    let rec = path(&dir, "rec.json");
    let (code, _, err) = run(&[
        "lowerbound",
        "--n",
        "64",
        "--k",
        "64",
        "--algo",
        "rr",
        "--seed",
        "7",
        "--out",
        s(&rec),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rec).unwrap()).unwrap();
    for field in [
        "config",
        "rounds_used",
        "completed",
        "initial_missing",
        "max_useful_exchanges",
        "bound_rounds",
        "metrics",
    ] {
        assert!(v.get(field).is_some(), "missing {field}");
    }
    assert_eq!(v["config"]["n"], 64);
    assert_eq!(v["config"]["strategy"], "round_robin");
    assert_eq!(
        v["metrics"].as_array().unwrap().len() as u64,
        v["rounds_used"].as_u64().unwrap()
    );
}

#[test]
fn offline_on_complete_input_is_empty() {
    let dir = TempDir::new().unwrap();
    let (seq, init, sched) = (
        path(&dir, "seq.json"),
        path(&dir, "dist.json"),
        path(&dir, "sched.json"),
    );
    assert_eq!(
        run(&[
            "gen",
            "--model",
            "path",
            "--n",
            "6",
            "--rounds",
            "3",
            "--out",
            s(&seq)
        ])
        .0,
        0
    );
    fs::write(&init, matrix_to_json(&TokenMatrix::full(6, 4)).unwrap()).unwrap();
    let (code, _, err) = run(&[
        "offline",
        "--seq",
        s(&seq),
        "--init",
        s(&init),
        "--out",
        s(&sched),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(schedule_from_json(&fs::read_to_string(&sched).unwrap(), 6)
        .unwrap()
        .is_empty());
}

#[test]
fn offline_and_gather_schedules_replay() {
    let dir = TempDir::new().unwrap();
    let (seq, init) = (path(&dir, "seq.json"), path(&dir, "dist.json"));
    assert_eq!(
        run(&[
            "gen",
            "--n",
            "20",
            "--rounds",
            "400",
            "--seed",
            "3",
            "--out",
            s(&seq)
        ])
        .0,
        0
    );
    assert_eq!(
        run(&[
            "dist",
            "--n",
            "20",
            "--k",
            "8",
            "--kind",
            "one-per-node",
            "--seed",
            "3",
            "--out",
            s(&init)
        ])
        .0,
        0
    );
    let sched = path(&dir, "sched.json");
    let log = path(&dir, "log.json");
    let (code, _, err) = run(&[
        "offline",
        "--seq",
        s(&seq),
        "--init",
        s(&init),
        "--out",
        s(&sched),
        "--log",
        s(&log),
    ]);
    assert_eq!(code, 0, "{err}");
    let log: serde_json::Value = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(log["fallback_used"], false);

    let g = path(&dir, "gather.json");
    let (code, _, err) = run(&[
        "gather",
        "--seq",
        s(&seq),
        "--init",
        s(&init),
        "--target",
        "4",
        "--out",
        s(&g),
    ]);
    assert_eq!(code, 0, "{err}");
    let sched = schedule_from_json(&fs::read_to_string(&g).unwrap(), 20).unwrap();
    assert!(sched.len() <= 28);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["gen", "--n", "4"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("lowerbound"));
    assert_eq!(
        run(&[
            "lowerbound",
            "--n",
            "4",
            "--k",
            "2",
            "--algo",
            "psychic",
            "--out",
            "/dev/null"
        ])
        .0,
        1
    );
    assert_eq!(
        run(&[
            "offline",
            "--seq",
            "/nonexistent.json",
            "--init",
            "/nonexistent.json",
            "--out",
            "/dev/null"
        ])
        .0,
        1
    );
}

#[test]
fn contract_violations_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let seq = path(&dir, "split.json");
    fs::write(&seq, r#"{"n":4,"rounds":[[[0,1],[2,3]]]}"#).unwrap();
    let init = path(&dir, "dist.json");
    let mut rows = vec![vec![]; 4];
    rows[0].push(TokenId(0));
    fs::write(
        &init,
        matrix_to_json(&TokenMatrix::from_holders(4, 1, &rows).unwrap()).unwrap(),
    )
    .unwrap();
    let (code, _, err) = run(&[
        "offline",
        "--seq",
        s(&seq),
        "--init",
        s(&init),
        "--out",
        s(&path(&dir, "x.json")),
    ]);
    assert_eq!(code, 2, "{err}");

    // A one-round sequence cannot carry a token across a 4-node path.
    let short = path(&dir, "short.json");
    assert_eq!(
        run(&[
            "gen",
            "--model",
            "path",
            "--n",
            "4",
            "--rounds",
            "1",
            "--out",
            s(&short)
        ])
        .0,
        0
    );
    let (code, _, err) = run(&[
        "offline",
        "--seq",
        s(&short),
        "--init",
        s(&init),
        "--out",
        s(&path(&dir, "y.json")),
    ]);
    assert_eq!(code, 2, "{err}");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn every_subcommand(dir: &Path) {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "gen",
            "--n",
            "16",
            "--rounds",
            "600",
            "--seed",
            "5",
            "--out",
            &p("seq.json"),
        ],
        vec![
            "dist",
            "--n",
            "16",
            "--k",
            "6",
            "--kind",
            "one-per-node",
            "--seed",
            "5",
            "--out",
            &p("dist.json"),
        ],
        vec![
            "dist",
            "--n",
            "16",
            "--k",
            "6",
            "--seed",
            "5",
            "--out",
            &p("dense.json"),
        ],
        vec![
            "simulate",
            "--init",
            &p("dense.json"),
            "--algo",
            "uniform",
            "--seed",
            "5",
            "--out",
            &p("tr.json"),
            "--csv",
            &p("tr.csv"),
        ],
        vec![
            "simulate",
            "--init",
            &p("dist.json"),
            "--seq",
            &p("seq.json"),
            "--algo",
            "rarest",
            "--out",
            &p("obl.json"),
        ],
        vec![
            "offline",
            "--seq",
            &p("seq.json"),
            "--init",
            &p("dist.json"),
            "--seed",
            "5",
            "--out",
            &p("s1.json"),
            "--log",
            &p("l1.json"),
        ],
        vec![
            "offline",
            "--seq",
            &p("seq.json"),
            "--init",
            &p("dist.json"),
            "--mode",
            "derandomized",
            "--out",
            &p("s2.json"),
            "--log",
            &p("l2.json"),
        ],
        vec![
            "gather",
            "--seq",
            &p("seq.json"),
            "--init",
            &p("dist.json"),
            "--target",
            "3",
            "--start",
            "2",
            "--out",
            &p("g.json"),
        ],
        vec![
            "derandomize",
            "--seq",
            &p("seq.json"),
            "--k",
            "6",
            "--out",
            &p("d.json"),
        ],
        vec![
            "lowerbound",
            "--n",
            "12",
            "--k",
            "6",
            "--algo",
            "uniform",
            "--seed",
            "5",
            "--out",
            &p("lb.json"),
            "--csv",
            &p("lb.csv"),
            "--transcript",
            &p("lbt.json"),
        ],
        vec![
            "--config-out",
            &p("cfg.json"),
            "lowerbound",
            "--n",
            "12",
            "--k",
            "6",
            "--trials",
            "6",
            "--out",
            &p("batch.json"),
            "--csv",
            &p("batch.csv"),
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, _, err) = run(&refs);
        assert_eq!(code, 0, "{args:?}: {err}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    every_subcommand(a.path());
    every_subcommand(b.path());
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.len(), 18);
    for ((na, ba), (nb, bb)) in sa.iter().zip(&sb) {
        assert_eq!(na, nb);
        if na == "cfg.json" {
            continue; // records its own directory
        }
        assert!(ba == bb, "{na} differs between runs");
    }
}

#[test]
fn batch_output_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("rows{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_dyngossip"))
            .args([
                "lowerbound",
                "--n",
                "10",
                "--k",
                "5",
                "--trials",
                "8",
                "--seed",
                "2",
            ])
            .arg("--out")
            .arg(dir.path().join("rows.json"))
            .arg("--csv")
            .arg(&csv)
            .env("DYNGOSSIP_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read_to_string(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with("n,k,seed,rounds_used,init_missing,max_useful,bound\n"));
    assert_eq!(outputs[0].lines().count(), 9);
}
