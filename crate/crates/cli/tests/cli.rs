use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clocklab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("clocklab-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn bounds_prints_named_values() {
    let o = run(&[
        "bounds",
        "--q",
        "64",
        "--beta",
        "1.5",
        "--case",
        "od",
        "--frustrated",
        "16",
        "--disordered",
        "40",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["ln_upper", "ln_ratio", "a_q"] {
        assert!(
            s.lines().any(|l| l.starts_with(&format!("{name} = "))),
            "{name} missing in\n{s}"
        );
    }
    let bad = run(&["bounds", "--q", "16", "--beta", "1", "--case", "glued"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("domain"));
}

#[test]
fn toy_check_passes() {
    let o = run(&["toy-check", "--r", "3", "--trials", "20"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("exact = 20"));
}

#[test]
fn verify_lemmas_writes_rows() {
    let d = tmp("lemmas");
    let out = d.join("rows.csv");
    let o = run(&[
        "verify-lemmas",
        "--lmax",
        "1",
        "--n",
        "2",
        "--shard",
        "1/2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("pattern,d,floor,class"));
    assert!(text.lines().count() > 1);
    assert!(stdout(&o).contains("identity_failures = 0"));
    assert_eq!(run(&["verify-lemmas", "--shard", "2/2"]).status.code(), Some(2));
    fs::remove_dir_all(&d).unwrap();
}

#[test]
fn simulate_then_analyze_and_defects() {
    let d = tmp("sim");
    let csv = d.join("chain.csv");
    let snaps = d.join("snaps");
    let o = run(&[
        "simulate",
        "--n",
        "4",
        "--l",
        "4",
        "--q",
        "64",
        "--beta",
        "3",
        "--sweeps",
        "10",
        "--thin",
        "5",
        "--start",
        "cold",
        "--out",
        csv.to_str().unwrap(),
        "--snapshot-every",
        "10",
        "--snapshot-dir",
        snaps.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sweep,energy,ordered_fraction,rigidity_fraction,n_interface_components,height_mode"
    );
    assert_eq!(text.lines().count(), 3);
    let snap = snaps.join("sweep-00000010.txt");
    assert!(snap.exists());

    let an = d.join("analysis.csv");
    let hm = d.join("heights.txt");
    let o = run(&[
        "analyze",
        "--in",
        snap.to_str().unwrap(),
        "--out",
        an.to_str().unwrap(),
        "--heightmap",
        hm.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&an)
        .unwrap()
        .starts_with("surface_size,weight,n_ceilings"));
    assert_eq!(fs::read_to_string(&hm).unwrap().lines().count(), 4);

    let df = d.join("defects.csv");
    let o = run(&["defects", "--in", snap.to_str().unwrap(), "--out", df.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&df)
        .unwrap()
        .starts_with("x,y,blob_count,blob_types"));
    fs::remove_dir_all(&d).unwrap();
}

#[test]
fn experiment_replay_and_scan() {
    let d = tmp("exp");
    let plan = d.join("plan.in");
    fs::write(
        &plan,
        "[grid]\nn = 4\nl = 3\nq = 64\nbeta = 1, 3\n[chain]\nseeds = 1, 2\nsweeps = 10\nthin = 2\n",
    )
    .unwrap();
    let out = d.join("out");
    let o = bin()
        .args(["--threads", "1", "experiment", "--plan", plan.to_str().unwrap()])
        .env("CLOCKLAB_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = out.join("results.csv");
    assert!(fs::read_to_string(&results)
        .unwrap()
        .starts_with("# clocklab-results v1\n"));

    let o = run(&["replay", "--dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let table = d.join("peierls.csv");
    let o = run(&[
        "peierls-scan",
        "--results",
        results.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("n=4")).count(), 2);
    assert!(fs::read_to_string(&table)
        .unwrap()
        .starts_with("n,l,q,beta,samples,w,exceedance"));
    fs::remove_dir_all(&d).unwrap();
}
