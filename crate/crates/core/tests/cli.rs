use std::path::Path;
use std::process::{Command, Output};

use erasure_welch::bounds::{BoundReport, EqualityClass};
use erasure_welch::Frame;
use tempfile::TempDir;

fn ewb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewb"))
        .args(args)
        .env_remove("EWB_DEFAULT_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let out = path(dir, name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &out]);
    let o = ewb(&full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn construct_simplex_writes_frame_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "mb.json");
    let o = ewb(&["construct", "simplex", "--m", "2", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("UTF=true ETF=true"));
    let (frame, meta) = Frame::load(Path::new(&out)).unwrap();
    assert_eq!((frame.m(), frame.n()), (2, 3));
    assert_eq!(meta.unwrap().construction, "simplex");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"]["command"], "construct");
    assert!(manifest["timestamp"].is_string());
}

#[test]
fn harmonic_rejects_invalid_q() {
    let dir = TempDir::new().unwrap();
    let o = ewb(&[
        "construct",
        "harmonic",
        "--q",
        "5",
        "--out",
        &path(&dir, "h.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q must be prime ≡ 3 (mod 4)"));
}

#[test]
fn random_construction_is_deterministic_and_reads_env_seed() {
    let dir = TempDir::new().unwrap();
    let a = construct(
        &dir,
        "a.json",
        &["random", "--m", "3", "--n", "7", "--seed", "11"],
    );
    let b = construct(
        &dir,
        "b.json",
        &["random", "--m", "3", "--n", "7", "--seed", "11"],
    );
    let c = path(&dir, "c.json");
    let o = Command::new(env!("CARGO_BIN_EXE_ewb"))
        .args(["construct", "random", "--m", "3", "--n", "7", "--out", &c])
        .env("EWB_DEFAULT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let read = |p: &str| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));

    let missing = ewb(&[
        "construct",
        "random",
        "--m",
        "3",
        "--n",
        "7",
        "--out",
        &path(&dir, "d.json"),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn brute_moments_of_mercedes_benz() {
    let dir = TempDir::new().unwrap();
    let mb = construct(&dir, "mb.json", &["simplex", "--m", "2"]);
    let o = ewb(&[
        "moments", "--frame", &mb, "--p", "0.5", "--d", "4,2,3", "--method", "brute",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,d,method,value,stderr"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![0.625, 0.84375, 1.1875]);
    assert!(stderr(&o).starts_with("manifest: "));
}

#[test]
fn moment_methods_refuse_out_of_range_requests() {
    let dir = TempDir::new().unwrap();
    let big = construct(
        &dir,
        "big.json",
        &["random", "--m", "2", "--n", "25", "--seed", "1"],
    );
    let o = ewb(&[
        "moments", "--frame", &big, "--p", "0.5", "--d", "2", "--method", "brute",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n <= 24"));
    let o = ewb(&["moments", "--frame", &big, "--p", "0.5", "--d", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ewb(&[
        "moments", "--frame", &big, "--p", "0.5", "--d", "2", "--method", "mc", "--trials", "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn montecarlo_moments_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "h.json", &["harmonic", "--q", "7"]);
    let args = [
        "moments", "--frame", &f, "--p", "0.3,0.6", "--d", "2,4", "--method", "mc", "--trials",
        "500", "--seed", "9",
    ];
    let (a, b) = (ewb(&args), ewb(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn bound_reports_classify_equality() {
    let dir = TempDir::new().unwrap();
    let onb = construct(
        &dir,
        "onb.json",
        &["repeated-onb", "--m", "2", "--copies", "2"],
    );
    let out = path(&dir, "bound.json");
    let o = ewb(&[
        "bound", "--frame", &onb, "--p", "0.5", "--d", "2,3,4", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<BoundReport> =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let classes: Vec<_> = reports.iter().map(|r| r.equality_class).collect();
    assert_eq!(
        classes,
        vec![
            EqualityClass::UtfEquality,
            EqualityClass::UtfEquality,
            EqualityClass::Strict
        ]
    );
    assert_eq!(
        reports[0].frame.as_ref().unwrap().construction,
        "repeated-onb"
    );
}

#[test]
fn tampered_frame_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let mb = construct(&dir, "mb.json", &["simplex", "--m", "2"]);
    let text = std::fs::read_to_string(&mb).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["data"][0] = serde_json::json!(0.9);
    std::fs::write(&mb, v.to_string()).unwrap();
    let o = ewb(&["bound", "--frame", &mb, "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("norm"));
}

#[test]
fn manova_tables() {
    let o = ewb(&[
        "manova",
        "--gamma",
        "0.5",
        "--p",
        "0.5",
        "--density",
        "--points",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# gamma="));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].1, 0.0);
    assert_eq!(rows[10].1, 0.0);
    assert!(rows[1..10].iter().all(|r| r.1 > 0.0));

    let o = ewb(&["manova", "--gamma", "0.5", "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ewb(&["manova", "--gamma", "0.5", "--p", "1", "--density"]);
    assert!(stdout(&o).contains("atomic-only"));
    assert_eq!(stdout(&o).lines().last(), Some("t,density"));

    let o = ewb(&[
        "manova",
        "--gamma",
        "0.6666666666666666",
        "--p",
        "0.5",
        "--d",
        "2,4",
    ]);
    let text = stdout(&o);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[2], "4");
    let abs_err: f64 = last[5].parse().unwrap();
    assert!(abs_err < 1e-6);

    let o = ewb(&["manova", "--gamma", "1.5", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_and_records_failures() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    for out in [&a, &b] {
        let o = ewb(&[
            "sweep", "--family", "random", "--m", "3", "--n", "6", "--seeds", "3", "--seed", "4",
            "--p", "0.5,0.2", "--d", "2,4", "--trials", "50", "--out", out,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("random,3,3,6,4,2.0000000000000001e-1,2,"));

    let o = ewb(&[
        "sweep", "--family", "harmonic", "--values", "7,5", "--p", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("q must be prime"));
    assert!(text.contains("ETF-equality"));
    assert!(stderr(&o).contains("failed"));
}

#[test]
fn sweep_rejects_empty_grid() {
    let o = ewb(&["sweep", "--family", "simplex", "--values", "3", "--p", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_and_ks_outputs() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "h.json", &["harmonic", "--q", "11"]);
    let o = ewb(&[
        "spectrum", "--frame", &f, "--p", "1", "--trials", "2", "--seed", "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("trial_index,eigenvalue"));
    assert_eq!(text.lines().count(), 1 + 2 * 11);

    let o = ewb(&[
        "ks", "--frame", &f, "--p", "0.5", "--trials", "50", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = report["distance"].as_f64().unwrap();
    assert!(d > 0.0 && d < 1.0);
    assert_eq!(report["seed"], 3);
}
