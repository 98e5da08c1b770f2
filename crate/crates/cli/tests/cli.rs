use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use chrono::NaiveDate;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_leadtime-lab"));
    c.env_remove("LEADTIME_LAB_THREADS").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario_spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/scenarios").join(name)
}

fn field(out: &str, key: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {out}"));
    line.split_whitespace().last().unwrap().parse().unwrap()
}

const HEADER: &str = "booking_date,checkin_date,nights,city,corridor,travel_type\n";

#[test]
fn bound_prints_six_significant_digits() {
    let o = run(&["bound", "--d", "0.2156", "--delta", "17", "--delta-max", "30", "--c-hist", "0.69"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.270802\n");
    let o = run(&["bound", "--d", "0.5", "--delta", "30", "--delta-max", "30", "--c-hist", "0.69"]);
    assert_eq!(stdout(&o), "0.00000\n");
}

#[test]
fn version_carries_the_fixture_hash() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("fixtures sha256:"), "{text}");
}

#[test]
fn generators_require_a_seed() {
    for args in [
        vec!["simulate", "bville"],
        vec!["simulate", "scenario", "--spec", scenario_spec("control.json").to_str().unwrap()],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    }
}

#[test]
fn json_errors_are_machine_readable() {
    let o = run(&["--json-errors", "simulate", "bville"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["code"], 1);
    assert_eq!(v["error"]["kind"], "input");

    let o = run(&["--json-errors", "bound", "--d", "0.2", "--delta", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "input");
}

#[test]
fn bad_rows_exit_one_with_row_details() {
    let body = format!("{HEADER}2020-01-01,2020-01-10,2,Faro,destination,domestic\n2020-01-05,2020-01-01,2,Faro,destination,domestic\n");
    let o = run_with_stdin(&["--json-errors", "ingest-check"], body.as_bytes());
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["details"]["row"], 2);
    assert_eq!(v["error"]["details"]["field"], "checkin_date");

    let o = run_with_stdin(&["ingest-check", "--lenient"], body.as_bytes());
    assert!(o.status.success());
    assert!(stdout(&o).contains("invalid 1"));
}

#[test]
fn computation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    std::fs::write(
        &series,
        "month,market,mode,value\n2020-01,Faro/destination/domestic,yoy,0.1\n2020-02,Faro/destination/domestic,yoy,0.2\n",
    )
    .unwrap();
    let o = run(&["stl", "-i", series.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bville_pickup_lands_in_the_band() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["simulate", "bville", "--seed", "724163", "--out-dir", d]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().last().unwrap(), "within_bands true");
    assert!((field(&out, "rel_error_17") + 0.1188).abs() < 1e-4, "{out}");
    let hist = dir.path().join("year1.csv");
    let actual = dir.path().join("year2.csv");
    let o = run(&[
        "pickup",
        "--hist",
        hist.to_str().unwrap(),
        "--actual",
        actual.to_str().unwrap(),
        "--total",
        "1200",
        "--at",
        "17",
    ]);
    assert!(o.status.success());
    let row = stdout(&o);
    let cells: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    let err: f64 = cells[4].parse().unwrap();
    assert!((-0.15..=-0.10).contains(&err), "{row}");
    let bound: f64 = cells[5].parse().unwrap();
    assert!(err.abs() <= bound);
}

#[test]
fn figure1_pair_has_equal_moments() {
    let o = run(&["simulate", "figure1"]);
    let out = stdout(&o);
    assert!(out.starts_with("mean 188.000 188.000\nsd 30.0000 30.0000\nl1 0.250000\n"), "{out}");
}

#[test]
fn simulate_pipes_into_analyze() {
    let spec = scenario_spec("small_multi_market.json");
    let gen = run(&["simulate", "scenario", "--spec", spec.to_str().unwrap(), "--seed", "5"]);
    assert!(gen.status.success());
    let again = run(&["simulate", "scenario", "--spec", spec.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(gen.stdout, again.stdout);

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let mut child = bin()
            .env("LEADTIME_LAB_THREADS", threads)
            .args(["analyze", "--output-dir", dir.path().to_str().unwrap(), "--verify", "40"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(&gen.stdout).unwrap();
        let o = child.wait_with_output().unwrap();
        assert!(o.status.success());
        let out = stdout(&o);
        assert!(out.contains("markets 3"), "{out}");
        assert!(out.contains(", 0 mismatches"), "{out}");
    }
    let manifest = std::fs::read(a.path().join("manifest.json")).unwrap();
    assert_eq!(manifest, std::fs::read(b.path().join("manifest.json")).unwrap());
    let m: serde_json::Value = serde_json::from_slice(&manifest).unwrap();
    for f in m["files"].as_array().unwrap() {
        let rel = f["path"].as_str().unwrap();
        assert_eq!(
            std::fs::read(a.path().join(rel)).unwrap(),
            std::fs::read(b.path().join(rel)).unwrap(),
            "{rel}"
        );
    }
}

#[test]
fn bad_thread_cap_is_an_input_error() {
    let o = bin().env("LEADTIME_LAB_THREADS", "zero").args(["bound", "--d", "0.1", "--delta", "1", "--delta-max", "2", "--c-hist", "0.5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_year_gives_zero_divergence() {
    let mut body = String::from(HEADER);
    for (lead, nights) in [(3, 2), (10, 1), (25, 4), (40, 1)] {
        for year in [2019, 2020] {
            for month in 1..=12 {
                let checkin = NaiveDate::from_ymd_opt(year, month, 15).unwrap();
                let booked = checkin - chrono::Duration::days(lead);
                body.push_str(&format!("{booked},{checkin},{nights},Faro,destination,domestic\n"));
            }
        }
    }
    let o = run_with_stdin(&["divergence"], body.as_bytes());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let values: Vec<f64> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 12);
    assert!(values.iter().all(|v| *v == 0.0), "{out}");
}
