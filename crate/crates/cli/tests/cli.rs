use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn rvcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvcap"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = rvcap(dir, args);
    assert!(
        out.status.success(),
        "rvcap {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn simulated(dir: &Path, days: &str, seed: &str) {
    ok(
        dir,
        &[
            "simulate",
            "--days",
            days,
            "--seed",
            seed,
            "--sigma",
            "0.01",
            "--out",
            "prices.csv",
        ],
    );
}

#[test]
fn simulate_then_report_normal_column() {
    let dir = tempfile::tempdir().unwrap();
    simulated(dir.path(), "500", "7");
    ok(
        dir.path(),
        &[
            "report",
            "--input",
            "prices.csv",
            "--format",
            "json",
            "--out",
            "report.json",
        ],
    );
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let capital = &doc["capital"];
    let sigma = capital["sigma_hat_used"].as_f64().unwrap();
    assert!((sigma - 0.01).abs() < 0.001, "sigma_hat {sigma}");
    let row = capital["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["probability"].as_f64() == Some(0.95))
        .unwrap();
    let g = row["gaussian"].as_f64().unwrap();
    assert!((g / (1.645 * sigma) - 1.0).abs() < 0.10);
    assert!((g / (1.645 * 0.01) - 1.0).abs() < 0.10);
    assert_eq!(doc["days"], 500);
    assert_eq!(doc["measures"].as_array().unwrap().len(), 8);
    assert!(dir.path().join("report.json.manifest.json").exists());
}

#[test]
fn missing_input_reports_io_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvcap(dir.path(), &["report", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("error: io.not_found: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn report_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    simulated(dir.path(), "450", "11");
    let args = [
        "report",
        "--input",
        "prices.csv",
        "--horizon",
        "10",
        "--out",
        "r.txt",
        "--scatter-out",
        "s.csv",
    ];
    ok(dir.path(), &args);
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    let first = (read("r.txt"), read("s.csv"), read("r.txt.manifest.json"));
    ok(dir.path(), &args);
    assert_eq!(first, (read("r.txt"), read("s.csv"), read("r.txt.manifest.json")));

    // The manifest's config alone reproduces the run.
    std::fs::copy(dir.path().join("r.txt.manifest.json"), dir.path().join("m.json")).unwrap();
    std::fs::remove_file(dir.path().join("r.txt")).unwrap();
    ok(dir.path(), &["report", "--config", "m.json"]);
    assert_eq!(first.0, read("r.txt"));
    let text = String::from_utf8(first.0).unwrap();
    assert!(text.contains("Horizon 10 days"));
}

#[test]
fn stepwise_pipeline_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    simulated(p, "420", "5");
    ok(p, &["ingest", "--input", "prices.csv", "--out", "grid.csv"]);
    let grid = std::fs::read_to_string(p.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 420 * 114);
    assert!(grid.starts_with("date,slot,price,filled\n"));

    ok(p, &["rv", "--grid", "grid.csv", "--out-dir", "rv"]);
    let mut written: Vec<String> = std::fs::read_dir(p.join("rv"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    written.sort();
    assert_eq!(written.len(), 10, "{written:?}");
    assert!(written.contains(&"manifest.json".to_string()));
    assert!(written.contains(&"ln_sum_sqrt_abs.csv".to_string()));

    let stats = ok(
        p,
        &["stats", "--series", "rv/daily_return.csv", "--format", "json"],
    );
    let stats: Value = serde_json::from_slice(&stats.stdout).unwrap();
    assert_eq!(stats["summary"]["n"], 420);

    let cap = ok(
        p,
        &[
            "capital",
            "--returns",
            "rv/daily_return.csv",
            "--rstd",
            "rv/realized_std.csv",
            "--format",
            "json",
        ],
    );
    let cap: Value = serde_json::from_slice(&cap.stdout).unwrap();
    let rep = ok(p, &["report", "--grid", "grid.csv", "--format", "json"]);
    let rep: Value = serde_json::from_slice(&rep.stdout).unwrap();
    assert_eq!(cap, rep["capital"]);

    let mem = ok(p, &["memory", "--series", "rv/sum_abs.csv", "--format", "json"]);
    let mem: Value = serde_json::from_slice(&mem.stdout).unwrap();
    assert_eq!(mem, rep["memory"]);
}

#[test]
fn ingest_fixture_with_calendar() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("ftse_sample.csv");
    let cal = fixture("calendar.txt");
    let args = [
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--calendar",
        cal.to_str().unwrap(),
        "--intervals",
        "12",
        "--interval-minutes",
        "5",
        "--session-open",
        "08:00",
        "--out",
        "grid.csv",
    ];
    ok(dir.path(), &args);
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 4 * 13);
    assert!(grid.contains("2001-12-20,4,5188.1,1\n"));
    assert!(!grid.contains("2001-12-24"));

    let manifest: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("grid.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config"]["ingest"]["session_open"], "08:00");

    let mut strict = args.to_vec();
    strict.extend(["--fill", "fail_on_gap"]);
    let out = rvcap(dir.path(), &strict);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: data.gap: "));
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let bad_flag = rvcap(p, &["stats", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    assert!(stderr(&bad_flag).starts_with("error: usage."));

    let mut flat = String::from("# label: flat\ndate,value\n");
    let start = chrono::NaiveDate::from_ymd_opt(2001, 2, 1).unwrap();
    for day in start.iter_days().take(120) {
        flat.push_str(&format!("{day},0.5\n"));
    }
    std::fs::write(p.join("flat.csv"), flat).unwrap();
    let numeric = rvcap(p, &["memory", "--series", "flat.csv"]);
    assert_eq!(numeric.status.code(), Some(3), "{}", stderr(&numeric));

    std::fs::write(p.join("broken.csv"), "date,value\n2001-02-01,abc\n").unwrap();
    let data = rvcap(p, &["stats", "--series", "broken.csv"]);
    assert_eq!(data.status.code(), Some(2));
    assert!(stderr(&data).starts_with("error: data."));

    let usage = rvcap(
        p,
        &[
            "capital",
            "--returns",
            "flat.csv",
            "--rstd",
            "flat.csv",
            "--horizon",
            "10",
        ],
    );
    assert_eq!(usage.status.code(), Some(1));

    std::fs::write(p.join("bad.toml"), "[capital]\nwindw = 3\n").unwrap();
    let cfg = rvcap(p, &["--config", "bad.toml", "stats", "--series", "flat.csv"]);
    assert_eq!(cfg.status.code(), Some(1));
    assert!(stderr(&cfg).starts_with("error: config.invalid: "));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    simulated(p, "300", "2");
    std::fs::write(p.join("run.toml"), "[capital]\nwindow = 10\nprobs = [0.99]\n").unwrap();
    ok(
        p,
        &[
            "rv",
            "--input",
            "prices.csv",
            "--out-dir",
            "rv",
            "--measures",
            "realized_std",
        ],
    );
    let out = ok(
        p,
        &[
            "--config",
            "run.toml",
            "capital",
            "--returns",
            "rv/daily_return.csv",
            "--rstd",
            "rv/realized_std.csv",
            "--window",
            "5",
            "--format",
            "json",
        ],
    );
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["window"], 5);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn fractional_noise_series_feeds_memory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "simulate",
            "--kind",
            "fractional_noise",
            "--d",
            "0.4",
            "--days",
            "1003",
            "--seed",
            "9",
            "--out",
            "fn.csv",
        ],
    );
    let out = ok(
        p,
        &[
            "memory",
            "--series",
            "fn.csv",
            "--format",
            "csv",
            "--scatter-out",
            "scatter.csv",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let d: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("d_gph,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((d - 0.4).abs() < 0.2, "d_gph {d}");
    let scatter = std::fs::read_to_string(p.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 41);
}
