//! Runs the full suite twice against one cache (cold, then warm) and prints
//! one verdict line per criterion.

use std::fs;
use std::process::{Command, ExitCode};

use serde_json::Value;

fn run_suite(cache: &std::path::Path, out: &std::path::Path) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_polyharm"))
        .args(["suite", "--out"])
        .arg(out)
        .env("POLYHARM_CACHE_DIR", cache)
        .status()
        .expect("suite runs")
        .code()
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("tempdir");
    let cache = dir.path().join("cache");
    let cold = dir.path().join("cold.json");
    let warm = dir.path().join("warm.json");
    let cold_code = run_suite(&cache, &cold);
    let warm_code = run_suite(&cache, &warm);

    let cold_bytes = fs::read(&cold).expect("cold report");
    let warm_bytes = fs::read(&warm).expect("warm report");
    let report: Value = serde_json::from_slice(&cold_bytes).expect("report is JSON");
    let criteria = report["criteria"].as_array().expect("criteria array");

    let mut failures = 0;
    for c in criteria {
        let id = c["id"].as_str().unwrap_or("?");
        let title = c["title"].as_str().unwrap_or("");
        let mut pass = c["status"] == "pass";
        let mut note = String::new();
        if id == "C10" {
            let identical = cold_bytes == warm_bytes;
            pass &= identical;
            note = format!(" (cold/warm reports identical: {identical})");
        }
        if !pass {
            failures += 1;
            if let Some(checks) = c["checks"].as_array() {
                for ch in checks.iter().filter(|ch| ch["pass"] != true) {
                    note.push_str(&format!("\n    {}", ch["name"].as_str().unwrap_or("")));
                }
            }
            if let Some(r) = c["reason"].as_str() {
                note.push_str(&format!("\n    {r}"));
            }
        }
        println!("{} {id} {title}{note}", if pass { "PASS" } else { "FAIL" });
    }
    println!("suite exit codes: cold {cold_code:?}, warm {warm_code:?}");
    if failures == 0 && cold_code == Some(0) && warm_code == Some(0) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
