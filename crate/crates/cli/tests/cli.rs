//! End-to-end tests driving the compiled `binsum` binary.

use std::path::Path;
use std::process::{Command, Output};

fn binsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binsum"))
        .args(args)
        .output()
        .expect("spawn binsum")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn sum_degenerate_coefficients_give_p() {
    let out = binsum(&["sum", "--p", "5", "--k", "1", "--n", "3", "--a", "0", "--b", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("|S| = 5 "), "{}", stdout(&out));
}

#[test]
fn sum_gauss_magnitude() {
    let out = binsum(&["sum", "--p", "7", "--k", "1", "--n", "2", "--a", "1", "--b", "1"]);
    assert!(out.status.success());
    // |S_{1,2}(1,1)| = sqrt(7) = 2.64575131106...
    assert!(stdout(&out).contains("|S| = 2.64575131106"), "{}", stdout(&out));
}

#[test]
fn composite_modulus_is_usage_error() {
    let out = binsum(&["sum", "--p", "9", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
}

#[test]
fn factor_f2_over_f5() {
    let out = binsum(&["factor", "--p", "5", "--n", "2"]);
    assert!(out.status.success());
    assert!(
        stdout(&out).contains("-2 * (X - 1) * (Y - 1)"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn factor_f4_over_f7_has_one_quadratic() {
    let out = binsum(&["factor", "--p", "7", "--n", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("min nontrivial degree 2"), "{text}");
}

#[test]
fn degenerate_family_is_usage_error() {
    let out = binsum(&["factor", "--p", "7", "--k", "3", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_counts_and_maxima_hold() {
    let out = binsum(&["verify", "--pmax", "13", "--k1-only", "--tasks", "count,max"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("all checks HOLD"), "{text}");
    assert!(text.contains("KARATSUBA"), "{text}");
}

#[test]
fn verify_factor_reproduction_small() {
    let out = binsum(&["verify", "--pmax", "13", "--all-kn", "--tasks", "factor"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("factorization summary"));
}

#[test]
fn cache_files_are_byte_identical_on_recompute() {
    let dir = std::env::temp_dir().join(format!("binsum-cache-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let cache = dir.to_str().unwrap();
    let args = ["sweep", "--pmax", "11", "--k1-only", "--tasks", "count", "--cache", cache];
    assert!(binsum(&args).status.success());
    let path = dir.join("p11_count.json");
    let first = std::fs::read(&path).expect("cache file written");
    // Recompute without the cache to force fresh bytes.
    std::fs::remove_file(&path).unwrap();
    assert!(binsum(&args).status.success());
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second);
    // A cached run leaves the file untouched.
    assert!(binsum(&args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), second);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn json_and_csv_emissions_agree() {
    let dir = std::env::temp_dir().join(format!("binsum-fmt-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let jdir = dir.join("json");
    let cdir = dir.join("csv");
    for (fmt, out) in [("json", &jdir), ("csv", &cdir)] {
        let status = binsum(&[
            "sweep", "--pmax", "11", "--all-kn", "--tasks", "count", "--format", fmt,
            "--out", out.to_str().unwrap(),
        ])
        .status;
        assert!(status.success());
    }
    let json: serde_json::Value = serde_json::from_slice(
        &std::fs::read(jdir.join("sweep_count.json")).unwrap(),
    )
    .unwrap();
    let records = json["records"].as_array().unwrap();
    let csv_text = std::fs::read_to_string(cdir.join("sweep_count.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(records) {
        for (h, field) in headers.iter().zip(row.iter()) {
            let v = &rec[h];
            let same = match v {
                serde_json::Value::Null => field.is_empty(),
                serde_json::Value::String(s) => s == field,
                other => other.to_string() == field,
            };
            assert!(same, "field {h}: json {v:?} vs csv {field:?}");
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_cap_violation_is_usage_error() {
    let out = binsum(&["sweep", "--pmax", "101", "--k1-only", "--tasks", "factor"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capped"));
}

#[test]
fn explicit_instance_sweep_to_stdout() {
    let out = binsum(&[
        "sweep", "--p", "13", "--k", "2", "--n", "5", "--tasks", "count,max",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for task in ["\"task\": \"count\"", "\"task\": \"max\""] {
        assert!(text.contains(task), "{text}");
    }
}

#[test]
fn workers_flag_is_deterministic() {
    let serial = binsum(&["sweep", "--pmax", "13", "--k1-only", "--tasks", "count", "--workers", "1"]);
    let parallel = binsum(&["sweep", "--pmax", "13", "--k1-only", "--tasks", "count", "--workers", "4"]);
    assert!(serial.status.success() && parallel.status.success());
    assert_eq!(stdout(&serial), stdout(&parallel));
}

#[test]
fn out_dir_contains_artifacts(){
    let dir = std::env::temp_dir().join(format!("binsum-out-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let out = binsum(&[
        "verify", "--pmax", "7", "--all-kn", "--tasks", "count,max,factor",
        "--out", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    for name in ["sweep_count.json", "sweep_max.json", "sweep_factor.json", "sweep_verify.json"] {
        assert!(Path::new(&dir.join(name)).exists(), "{name} missing");
    }
    let _ = std::fs::remove_dir_all(&dir);
}
