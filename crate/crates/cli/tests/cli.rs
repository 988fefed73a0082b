use std::fs;
use std::path::Path;
use std::process::Command;

use fbmdiff_cli::config::manifest_path;
use fbmdiff_cli::output::{format_real, write_csv, Cell, Table};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbmdiff"))
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = bin()
        .current_dir(dir)
        .env_remove("FBMDIFF_OUT_DIR")
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_governing_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(
        dir.path(),
        &["verify-governing", "--hurst", "0.3", "--scale-c", "0.5"],
    );
    assert_eq!(code, 0, "{stdout}");
    let out = dir.path().join("verify-governing.csv");
    let (header, rows) = read_rows(&out);
    assert_eq!(header, ["check", "value", "threshold", "pass"]);
    assert!(rows
        .iter()
        .any(|r| r[0] == "gl_convergence_slope" && r[3] == "true"));
    assert!(rows.iter().all(|r| r[3] == "true"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(manifest_path(&out)).unwrap()).unwrap();
    assert_eq!(manifest["config"]["command"], "verify-governing");
    assert_eq!(manifest["config"]["hurst"], 0.3);
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["exit_code"], 0);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest["version"].is_string());
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_in(dir.path(), &["residual-ode", "--hurst", "0.25"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("Gamma(4H-1) diverges"), "{stderr}");

    for args in [
        &["sample", "--hurst", "0.5", "--paths", "0"][..],
        &["sample"],
        &["sample", "--hurst", "1.2"],
        &["sample", "--hurst", "0.5", "--scale-c", "-1"],
        &["residual-ode", "--hurst", "0.7"],
        &["residual-integral", "--hurst", "0.3"],
        &["transport", "--hurst", "0.5"],
        &["pde", "--hurst", "0.7", "--n-t", "8"],
        &["pde", "--hurst", "0.7", "--xmax", "1"],
        &["density", "--hurst", "0.5", "--t0", "0"],
        &["frobnicate"],
        &["sample", "--hurst", "abc"],
    ] {
        let (code, _, stderr) = run_in(dir.path(), args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
    }
    // nothing written on validation failure
    assert!(!dir.path().join("sample.csv").exists());
}

#[test]
fn certification_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // far too coarse for the L1 threshold, but otherwise valid
    let (code, stdout, _) = run_in(
        dir.path(),
        &[
            "pde", "--hurst", "0.3", "--t0", "0.05", "--t1", "2", "--n-x", "61", "--n-t", "16",
            "--out", "p.csv",
        ],
    );
    assert_eq!(code, 3, "{stdout}");
    assert!(dir.path().join("p.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["exit_code"], 3);
}

#[test]
fn sample_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--hurst", "0.7", "--paths", "5", "--n-t", "8"];
    let (code, ..) = run_in(
        dir.path(),
        &[&args[..], &["--seed", "99", "--out", "a.csv"]].concat(),
    );
    assert_eq!(code, 0);
    let (code, ..) = run_in(
        dir.path(),
        &[&args[..], &["--seed", "99", "--out", "b.csv"]].concat(),
    );
    assert_eq!(code, 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());

    let (header, rows) = read_rows(&dir.path().join("a.csv"));
    assert_eq!(header, ["path_id", "t", "value"]);
    assert_eq!(rows.len(), 5 * 9);
    assert!(rows
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .all(|r| r[2].parse::<f64>().unwrap() == 0.0));

    let (code, ..) = run_in(
        dir.path(),
        &[&args[..], &["--seed", "100", "--out", "c.csv"]].concat(),
    );
    assert_eq!(code, 0);
    assert_ne!(a, fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn other_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run_in(
        dir.path(),
        &[
            "density", "--hurst", "0.6", "--n-x", "11", "--n-t", "2", "--out", "d.csv",
        ],
    );
    assert_eq!(code, 0);
    let (header, rows) = read_rows(&dir.path().join("d.csv"));
    assert_eq!(header, ["t", "x", "rho"]);
    assert_eq!(rows.len(), 3 * 11);

    let (code, ..) = run_in(
        dir.path(),
        &[
            "msd", "--hurst", "0.5", "--paths", "50", "--n-t", "16", "--out", "m.csv",
        ],
    );
    assert_eq!(code, 0);
    let (header, rows) = read_rows(&dir.path().join("m.csv"));
    assert_eq!(header, ["t", "msd", "std_err"]);
    assert_eq!(rows.len(), 17);

    let (code, ..) = run_in(
        dir.path(),
        &[
            "residual-integral",
            "--hurst",
            "0.7",
            "--format",
            "json",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report["residual_linf"].as_f64().unwrap() <= 1e-7);
    assert!(report["grid"]["count"].as_u64().unwrap() >= 2);

    let (code, ..) = run_in(
        dir.path(),
        &[
            "residual-classical",
            "--scale-c",
            "1",
            "--t1",
            "2",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(code, 0);
    let (header, rows) = read_rows(&dir.path().join("c.csv"));
    assert_eq!(header[3], "residual_l2");
    assert_eq!(rows.len(), 1);
}

#[test]
fn iterated_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(
        dir.path(),
        &[
            "verify-iterated",
            "--hurst",
            "0.5",
            "--hurst2",
            "0.5",
            "--paths",
            "20000",
            "--out",
            "v.csv",
        ],
    );
    assert_eq!(code, 0, "{stdout}");
    let (_, rows) = read_rows(&dir.path().join("v.csv"));
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for n in [
        "density_mass_defect",
        "monte_carlo_tv",
        "transport_l1",
        "constraint_residual_linf",
    ] {
        assert!(names.contains(&n), "{names:?}");
    }
    // the constraint report is informational: no threshold, always passes
    let c = rows
        .iter()
        .find(|r| r[0] == "constraint_residual_linf")
        .unwrap();
    assert_eq!(c[2], "");
    assert_eq!(c[3], "true");

    let (code, ..) = run_in(
        dir.path(),
        &[
            "sample", "--hurst", "0.6", "--hurst2", "0.4", "--paths", "3", "--n-t", "4",
            "--format", "json", "--out", "s.json",
        ],
    );
    assert_eq!(code, 0);
    let e: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(e["values"].as_array().unwrap().len(), 15);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("artifacts");
    let out = bin()
        .current_dir(dir.path())
        .env("FBMDIFF_OUT_DIR", &target)
        .args(["density", "--hurst", "0.5", "--n-x", "11", "--n-t", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("density.csv").exists());
    assert!(target.join("density.csv.manifest.json").exists());
}

#[test]
fn csv_writer_rejects_ragged_rows() {
    let dir = tempfile::tempdir().unwrap();
    let t = Table {
        header: vec!["a", "b"],
        rows: vec![vec![Cell::Real(1.0)]],
    };
    assert!(write_csv(&t, &dir.path().join("x.csv")).is_err());
}

#[test]
fn real_format_has_17_significant_digits() {
    assert_eq!(format_real(0.1), "1.0000000000000001e-1");
    assert_eq!(format_real(-2.5), "-2.5000000000000000e0");
    assert_eq!(format_real(f64::NAN), "NaN");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_is_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..60)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        let mut t = Table::new(vec!["i", "v"]);
        for (i, v) in values.iter().enumerate() {
            t.push(vec![Cell::from(i), Cell::Real(*v)]);
        }
        write_csv(&t, &path).unwrap();
        let (_, rows) = read_rows(&path);
        prop_assert_eq!(rows.len(), values.len());
        for (row, v) in rows.iter().zip(&values) {
            let parsed: f64 = row[1].parse().unwrap();
            prop_assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }
}
