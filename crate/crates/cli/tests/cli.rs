use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cesaro_cli::{from_json, to_json, BoundsDoc, FbmDoc, KernelTableDoc, VerifyDoc};

fn cesaro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cesaro")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn roundtrip<T>(path: &Path)
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let doc: T = from_json(&fs::read_to_string(path).unwrap()).unwrap();
    let again: T = from_json(&to_json(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn kernel_table_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = cesaro(&["kernel-table", "--alpha", "1", "--grid", "1:3:3:lin", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["s", "t", "k_hyp[a=1]", "n[a=1]", "b[a=0]"]);
    assert_eq!(rows.len(), 10);
    let row = rows.iter().find(|r| r[0].parse::<f64>() == Ok(2.0) && r[1].parse::<f64>() == Ok(3.0)).unwrap();
    let k: f64 = row[2].parse().unwrap();
    assert!((k - 1.0 / 3.0).abs() < 1e-12);
    // 17 significant digits
    assert_eq!(row[2].split('e').next().unwrap().len(), 18);
    roundtrip::<KernelTableDoc>(&dir.path().join("k.csv.json"));
}

#[test]
fn kernel_table_dual_route() {
    let o = cesaro(&["kernel-table", "--alpha", "2", "--grid", "0.5:4:4:log", "--strategy", "hyp,int", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: KernelTableDoc = from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(doc.rows.len(), 16);
    for r in &doc.rows {
        assert!((r.k[0] - r.k[1]).abs() <= 1e-8 * r.k[1].abs(), "{r:?}");
        assert_eq!(r.b, Some(r.n));
    }
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["kernel-table", "--alpha", "1", "--grid", "1:3:0"],
        vec!["kernel-table", "--alpha", "1.5", "--grid", "1:3:3", "--strategy", "int"],
        vec!["kernel-table", "--alpha", "0.4", "--grid", "1:3:3"],
        vec!["kernel-table", "--alpha", "1", "--grid", "1:3:3", "--strategy", "fft"],
        vec!["fbm", "--alpha", "0.4", "--mode", "n", "--grid", "0.1:1:4"],
        vec!["fbm", "--alpha", "1", "--grid", "0.1:1:4", "--average", "1"],
        vec!["bounds-sweep", "--polar", "1:2:3"],
        vec!["verify", "--tolerance", "0"],
        vec!["verify", "--suite", "no-such-suite"],
        vec!["kernel-table", "--alpha", "1", "--grid", "1:3:3", "--out", "/no/such/dir/k.csv"],
        vec!["kernel-table", "--alpha"],
    ] {
        let o = cesaro(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bounds_sweep_row_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = cesaro(&["bounds-sweep", "--alpha", "1", "--polar", "1:1:1/1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["alpha", "modulus", "theta", "k", "k_error", "lower", "upper", "pass"]);
    let v: Vec<f64> = rows[1][..7].iter().map(|s| s.parse().unwrap()).collect();
    assert!((v[3] - 2.0 * 2f64.ln()).abs() < 1e-9);
    assert!((v[5] - 1.0).abs() < 1e-12);
    assert!((v[6] - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(rows[1][7], "true");
    roundtrip::<BoundsDoc>(&dir.path().join("b.csv.json"));
}

#[test]
fn bounds_sweep_default_lattice_exits_0() {
    let o = cesaro(&["bounds-sweep", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: BoundsDoc = from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(doc.rows.len(), 175);
    assert_eq!(doc.failures, 0);
    let edge = std::f64::consts::FRAC_PI_2 - 1e-3;
    assert!(doc.rows.iter().any(|r| r.theta == edge) && doc.rows.iter().any(|r| r.theta == -edge));
}

#[test]
fn fbm_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = cesaro(&["fbm", "--alpha", "0.5", "--grid", "0.1:1:8", "--paths", "200", "--seed", "42", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(&out).unwrap(), fs::read(dir.path().join(format!("{name}.json"))).unwrap())
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let rows = csv_rows(&dir.path().join("a.csv"));
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0].len(), 9);
    roundtrip::<FbmDoc>(&dir.path().join("a.csv.json"));
    let doc: FbmDoc = from_json(&String::from_utf8(a.1).unwrap()).unwrap();
    assert!(doc.covariance.is_some());
}

#[test]
fn fbm_brownian_covariance_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let o = cesaro(&[
        "fbm", "--alpha", "0", "--grid", "0.015625:1:64", "--paths", "10000", "--seed", "7", "--format", "json",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: FbmDoc = from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let report = doc.covariance.as_ref().unwrap();
    assert!(report.pass, "max score {}", report.max_score);
    assert_eq!(doc.samples.as_ref().unwrap().len(), 10_000);
    roundtrip::<FbmDoc>(&out);
}

#[test]
fn fbm_small_ensemble_has_no_report() {
    let o = cesaro(&["fbm", "--alpha", "1", "--grid", "0.1:1:20", "--paths", "10", "--average", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: FbmDoc = from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(doc.covariance.is_none());
    assert_eq!(doc.averaging.as_ref().unwrap().discretization_bound.len(), 20);
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let suites = "quadrature-exactness,weyl-homogeneity,estimation-bounds";
    let o = cesaro(&["verify", "--suite", suites, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 of 3 suites failed"));
    roundtrip::<VerifyDoc>(&out);

    let o = cesaro(&["verify", "--suite", suites, "--tolerance", "0.01", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let doc: VerifyDoc = from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let failed: Vec<&str> = doc.report.suites.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect();
    assert_eq!(failed, ["weyl-homogeneity"]);
    assert_eq!(doc.report.failed, 1);
}

#[test]
fn verify_lists_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = cesaro(&["verify", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    let names: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    let expected: Vec<&str> = cesaro_core::verify::suite_names().into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, expected);
    roundtrip::<VerifyDoc>(&dir.path().join("v.csv.json"));
}
