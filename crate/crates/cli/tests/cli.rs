use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fdkp(dir: &Path, command: &str, config: &str) -> Output {
    fdkp_with(dir, command, config, &[])
}

fn fdkp_with(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{command}.toml"));
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fdkp"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join(command))
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest_files(dir: &Path) -> Vec<String> {
    let text = fs::read_to_string(dir.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
    v["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn verify_integrals_at_unit_width() {
    let tmp = TempDir::new().unwrap();
    let out = fdkp(
        tmp.path(),
        "verify-integrals",
        "[stability]\nkappa_list = [1.0]\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("9/9 PASS"));
    let csv = fs::read_to_string(tmp.path().join("verify-integrals/integrals.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(
        manifest_files(&tmp.path().join("verify-integrals")),
        vec!["integrals.csv"]
    );
}

#[test]
fn empty_lambda_list_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let config = "[stability]\nfamily = \"whitham\"\nc_list = [7.0]\nlambda_list = []\n";
    let out = fdkp(tmp.path(), "stability-eigen", config);
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["kind"], "validation");
    assert_eq!(record["exit_code"], 2);
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = fdkp(tmp.path(), "verify-integrals", "[stability]\nkapa_list = [1.0]\n");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn soliton_check_reports_small_residual() {
    let tmp = TempDir::new().unwrap();
    let config = r#"
[model]
tag = "mkdv"
mu = 6.0
nu = 1.0

[grid]
nx = 1024
lx = 80.0

[wave]
c = 2.0
"#;
    let out = fdkp(tmp.path(), "soliton-check", config);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("soliton-check/soliton_check.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(report["profile_residual"].as_f64().unwrap() <= 1e-8);
    assert!(report["traveling_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["pass"], true);
}

#[test]
fn subcritical_speed_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let config = "[grid]\nnx = 256\nlx = 80.0\n\n[wave]\nc = 0.5\n";
    let out = fdkp(tmp.path(), "soliton-check", config);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dispersion_lattice() {
    let tmp = TempDir::new().unwrap();
    let config =
        "[kernel]\nfamily = \"green_exponential\"\n\n[grid]\nnx = 64\nny = 64\nlx = 40.0\nly = 40.0\n";
    let out = fdkp(tmp.path(), "dispersion", config);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("dispersion/dispersion.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4096);
    let mut flagged = 0;
    for r in &rows {
        let (k, l): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let full: f64 = r[2].parse().unwrap();
        if l == 0.0 {
            // β̂ = 1/(1 + k²)²
            let expected = k.abs() / (1.0 + k * k);
            assert!((full - expected).abs() <= 1e-14, "k = {k}");
        }
        if r[4] == "1" {
            flagged += 1;
            assert_eq!(r[3], "inf");
        }
    }
    assert_eq!(flagged, 63);
}

#[test]
fn stability_eigen_writes_contract_columns() {
    let tmp = TempDir::new().unwrap();
    let config = r#"
[stability]
family = "whitham"
c_list = [7.0]
lambda_list = [0.025, 0.05, 0.1]
n_modes = 128
"#;
    let out = fdkp(tmp.path(), "stability-eigen", config);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("stability-eigen");
    let csv = fs::read_to_string(dir.join("eigen.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "family,c,nu,lambda,re_omega_max,im_omega_at_max,N,L"
    );
    assert_eq!(csv.lines().count(), 4);
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("whitham,7.0000000000000000e0,"));
    let fit = fs::read_to_string(dir.join("omega1_fit.csv")).unwrap();
    assert_eq!(fit.lines().count(), 2);
    assert_eq!(manifest_files(&dir), vec!["eigen.csv", "omega1_fit.csv"]);
}

#[test]
fn reruns_are_byte_identical() {
    let config = r#"
[model]
tag = "mkdv"
mu = 6.0
nu = 1.0

[grid]
nx = 256
lx = 80.0

[wave]
c = 2.0
noise = 1e-6
seed = 7

[stepper]
t_final = 1.0
dt = 0.01
monitor_every = 10
snapshot_every = 50
"#;
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for tmp in [&a, &b] {
        let out = fdkp(tmp.path(), "simulate", config);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let files = manifest_files(&a.path().join("simulate"));
    assert!(files.contains(&"monitor.csv".to_string()));
    assert!(files.contains(&"snapshots/snapshot_00000100.bin".to_string()));
    for f in files {
        let x = fs::read(a.path().join("simulate").join(&f)).unwrap();
        let y = fs::read(b.path().join("simulate").join(&f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let monitor = fs::read_to_string(a.path().join("simulate/monitor.csv")).unwrap();
    assert_eq!(monitor.lines().count(), 12);
}

#[test]
fn perturb_needs_a_single_speed() {
    let tmp = TempDir::new().unwrap();
    let config = r#"
[grid]
nx = 256
ny = 16
lx = 80.0

[stability]
c_list = [2.0, 3.0]
lambda_list = [0.1]

[stepper]
t_final = 1.0
"#;
    let out = fdkp(tmp.path(), "stability-perturb", config);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturb_reports_stable_case() {
    let tmp = TempDir::new().unwrap();
    let config = r#"
[grid]
nx = 256
ny = 8
lx = 80.0

[stability]
family = "bbm"
c_list = [6.0]
lambda_list = [0.1]

[stepper]
t_final = 5.0
"#;
    let out = fdkp(tmp.path(), "stability-perturb", config);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("stability-perturb");
    let csv = fs::read_to_string(dir.join("perturb.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "lambda,fitted_rate,r_squared,window_start,window_end"
    );
    assert!(csv.lines().nth(1).unwrap().starts_with("1.0000000000000001e-1,"));
    assert!(dir.join("band_000.csv").exists());
}

#[test]
fn sweep_covers_every_pair() {
    let tmp = TempDir::new().unwrap();
    let config = r#"
[grid]
nx = 128
ny = 4
lx = 80.0

[stability]
family = "bbm"
c_list = [3.0, 6.0]
lambda_list = [0.1, 0.2]

[stepper]
t_final = 1.0
"#;
    let out = fdkp_with(tmp.path(), "sweep", config, &["--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("sweep/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    // BBM solitons have no first-order instability
    assert!(rows.iter().all(|r| r.ends_with(",0.0000000000000000e0")));
}
