//! Runs the binary for every subcommand and compares payloads with stored goldens.
//! `SWINGUP_BLESS=1 cargo test -p swingup-cli --test end_to_end` rewrites the goldens.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const REL_TOL: f64 = 1e-6;
/// Values below this are integration noise around zero.
const ABS_FLOOR: f64 = 1e-12;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    manifest().join("tests/fixtures").join(name).display().to_string()
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn swingup(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swingup"));
    cmd.args(args).env_remove("SWINGUP_OUT");
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    let o = cmd.output().expect("binary runs");
    Output {
        code: o.status.code().expect("exit code"),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn run_ok(args: &[&str], out: &Path) -> Value {
    let o = swingup(args, Some(out));
    assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
    serde_json::from_str(&o.stdout).unwrap()
}

/// Rows below the `#` header.
fn payload(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn close(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => (x - y).abs() <= REL_TOL * x.abs().max(y.abs()) || (x.abs() < ABS_FLOOR && y.abs() < ABS_FLOOR),
        _ => false,
    }
}

fn check_golden(dir: &Path, file: &str) {
    let got = payload(&dir.join(file));
    let golden = manifest().join("tests/golden").join(file);
    if std::env::var_os("SWINGUP_BLESS").is_some() {
        std::fs::write(&golden, got.join("\n") + "\n").unwrap();
        return;
    }
    let want = payload(&golden);
    assert_eq!(got.len(), want.len(), "{file}: row count");
    assert_eq!(got[0], want[0], "{file}: columns");
    for (r, (g, w)) in got.iter().zip(&want).enumerate().skip(1) {
        let (gc, wc): (Vec<&str>, Vec<&str>) = (g.split(',').collect(), w.split(',').collect());
        assert_eq!(gc.len(), wc.len(), "{file} row {r}");
        for (a, b) in gc.iter().zip(&wc) {
            assert!(close(a, b), "{file} row {r}: {a} vs {b}");
        }
    }
}

fn header(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().take_while(|l| l.starts_with('#')).map(String::from).collect()
}

#[test]
fn couplings_table() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["couplings", "--set", "couplings.n_points=25"], dir.path());
    check_golden(dir.path(), "couplings.csv");
    assert!((v["result"]["omega12"].as_f64().unwrap() - 3017.63).abs() < 0.01);
    let h = header(&dir.path().join("couplings.csv"));
    assert!(h[0].starts_with("# swingup ") && h[2].starts_with("# config_sha256: ") && h[3].starts_with("# created: "));
}

#[test]
fn simulate_superradiant_target() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["simulate", "--config", &fixture("plus.json"), "--set", "n_points=41"], dir.path());
    check_golden(dir.path(), "simulate.csv");
    let rows = payload(&dir.path().join("simulate.csv"));
    let p_plus: f64 = rows.last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(p_plus > 0.91, "{p_plus}");
    assert!((v["result"]["final"]["plus"].as_f64().unwrap() - p_plus).abs() < 1e-12);
}

#[test]
fn decay_fit() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["decay", "--config", &fixture("plus.json"), "--set", "decay.n_points=41"], dir.path());
    check_golden(dir.path(), "decay.csv");
    let (rate, want) = (v["result"]["rate_plus"].as_f64().unwrap(), v["result"]["expected_plus"].as_f64().unwrap());
    assert!(((rate - want) / want).abs() < 0.03, "{rate} vs {want}");
}

#[test]
fn sweep_grid() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--config",
        &fixture("plus.json"),
        "--set",
        r#"sweep.axis1={"param":"alpha1_pi","lo":60,"hi":70,"n_points":3}"#,
        "--set",
        r#"sweep.axis2={"param":"alpha2_pi","lo":55,"hi":60,"n_points":3}"#,
    ];
    let v = run_ok(&args, dir.path());
    check_golden(dir.path(), "sweep.csv");
    let best = &v["result"]["best_cell"]["plus"];
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(&sidecar["result"]["best_cell"]["plus"], best);
    assert_eq!(payload(&dir.path().join("sweep.csv")).len(), 10);
}

#[test]
fn phase_sweep_grid() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["phase-sweep", "--config", &fixture("plus.json"), "--set", "phase_sweep.n_phases=5", "--set", "phase_sweep.n_times=5"];
    let v = run_ok(&args, dir.path());
    check_golden(dir.path(), "phase_sweep.csv");
    assert_eq!(v["result"]["argmax_theta"]["plus"].as_f64(), Some(0.0));
}

#[test]
fn spectrum_single_peak_for_fast_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["spectrum", "--config", &fixture("plus_cav.json")], dir.path());
    check_golden(dir.path(), "spectrum.csv");
    assert_eq!(v["result"]["peaks"].as_array().unwrap().len(), 1);
}

#[test]
fn g2_of_dark_target_in_lossy_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["g2", "--config", &fixture("minus_k5.json"), "--set", "g2.tau_max=0.01", "--set", "g2.n_tau=5"], dir.path());
    check_golden(dir.path(), "g2.csv");
    let g = v["result"]["g2_at_zero"].as_f64().unwrap();
    assert!(g > 1.22e-6 / 3.0 && g < 1.22e-6 * 3.0, "{g}");
    let direct = v["result"]["g2_direct"].as_f64().unwrap();
    assert!(((g - direct) / direct).abs() < 1e-8);
}

#[test]
fn bloch_vectors() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bloch", "--config", &fixture("plus.json"), "--set", "n_points=21"], dir.path());
    check_golden(dir.path(), "bloch.csv");
    for row in payload(&dir.path().join("bloch.csv")).iter().skip(1) {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        for k in 0..3 {
            assert!(v[4 + 4 * k] <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn disorder_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_ok(&["disorder", "--config", &fixture("plus.json"), "--set", "disorder.n_samples=6", "--seed", "3"], dir.path());
    check_golden(dir.path(), "disorder.csv");
    let rows = payload(&dir.path().join("disorder.csv"));
    assert_eq!(rows.len(), 1 + 6 + 2);
    assert!(rows[7].starts_with("mean,") && rows[8].starts_with("std_error,"));
    assert_eq!(v["result"]["failures"].as_u64(), Some(0));
}

#[test]
fn convert_units() {
    let o = swingup(&["convert-units", "--mev", "-5"], None);
    assert_eq!(o.code, 0);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["scaled"].as_f64().unwrap() + 7595.58).abs() < 1e-9);
    let o = swingup(&["convert-units", "--to-ps", "0.006"], None);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["ps"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert_eq!(swingup(&["convert-units"], None).code, 1);
}

#[test]
fn reproduce_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = swingup(&["reproduce", "--criteria", "1,2"], Some(dir.path()));
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert!(lines[0].starts_with("[PASS]  1.") && lines[1].starts_with("[PASS]  2."), "{lines:?}");
    assert_eq!(lines[2], "reproduce: 2/2 criteria pass");
    assert!(dir.path().join("reproduce.json").exists());
}

#[test]
fn payloads_are_deterministic() {
    let cases: [&[&str]; 3] = [
        &["simulate", "--config", &fixture("plus.json"), "--set", "n_points=21"],
        &["disorder", "--config", &fixture("plus.json"), "--set", "disorder.n_samples=4", "--seed", "11"],
        &["spectrum", "--config", &fixture("plus_cav.json")],
    ];
    for args in cases {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let va = run_ok(args, a.path());
        let vb = run_ok(args, b.path());
        assert_eq!(va["result"], vb["result"]);
        for f in va["files"].as_array().unwrap() {
            let name = Path::new(f.as_str().unwrap()).file_name().unwrap();
            if name.to_str().unwrap().ends_with(".csv") {
                assert_eq!(payload(&a.path().join(name)), payload(&b.path().join(name)));
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let base = ["disorder", "--config", &fixture("plus.json"), "--set", "disorder.n_samples=8"];
    run_ok(&[&base[..], &["--jobs", "1"]].concat(), a.path());
    run_ok(&[&base[..], &["--jobs", "3"]].concat(), b.path());
    assert_eq!(payload(&a.path().join("disorder.csv")), payload(&b.path().join("disorder.csv")));
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_swingup"))
        .args(["couplings", "--set", "couplings.n_points=2"])
        .env("SWINGUP_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("couplings.csv").exists());
}

#[test]
fn validation_errors_exit_one_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"pulse": {"sigma1": -1, "sigma2": -2}}"#).unwrap();
    let o = swingup(&["simulate", "--config", bad.to_str().unwrap()], Some(dir.path()));
    assert_eq!(o.code, 1);
    let v: Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "validation");
    assert_eq!(v["error"]["messages"].as_array().unwrap().len(), 2);
    assert!(!dir.path().join("simulate.csv").exists());

    for args in [&["frobnicate"][..], &["g2"], &["simulate", "--fock", "3"], &["simulate", "--config", "/nonexistent.json"]] {
        let o = swingup(args, Some(dir.path()));
        assert_eq!(o.code, 1, "{args:?}");
        assert!(serde_json::from_str::<Value>(o.stderr.trim()).is_ok(), "{}", o.stderr);
    }
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = swingup(&["simulate", "--config", &fixture("plus.json"), "--set", "integrator.max_steps=5"], Some(dir.path()));
    assert_eq!(o.code, 2, "{}", o.stderr);
    let v: Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "numerical");
}
