use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_viscowave"));
    c.env_remove("VISCOWAVE_OUT");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bad_invocations_exit_with_one() {
    let out = run(bin().args(["run", "--config", "/nonexistent/x.toml"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(bin().args(["run", "--frobnicate"])).status.code(), Some(1));
    assert_eq!(run(bin().args(["constants", "--p", "0.5"])).status.code(), Some(1));
    assert_eq!(run(bin().arg("--help")).status.code(), Some(0));
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = TempDir::new().unwrap();
    let text = std::fs::read_to_string(config("small.toml"))
        .unwrap()
        .replace("m = 1.0", "m = 0.25\nfoo = 3")
        .replace("t_end = 5.0", "t_end = -1.0");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(bin().args(["classify", "--config"]).arg(&path));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("foo") && err.contains("m must") && err.contains("t_end"), "{err}");
}

#[test]
fn constants_are_consistent() {
    let v = json(&run(bin().args(["constants", "--p", "3", "--grid", "1d:pi:100", "--kernel", "exp:1:1"])));
    let (gamma, d, y0, m) = (
        v["gamma"].as_f64().unwrap(),
        v["d"].as_f64().unwrap(),
        v["y0"].as_f64().unwrap(),
        v["M"].as_f64().unwrap(),
    );
    assert!((d - 0.25 * gamma.powi(-4)).abs() <= 1e-14 * d);
    assert!((y0 - 2.0 * d).abs() <= 1e-14 * d);
    assert!(0.0 < m && m < d);
    assert_eq!(v["k0"].as_f64(), Some(2.0));
    // sqrt(k0) >= p leaves M undefined, with a reason.
    let v = json(&run(bin().args(["constants", "--p", "1.2", "--kernel", "exp:3:1"])));
    assert!(v["M"].is_null());
    assert!(v["m_absent_reason"].is_string());
}

#[test]
fn run_persists_and_refuses_to_overwrite() {
    let out_dir = TempDir::new().unwrap();
    let args = |force: bool| {
        let mut c = bin();
        c.args(["run", "--config"]).arg(config("small.toml")).arg("--out").arg(out_dir.path());
        if force {
            c.arg("--force");
        }
        c
    };
    let v = json(&run(&mut args(false)));
    assert_eq!(v["termination"]["status"], "completed");
    let dir = PathBuf::from(v["run_dir"].as_str().unwrap());
    for f in ["config.toml", "ledger.csv", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config_hash"].as_str(), dir.file_name().unwrap().to_str());
    assert_eq!(summary["E0"], v["E0"]);

    // The stored config reproduces the run bit for bit.
    let ledger = std::fs::read_to_string(dir.join("ledger.csv")).unwrap();
    let again = TempDir::new().unwrap();
    let w = json(&run(bin()
        .args(["run", "--config"])
        .arg(dir.join("config.toml"))
        .arg("--out")
        .arg(again.path())));
    let replay = std::fs::read_to_string(PathBuf::from(w["run_dir"].as_str().unwrap()).join("ledger.csv")).unwrap();
    assert_eq!(ledger, replay);

    let refused = run(&mut args(false));
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("exists"));
    assert!(run(&mut args(true)).status.success());
}

#[test]
fn output_root_comes_from_the_environment() {
    let root = TempDir::new().unwrap();
    let v = json(&run(bin()
        .env("VISCOWAVE_OUT", root.path())
        .args(["run", "--config"])
        .arg(config("small.toml"))));
    assert!(Path::new(v["run_dir"].as_str().unwrap()).starts_with(root.path()));
}

#[test]
fn table_history_is_copied_into_the_run() {
    let root = TempDir::new().unwrap();
    let v = json(&run(bin()
        .args(["run", "--config"])
        .arg(config("table_history.toml"))
        .arg("--out")
        .arg(root.path())));
    let dir = PathBuf::from(v["run_dir"].as_str().unwrap());
    assert!(dir.join("history.csv").is_file());
    // The copy is found relative to the stored config.
    json(&run(bin().args(["classify", "--config"]).arg(dir.join("config.toml"))));
}

#[test]
fn decay_fit_on_a_persisted_ledger() {
    let root = TempDir::new().unwrap();
    let v = json(&run(bin()
        .args(["run", "--config"])
        .arg(config("small.toml"))
        .arg("--out")
        .arg(root.path())));
    let ledger = PathBuf::from(v["run_dir"].as_str().unwrap()).join("ledger.csv");
    let fit = json(&run(bin()
        .args(["decay-fit", "--ledger"])
        .arg(&ledger)
        .args(["--window", "1,5", "--predict", "1", "exp", "-", "true"])));
    assert!(fit["fitted_rate"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["model"], "exponential");
    assert_eq!(fit["predicted"]["kind"], "exponential");
    assert!(fit["verdict"].is_string());
    let out = run(bin().args(["decay-fit", "--ledger"]).arg(&ledger).args(["--window", "4.9,5"]));
    assert_eq!(out.status.code(), Some(2));
    let out = run(bin().args(["decay-fit", "--ledger"]).arg(&ledger).args(["--window", "1,2,3"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_reports_the_well_side() {
    let v = json(&run(bin().args(["classify", "--config"]).arg(config("small.toml"))));
    assert_eq!(v["class"], "W1");
    assert!(v["I"].as_f64().unwrap() < v["d"].as_f64().unwrap());
    let v = json(&run(bin().args(["classify", "--config"]).arg(config("blowup.toml"))));
    assert_eq!(v["class"], "W2");
    assert!(v["nehari_gap"].as_f64().unwrap() < 0.0);
}

#[test]
fn sweep_writes_one_row_per_combination() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(bin()
        .args(["sweep", "--config"])
        .arg(config("small.toml"))
        .args(["--amplitudes", "0.5,1", "--m", "1,2", "--kernels", "exp:1:1,poly:1:1.5", "--out"])
        .arg(&csv_path)
        .arg("--persist")
        .arg(dir.path().join("runs")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "class_at_0"));
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    let dirs = std::fs::read_dir(dir.path().join("runs")).unwrap().count();
    assert_eq!(dirs, 8);
}

#[test]
fn quick_verification_passes() {
    let out = run(bin().args(["verify", "--quick", "--json"]));
    let v = json(&out);
    let results = v.as_array().unwrap();
    assert_eq!(results.len(), 14);
    assert!(results.iter().all(|r| r["passed"] == true));
}
