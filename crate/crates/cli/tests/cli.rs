use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dicke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicke")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.json");
    let text = format!(
        r#"{{
  "model": {{"omega": 1, "omega0": 1, "lambda": 0.823, "delta_phi": 1, "j": 2, "n_max": 20}},
  "output": {{"dir": "{}"}}{extra}
}}"#,
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn missing_config_exits_with_usage() {
    let out = dicke(&["evolve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = dicke(&["evolve", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
}

#[test]
fn invalid_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"model": {"omega": 1, "omega0": 1, "lambda": -1, "delta_phi": 1, "j": 2, "n_max": 20}}"#).unwrap();
    let out = dicke(&["evolve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn evolve_meanfield_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dicke(&["evolve", "--config", &cfg, "--engine", "meanfield", "--lambda", "1.3", "--periods", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_csv(&dir.path().join("out/evolve.csv"));
    assert_eq!(&header[..3], ["t", "Q", "P"]);
    assert!(header.contains(&"Jx".to_string()));
    assert_eq!(rows.len(), 301);
    let n_ph = header.iter().position(|h| h == "n_ph").unwrap();
    assert!(rows.iter().all(|r| r[n_ph] > 0.0));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/evolve.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["model"]["lambda"], 1.3);
    assert_eq!(manifest["config"]["protocol"]["periods"], 3.0);
    assert_eq!(manifest["config"]["engine"]["initial"], "meanfield");
    assert!(manifest["krylov_seed"].is_u64());
}

#[test]
fn identical_configs_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let run = || {
        let out = dicke(&["evolve", "--config", &cfg, "--engine", "quantum", "--periods", "1"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(dir.path().join("out/evolve.csv")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn scan_lambda_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dicke(&[
        "scan-lambda", "--config", &cfg, "--periods", "2", "--start", "0.3", "--stop", "1.0", "--count", "8",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/scan-lambda.csv"));
    assert_eq!(header, ["lambda", "delta_phi", "n_ph_Tphi", "avg_n_ph", "avg_n_at"]);
    assert_eq!(rows.len(), 8);
}

#[test]
fn scan_without_grid_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dicke(&["scan-dphi", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out/scan-dphi.csv").exists());
}

#[test]
fn failed_run_keeps_previous_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    assert!(dicke(&["evolve", "--config", &cfg, "--periods", "1"]).status.success());
    let before = fs::read(dir.path().join("out/evolve.csv")).unwrap();
    // The exact ground state is not available to the mean-field engine.
    let out = dicke(&["evolve", "--config", &cfg, "--periods", "2", "--initial", "exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read(dir.path().join("out/evolve.csv")).unwrap(), before);
}

#[test]
fn mexhat_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#", "protocol": {"mexhat": {"points": 10, "half_periods": 4}}"#);
    let out = dicke(&["mexhat", "--config", &cfg, "--sweep-eps"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/mexhat.csv"));
    assert_eq!(header, ["eps", "avg_rho2_analytic", "avg_rho2_numeric", "T_half"]);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| (r[1] - r[2]).abs() < 1e-6));
}

#[test]
fn ground_state_and_contours() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#", "protocol": {"contours": {"points": 21}}"#);
    assert!(dicke(&["ground-state", "--config", &cfg]).status.success());
    let (_, rows) = read_csv(&dir.path().join("out/ground-state.csv"));
    assert_eq!(rows.len(), 2);
    assert!(dicke(&["contours", "--config", &cfg]).status.success());
    let (header, rows) = read_csv(&dir.path().join("out/contours.csv"));
    assert_eq!(header, ["Q", "q", "V"]);
    assert_eq!(rows.len(), 441);
}

#[test]
fn geomphase_engine_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dicke(&["evolve", "--config", &cfg, "--engine", "geomphase", "--periods", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, _) = read_csv(&dir.path().join("out/evolve.csv"));
    assert_eq!(header, ["t", "n_ph", "n_at", "norm"]);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            dicke::experiments::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
