use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const JC: &str = r#"{"model": "jaynes_cummings", "params": {"g": 1, "delta": 0, "kappa": 1, "gamma": 1}, "cutoff": 2}"#;
const JC_GENERIC: &str =
    r#"{"model": "jaynes_cummings", "params": {"g": 1, "delta": 0.3, "kappa": 0.5, "gamma": 0.2}, "cutoff": 3}"#;
const TC_GENERIC: &str = r#"{"model": "tavis_cummings_2", "params": {"g1": 1, "g2": 0.7, "delta1": 0.3, "delta2": -0.2, "gamma1": 0.2, "gamma2": 0.35, "kappa": 0.5}, "cutoff": 3}"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn lindspec(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lindspec"));
    cmd.arg(args[0]).arg("--config").arg(config).args(&args[1..]);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn solve_writes_all_eigenvalues() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC_GENERIC);
    let out = dir.path().join("eigs.json");
    let run = lindspec(&["solve"], &cfg, Some(&out));
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // (1 + 2 + 2 + 2)^2 operators in total
    assert_eq!(json["count"], 49);
    let records = json["eigenvalues"].as_array().unwrap();
    assert_eq!(records.len(), 49);
    let first = &records[0];
    assert_eq!((first["l"].as_u64(), first["m"].as_u64()), (Some(0), Some(0)));
    assert!(first["lambda_re"].as_f64().unwrap().abs() < 1e-14);
    assert!(records.iter().all(|r| r["lambda_re"].as_f64().unwrap() <= 1e-12));
}

#[test]
fn degenerate_block_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", &JC.replace("\"kappa\": 1", "\"kappa\": 5"));
    let run = lindspec(&["solve"], &cfg, Some(&dir.path().join("o.json")));
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("degenerate"));
}

#[test]
fn spectrum_matches_closed_form_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC);
    let args = ["spectrum", "--omega-min", "-5", "--omega-max", "5", "--points", "201"];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(lindspec(&args, &cfg, Some(&a)).status.code(), Some(0));
    assert_eq!(lindspec(&args, &cfg, Some(&b)).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[100][0], 0.0);
    assert!((rows[100][1] - 0.16).abs() < 1e-9);
    assert!(std::fs::read_to_string(&a).unwrap().starts_with("omega,s,S\n"));
}

#[test]
fn spectrum_with_two_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC);
    let out = dir.path().join("s.csv");
    let run = lindspec(&["spectrum", "--omega-min", "-1", "--omega-max", "1", "--points", "2"], &cfg, Some(&out));
    assert_eq!(run.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (-1.0, 1.0));
}

#[test]
fn spectrum_from_ground_state_is_divergent() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC);
    let run = lindspec(
        &["spectrum", "--omega-min", "-1", "--omega-max", "1", "--points", "3", "--initial", "ground"],
        &cfg,
        Some(&dir.path().join("s.csv")),
    );
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn evolve_keeps_unit_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC_GENERIC);
    let out = dir.path().join("e.csv");
    let run = lindspec(
        &["evolve", "--initial", "excited_atom", "--t-max", "5", "--steps", "50"],
        &cfg,
        Some(&out),
    );
    assert_eq!(run.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 51);
    for row in &rows {
        assert!((row[1] - 1.0).abs() < 1e-10);
        assert!(row[2] <= 1.0 + 1e-10);
        let pop: f64 = row[3..].iter().sum();
        assert!((pop - 1.0).abs() < 1e-10);
    }
    assert!((rows[0][2] - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_at_time_zero_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC_GENERIC);
    let out = dir.path().join("e.csv");
    let run = lindspec(&["evolve", "--initial", "1,2", "--t-max", "0", "--steps", "10"], &cfg, Some(&out));
    assert_eq!(run.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][5] - 1.0).abs() < 1e-12);
}

#[test]
fn verify_passes_for_jc_and_tc() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("jc.json", JC_GENERIC), ("tc.json", TC_GENERIC)] {
        let cfg = write_config(&dir, name, text);
        let run = lindspec(&["verify"], &cfg, None);
        let stdout = String::from_utf8_lossy(&run.stdout);
        assert_eq!(run.status.code(), Some(0), "{stdout}");
        assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    }
}

#[test]
fn verify_with_impossible_tolerance_exits_one() {
    let dir = TempDir::new().unwrap();
    let text = JC_GENERIC.replace("\"cutoff\": 3", "\"cutoff\": 3, \"tolerances\": {\"residual\": 1e-30}");
    let cfg = write_config(&dir, "jc.json", &text);
    let run = lindspec(&["verify"], &cfg, None);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stdout).contains("FAIL"));
}

#[test]
fn verify_respects_size_guard() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "big.json", &JC_GENERIC.replace("\"cutoff\": 3", "\"cutoff\": 40"));
    assert_eq!(lindspec(&["verify"], &cfg, None).status.code(), Some(4));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC_GENERIC);
    let run = lindspec(&["evolve", "--initial", "bright", "--t-max", "1", "--steps", "2"], &cfg, Some(&dir.path().join("x")));
    assert_eq!(run.status.code(), Some(2));
    let broken = write_config(&dir, "broken.json", "{\"model\": ");
    assert_eq!(lindspec(&["solve"], &broken, Some(&dir.path().join("y"))).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(lindspec(&["solve"], &missing, Some(&dir.path().join("z"))).status.code(), Some(2));
}

#[test]
fn output_path_can_come_from_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from_config.json");
    let text = JC_GENERIC.replace(
        "\"cutoff\": 3",
        &format!("\"cutoff\": 3, \"output\": {{\"path\": {:?}, \"format\": \"json\"}}", out.to_str().unwrap()),
    );
    let cfg = write_config(&dir, "jc.json", &text);
    assert_eq!(lindspec(&["solve"], &cfg, None).status.code(), Some(0));
    assert!(out.exists());
}

#[test]
fn evolve_relaxes_to_steady_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "jc.json", JC_GENERIC);
    let out = dir.path().join("e.csv");
    let run = lindspec(&["evolve", "--initial", "excited_atom", "--t-max", "200", "--steps", "4"], &cfg, Some(&out));
    assert_eq!(run.status.code(), Some(0));
    let last = csv_rows(&out).pop().unwrap();
    // the steady state is the vacuum |0,1><0,1|
    assert!((last[3] - 1.0).abs() < 1e-9);
    assert!((last[2] - 1.0).abs() < 1e-9);
}
