use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tepai::commands::{Header, Summary};
use tepai_core::hamiltonian::build_spin_ring;
use tepai_core::simulator::{run_trotter_reference, NoiseModel};
use tepai_core::{PauliString, StateVector, TrotterTemplate};

fn tepai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tepai")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_ring(extra: &str) -> String {
    format!(
        r#"{{"model": {{"type": "spin_ring", "n": 4, "seed": 2}}, "T": 0.5, "N": 50,
            "observable": "X0", "master_seed": 9 {extra}}}"#
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn zero_shots_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_ring(r#", "delta": "pi/16", "shots": 0"#));
    let out = dir.path().join("run");
    let o = tepai(&["run", s(&cfg), "--output", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let head: Header = serde_json::from_str(&fs::read_to_string(out.join("header.json")).unwrap()).unwrap();
    assert_eq!(head.n_qubits, 4);
    assert!(head.nu_inf.unwrap() > 0.0);
    assert!(!out.join("shots.jsonl").exists());
    assert!(!out.join("summary.json").exists());
}

#[test]
fn missing_term_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "term_file", "path": "nowhere.terms"}, "T": 1, "N": 10, "delta": 0.1,
            "observable": "Z0"}"#,
    );
    let o = tepai(&["run", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.path"));
}

#[test]
fn delta_and_q_together_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_ring(r#", "delta": 0.1, "Q": 1.0, "shots": 1"#));
    let o = tepai(&["run", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
}

#[test]
fn oversized_register_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "spin_ring", "n": 26, "seed": 1}, "T": 0.1, "N": 10, "delta": "pi/8",
            "shots": 1, "observable": "X0"}"#,
    );
    let o = tepai(&["run", s(&cfg), "--output", s(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exact_rejects_large_registers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "spin_ring", "n": 13, "seed": 1}, "T": 0.1, "N": 10, "observable": "X0",
            "protocol": "trotter"}"#,
    );
    assert_eq!(tepai(&["exact", s(&cfg)]).status.code(), Some(3));
}

#[test]
fn run_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &small_ring(r#", "delta": "pi/16", "shots": 700, "log_gates": true"#),
    );
    let out = dir.path().join("run");
    assert!(tepai(&["run", s(&cfg), "--output", s(&out), "--workers", "3"]).status.success());
    let shots = fs::read_to_string(out.join("shots.jsonl")).unwrap();
    assert_eq!(shots.lines().count(), 700);
    let first: serde_json::Value = serde_json::from_str(shots.lines().next().unwrap()).unwrap();
    assert!(first["gates"].is_array());

    let o = tepai(&["audit", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    // corrupt one value
    let mut lines: Vec<String> = shots.lines().map(String::from).collect();
    let mut v: serde_json::Value = serde_json::from_str(&lines[5]).unwrap();
    v["value"] = serde_json::json!(v["value"].as_f64().unwrap() + 1.0);
    lines[5] = v.to_string();
    fs::write(out.join("shots.jsonl"), lines.join("\n") + "\n").unwrap();
    assert_eq!(tepai(&["audit", s(&out)]).status.code(), Some(1));
}

#[test]
fn q_config_sets_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_ring(r#", "Q": 0.5, "shots": 0"#));
    let out = dir.path().join("run");
    assert!(tepai(&["run", s(&cfg), "--output", s(&out)]).status.success());
    let head: Header = serde_json::from_str(&fs::read_to_string(out.join("header.json")).unwrap()).unwrap();
    assert!((head.overhead_asymptotic.unwrap() - 0.5f64.exp()).abs() < 1e-12);
}

#[test]
fn qdrift_subcommand_runs() {
    let out = tempfile::tempdir().unwrap();
    let o = tepai(&[
        "qdrift",
        s(&configs_dir().join("qdrift_xz.json")),
        "--output",
        s(out.path()),
        "--shots",
        "500",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum: Summary = serde_json::from_slice(&fs::read(out.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(sum.protocol, "qdrift");
    assert_eq!(sum.mean_nu, Some(200.0));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (head, rows)
}

fn col(head: &[String], name: &str) -> usize {
    head.iter().position(|h| h == name).unwrap()
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &small_ring(r#", "delta": "pi/16", "sweep": {"axis": "delta", "values": []}"#),
    );
    let out = dir.path().join("sw");
    assert!(tepai(&["sweep", s(&cfg), "--output", s(&out)]).status.success());
    let (head, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(head[0], "T");
    assert!(rows.is_empty());
}

#[test]
fn time_sweep_is_linear_in_gates_and_exponential_in_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_ring(r#", "delta": "pi/64""#));
    let out = dir.path().join("sw");
    let o = tepai(&[
        "sweep",
        s(&cfg),
        "--axis",
        "T",
        "--values",
        "0.5,1,1.5,2",
        "--steps",
        "2000",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (head, rows) = read_csv(&out.join("sweep.csv"));
    let (t, c, nu, g) = (col(&head, "T"), col(&head, "c_norm_avg"), col(&head, "nu_inf"), col(&head, "overhead_asymptotic"));
    let delta = std::f64::consts::PI / 64.0;
    for r in &rows {
        let ct = r[c] * r[t];
        assert!((r[nu] / ct - (3.0 - delta.cos()) / delta.sin()).abs() < 1e-9);
        assert!((r[g].ln() / ct - 2.0 * (delta / 2.0).tan()).abs() < 1e-12);
    }
}

#[test]
fn trajectory_at_zero_is_the_initial_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &small_ring(r#", "delta": "pi/16", "shots": 300, "trajectory": {"times": [0], "reference_steps": [10], "exact": true}"#),
    );
    let out = dir.path().join("tr");
    let o = tepai(&["trajectory", s(&cfg), "--output", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (head, rows) = read_csv(&out.join("trajectory.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][col(&head, "mean")], 1.0);
    assert_eq!(rows[0][col(&head, "std_error")], 0.0);
    assert_eq!(rows[0][col(&head, "trotter_10_mean")], 1.0);
    assert!((rows[0][col(&head, "exact")] - 1.0).abs() < 1e-12);
}

#[test]
fn trajectory_rejects_unsorted_times() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_ring(r#", "delta": "pi/16", "shots": 3"#));
    let o = tepai(&["trajectory", s(&cfg), "--times", "0.5,0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ftcost_defaults_and_small_tower() {
    let o = tepai(&["ftcost", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["l0"], 9);
    assert_eq!(v["tower_t_per_round"], 243);
    let rows = v["rows"].as_array().unwrap();
    let t = |m: &str| rows.iter().find(|r| r["method"] == m).unwrap()["t_gates"].as_u64().unwrap();
    assert_eq!(t("direct_synthesis"), 2_438_336);
    assert_eq!(t("catalyst_tower"), 298_647);
    assert_eq!(t("trotter_direct"), 328_000_000);

    let o = tepai(&["ftcost", "--l0", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // one CT circuit plus the T gate feeding it
    assert_eq!(v["tower_t_per_round"], 5);
    assert!(String::from_utf8_lossy(&tepai(&["ftcost"]).stdout).contains("catalyst_tower"));
}

#[test]
fn ftcost_off_hierarchy_delta_suggests_a_level() {
    let o = tepai(&["ftcost", "--delta", "pi/250"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("l = 9"));
}

#[test]
fn bundled_configs_parse() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let cfg = tepai::RunConfig::load(&p).unwrap();
            tepai::Prepared::new(cfg).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}

/// The 14-qubit simulation config against a deep continuous-angle Trotter
/// reference. Slow: about a thousand 2700-gate circuits on 14 qubits.
#[test]
fn simulation_config_tracks_deep_trotter() {
    let out = tempfile::tempdir().unwrap();
    let o = tepai(&["run", s(&configs_dir().join("simulation.json")), "--output", s(out.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum: Summary = serde_json::from_slice(&fs::read(out.path().join("summary.json")).unwrap()).unwrap();
    let head: Header = serde_json::from_slice(&fs::read(out.path().join("header.json")).unwrap()).unwrap();
    let seed = match head.config.model {
        tepai::config::ModelConfig::SpinRing { seed, .. } => seed,
        _ => unreachable!(),
    };
    let h = build_spin_ring(14, seed).unwrap();
    let init = StateVector::plus_all(14, 24).unwrap();
    let obs = PauliString::parse("X0", 14).unwrap();
    let reference = run_trotter_reference(
        TrotterTemplate::new(&h, 1.0, 2000).unwrap(),
        &obs,
        &init,
        NoiseModel::disabled(),
        1,
        0,
    )
    .unwrap()
    .mean;
    let (mean, se) = (sum.mean.unwrap(), sum.std_error.unwrap());
    assert!((mean - reference).abs() <= 3.0 * se, "{mean} +- {se} vs {reference}");
}
