//! End-to-end tests of the binary: report content, exit codes, file formats,
//! and output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("segmarket-cli-test-{name}.json"));
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segmarket"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

const EX1: &str = r#"{
  "calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 }
}"#;

const EX2: &str = r#"{
  "calibrate": { "beta": 0.99, "phi": 0.08, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 }
}"#;

#[test]
fn bounds_json_reports_reference_values() {
    let cfg = write_config("bounds-ex1", EX1);
    let out = run(&[
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["pi_low"].as_f64().unwrap() - 0.1647).abs() < 5e-4);
    assert!((doc["pi_high"].as_f64().unwrap() - 0.1802).abs() < 5e-4);
    assert!((doc["q_star"].as_f64().unwrap() - 0.1830).abs() < 5e-4);
    assert!(doc["entry_viable"].as_bool().unwrap());
}

#[test]
fn bounds_json_round_trips_at_full_precision() {
    let cfg = write_config("roundtrip-ex1", EX1);
    let out = run(&[
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let text = stdout(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let reserialized = serde_json::to_string_pretty(&doc).unwrap();
    let doc2: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    // f64 payloads survive the parse/print cycle bit for bit.
    assert_eq!(doc["pi_low"].as_f64(), doc2["pi_low"].as_f64());
    assert_eq!(doc["v_star"].as_f64(), doc2["v_star"].as_f64());
}

#[test]
fn solve_reports_unique_and_triple_counts() {
    let cfg1 = write_config("solve-ex1", EX1);
    let out = run(&[
        "solve",
        "--config",
        cfg1.to_str().unwrap(),
        "--format",
        "csv",
        "--oracle",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let eq_rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("equilibrium,"))
        .collect();
    assert_eq!(eq_rows.len(), 1);
    assert!(eq_rows[0].contains("two-sector-reject"));
    // Oracle drift column present and tiny.
    let drift: f64 = eq_rows[0].rsplit(',').next().unwrap().parse().unwrap();
    assert!(drift.abs() < 1e-6);
    assert!(text
        .lines()
        .any(|l| l.starts_with("rejected,two-sector-accept")));

    let cfg2 = write_config("solve-ex2", EX2);
    let out = run(&[
        "solve",
        "--config",
        cfg2.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("equilibrium,"))
            .count(),
        3
    );
}

#[test]
fn figure_g0_has_no_mixed_zero_crossing_in_example1() {
    let cfg = write_config("figure-ex1", EX1);
    let out = run(&[
        "figure",
        "--config",
        cfg.to_str().unwrap(),
        "--id",
        "G0",
        "--points",
        "600",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mixed: Vec<f64> = text
        .lines()
        .filter(|l| l.contains(",mixed,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!mixed.is_empty());
    let crossings = mixed
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    assert_eq!(crossings, 0, "no mixed equilibrium in this example");
}

#[test]
fn figure_g1_low_crosses_at_reported_p_in_example2() {
    let cfg = write_config("figure-ex2", EX2);
    let out = run(&[
        "figure",
        "--config",
        cfg.to_str().unwrap(),
        "--id",
        "G1-low",
        "--points",
        "1000",
    ]);
    let text = stdout(&out);
    let mut crossing = None;
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts = l.split(',');
            (
                parts.next().unwrap().parse().unwrap(),
                parts.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    for w in rows.windows(2) {
        if (w[0].1 > 0.0) != (w[1].1 > 0.0) {
            crossing = Some(0.5 * (w[0].0 + w[1].0));
        }
    }
    let crossing = crossing.expect("steady-state p exists");
    assert!((crossing - 0.7838).abs() < 2e-3);
}

#[test]
fn figure_disc_loci_cross() {
    let cfg = write_config("figure-disc-ex1", EX1);
    let out = run(&[
        "figure",
        "--config",
        cfg.to_str().unwrap(),
        "--id",
        "disc",
        "--points",
        "200",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let diffs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| {
            let parts: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            parts[1] - parts[2]
        })
        .collect();
    assert!(
        diffs.windows(2).any(|w| (w[0] > 0.0) != (w[1] > 0.0)),
        "male and female loci should cross"
    );
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let cfg = write_config(
        "bad-key",
        r#"{"calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495, "surprise": 1 }}"#,
    );
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("surprise"), "diagnostic names the key: {err}");
}

#[test]
fn unknown_figure_id_exits_2() {
    let cfg = write_config("figure-bad-id", EX1);
    let out = run(&["figure", "--config", cfg.to_str().unwrap(), "--id", "G9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_bound_exits_3() {
    let cfg = write_config(
        "nobound",
        r#"{"calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 2.0, "w_l": 0.495 }}"#,
    );
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_is_byte_deterministic_per_seed() {
    let cfg = write_config(
        "simulate-mc",
        r#"{
  "calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 },
  "sim": { "mode": "monte_carlo", "n_agents": 2000, "periods": 60, "seed": 5 }
}"#,
    );
    let a = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    let b = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
    // CSV has the expected header and LF endings only.
    let text = stdout(&a);
    assert!(text.starts_with("period,pi,u_q,u_u,e_qh,e_ql,e_uh,e_ul\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn groups_quota_reports_zero_survivors() {
    let cfg = write_config("groups-quota", EX1);
    let out = run(&["groups", "--config", cfg.to_str().unwrap(), "--quota"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("asymmetric_survivors,0\n"));
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let cfg = write_config("sweep-ex1", EX1);
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "psi",
        "--from",
        "0.1",
        "--to",
        "0.3",
        "--steps",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("0.100000,"));
}

#[test]
fn generic_grid_signal_accepted() {
    // Triangular densities tabulated on a coarse grid solve close to the
    // closed-form variant.
    let cfg = write_config(
        "generic-signal",
        r#"{
  "calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 },
  "signal": {
    "kind": "generic",
    "grid":      [0.0, 0.25, 0.5, 0.75, 1.0],
    "density_q": [0.0, 0.5,  1.0, 1.5,  2.0],
    "density_u": [2.0, 1.5,  1.0, 0.5,  0.0]
  }
}"#,
    );
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.starts_with("equilibrium,two-sector-reject"))
        .expect("reject equilibrium");
    let pi: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((pi - 0.1647).abs() < 5e-3);
}

#[test]
fn flow_mode_converges_to_equilibrium_policy() {
    let cfg = write_config(
        "simulate-flow",
        r#"{
  "calibrate": { "beta": 0.9, "phi": 0.06, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 },
  "sim": { "mode": "flow", "periods": 800, "policy": { "equilibrium": 0 } }
}"#,
    );
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let pi: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((pi - 0.1647).abs() < 1e-3, "flow limit {pi}");
}

#[test]
fn groups_oracle_column_present() {
    let cfg = write_config("groups-oracle", EX1);
    let out = run(&[
        "groups",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--oracle",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().ends_with(",oracle_drift"));
    let sym = text
        .lines()
        .find(|l| l.starts_with("symmetric-"))
        .expect("symmetric row");
    let drift: f64 = sym.rsplit(',').next().unwrap().parse().unwrap();
    assert!(drift.abs() < 1e-6);
}

#[test]
fn log_env_var_enables_diagnostics() {
    let cfg = write_config("log-env", EX1);
    let out = Command::new(env!("CARGO_BIN_EXE_segmarket"))
        .args(["bounds", "--config", cfg.to_str().unwrap()])
        .env("SEGMARKET_LOG", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("[segmarket]"));
}

#[test]
fn fragility_mode_runs_via_cli() {
    let cfg = write_config(
        "fragility",
        r#"{
  "calibrate": { "beta": 0.99, "phi": 0.08, "r": 0.75, "psi": 0.25, "b": 0.2, "y_l": 0.5, "w_l": 0.495 },
  "sim": { "mode": "fragility", "periods": 200, "epsilon": 0.001 }
}"#,
    );
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("period,pi_f,pi_m,alpha_f,alpha_m,p\n"));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("diverged="));
}
