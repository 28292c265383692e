//! Command-line behavior: exit codes, config-file semantics and the
//! event-log dump.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tdc-forge"));
    c.env_remove("TDC_FORGE_CONFIG");
    c
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["simulate", "--tin", "0ns"],
        &["simulate", "--tin", "1.2345678ns"], // not integer femtoseconds
        &["simulate", "--tin", "100"],         // missing unit
        &["simulate"],                         // --tin required
        &[
            "sweep",
            "--tmin",
            "1ns",
            "--tmax",
            "2ns",
            "--step",
            "1ns",
            "--phase",
            "0fs",
            "--seed",
            "1",
            "--out",
            "/dev/null",
        ],
        &["no-such-command"],
    ];
    for args in cases {
        let out = bin().args(*args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn range_exceeded_exits_1() {
    let dir = tmp_dir("cli_range");
    let cfg_path = dir.join("narrow.json");
    std::fs::write(&cfg_path, r#"{"coarse_width": 3}"#).unwrap();
    let out = bin()
        .args(["simulate", "--tin", "100ns", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("coarse counter range"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tmp_dir("cli_unknown_key");
    let cfg_path = dir.join("bad.json");
    std::fs::write(&cfg_path, r#"{"f_clk_mhz": 800}"#).unwrap();
    let out = bin()
        .args(["simulate", "--tin", "1.25ns", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f_clk_mhz"));
}

#[test]
fn config_file_reparameterizes_the_converter() {
    let dir = tmp_dir("cli_config");
    let cfg_path = dir.join("slow.json");
    // 400 MHz clock, 2 lines x 5 taps: scale_k = 10, t_clk = 2.5 ns
    std::fs::write(
        &cfg_path,
        r#"{
          "f_clk_hz": 400000000,
          "fine": {
            "n_lines": 2,
            "taps_per_line": 5,
            "cell_delay": "500ps",
            "line_offset": "250ps"
          }
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["simulate", "--tin", "2.5ns", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["n_c"], 1);
    assert_eq!(record["d_out"], 10);
    assert_eq!(record["time_fs"], 2_500_000);
}

#[test]
fn env_var_supplies_the_config_path() {
    let dir = tmp_dir("cli_env");
    let cfg_path = dir.join("env.json");
    std::fs::write(
        &cfg_path,
        r#"{"fine": {"n_lines": 1, "line_offset": "0fs"}}"#,
    )
    .unwrap();
    let out = bin()
        .env("TDC_FORGE_CONFIG", &cfg_path)
        .args(["simulate", "--tin", "1.25ns"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["d_out"], 20); // one line of 20 taps
}

#[test]
fn explicit_flags_override_config_values() {
    let dir = tmp_dir("cli_override");
    let cfg_path = dir.join("seeded.json");
    std::fs::write(&cfg_path, r#"{"density": {"samples": 500, "seed": 1}}"#).unwrap();
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");
    // flag seed 9 must beat config seed 1
    for (path, seed) in [(&csv_a, "9"), (&csv_b, "9")] {
        let out = bin()
            .args(["density", "--seed", seed, "--out"])
            .arg(path)
            .args(["--config"])
            .arg(&cfg_path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read_to_string(&csv_a).unwrap();
    assert_eq!(a, std::fs::read_to_string(&csv_b).unwrap());
    assert!(a.contains("samples=500 seed=9"), "echo line missing: {a}");
}

#[test]
fn event_dump_requires_structural_mode() {
    let dir = tmp_dir("cli_events");
    let out = bin()
        .args(["simulate", "--tin", "1ns", "--events"])
        .arg(dir.join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn event_dump_lists_applied_transitions_in_order() {
    let dir = tmp_dir("cli_events_ok");
    let log_path = dir.join("events.csv");
    let out = bin()
        .args([
            "simulate",
            "--tin",
            "2.5ns",
            "--mode",
            "structural",
            "--events",
        ])
        .arg(&log_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let log = std::fs::read_to_string(&log_path).unwrap();
    let mut lines = log.lines();
    assert_eq!(lines.next(), Some("fs,net,level"));
    let mut last_fs = 0i64;
    let mut saw_tf1 = false;
    for line in lines {
        let mut cols = line.split(',');
        let fs: i64 = cols.next().unwrap().parse().unwrap();
        let net = cols.next().unwrap();
        let level = cols.next().unwrap();
        assert!(fs >= last_fs, "log out of order: {line}");
        assert!(level == "0" || level == "1");
        saw_tf1 |= net == "tpg_tf1";
        last_fs = fs;
    }
    assert!(saw_tf1, "expected tpg_tf1 transitions in the log");
}

#[test]
fn sensor_rows_carry_their_status() {
    let dir = tmp_dir("cli_sensor");
    let cfg_path = dir.join("narrow.json");
    std::fs::write(&cfg_path, r#"{"coarse_width": 3}"#).unwrap();
    let csv = dir.join("sensor.csv");
    let out = bin()
        .args([
            "sensor", "--alpha", "1000", "--rmin", "1000", "--rmax", "1000000", "--points", "4",
            "--log", "--config",
        ])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("r_ohms,t_fs,d_out,time_fs,status"));
    assert!(text.contains(",ok"));
    assert!(text.contains(",range_exceeded"));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("out of range"), "summary: {summary}");
}

#[test]
fn one_period_interval_reports_the_scale_factor() {
    let out = bin()
        .args(["simulate", "--tin", "1.25ns"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["d_out"], 80);
}

#[test]
fn wide_log_sensor_sweep_is_monotone_until_flagged() {
    let dir = tmp_dir("cli_sensor_wide");
    let csv = dir.join("wide.csv");
    let out = bin()
        .args([
            "sensor", "--alpha", "1e6", "--rmin", "100", "--rmax", "1e9", "--points", "10",
            "--log", "--out",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 10);
    let mut last_code = -1i64;
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        match cols[4] {
            // "overflow" marks codes the configured datapath width could
            // not have represented; the model-level code is still exact
            "ok" | "overflow" => {
                let code: i64 = cols[2].parse().unwrap();
                assert!(code >= last_code, "codes not monotone: {row}");
                last_code = code;
            }
            "range_exceeded" | "below_range" => {}
            other => panic!("unexpected status {other}"),
        }
    }
}

#[test]
fn overflowing_datapath_exits_1_with_the_record_printed() {
    let dir = tmp_dir("cli_overflow");
    let cfg_path = dir.join("tiny_adder.json");
    // 4-bit adders cannot hold the 80-count fine totals
    std::fs::write(
        &cfg_path,
        r#"{"fine": {"adder_width": 4, "counter_width": 4}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["simulate", "--tin", "100ns", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["overflow"], true);
}
