// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn chainloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainloc"))
        .args(args)
        .env_remove("CHAINLOC_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

// Small enough to run in well under a second.
const SMALL: &str = r#"
[system]
n_sites = 6
n_excitations = 2
directionality = 0.5
xi_over_pi = 0.125
w_over_pi = 0.8

[initial]
excited_sites = [3, 4]

[grid]
t_max = 4.0
n_steps = 8

[ensemble]
realizations = 6
seed = 11

[observables]
emit = ["populations", "g2", "g3", "norms"]
r_max = 3
snapshot_times = [2.0]
crossing = true
"#;

const CSV_FILES: [&str; 5] = ["populations.csv", "g2.csv", "g3.csv", "norms.csv", "snapshots.csv"];

#[test]
fn presets_list_names_every_bundled_config() {
    let out = chainloc(&["presets", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["fig2", "fig2b", "fig3", "fig4", "fig5", "fig6", "fig7"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing:\n{text}");
    }
}

#[test]
fn emitted_preset_validates_with_expected_dimension() {
    let tmp = TempDir::new().unwrap();
    let out = chainloc(&["presets", "emit", "fig2"]);
    assert!(out.status.success());
    let path = write(tmp.path(), "fig2.toml", &stdout(&out));
    let out = chainloc(&["validate", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("dim=435").count(), 2, "{text}");
    assert!(text.contains("directionality_0:") && text.contains("directionality_0.5:"));
}

#[test]
fn every_preset_validates() {
    let tmp = TempDir::new().unwrap();
    let listing = stdout(&chainloc(&["presets", "list"]));
    for name in listing.lines().filter_map(|l| l.split_whitespace().next()) {
        let text = stdout(&chainloc(&["presets", "emit", name]));
        let path = write(tmp.path(), &format!("{name}.toml"), &text);
        let out = chainloc(&["validate", &path]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
    }
}

#[test]
fn unknown_preset_is_a_config_error() {
    let out = chainloc(&["presets", "emit", "fig99"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("fig2"));
}

#[test]
fn invalid_configs_exit_with_one_and_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("n_excitations = 2", "n_excitations = 7", "n_excitations"),
        ("w_over_pi = 0.8", "w_over_pi = 2.0", "w_over_pi"),
        ("seed = 11", "seed = 11\ncolour = 3", "colour"),
        ("excited_sites = [3, 4]", "excited_sites = [3, 9]", "excited_sites"),
        ("t_max = 4.0", "t_max = -4.0", "grid"),
    ];
    for (from, to, field) in cases {
        let path = write(tmp.path(), "bad.toml", &SMALL.replace(from, to));
        let out = chainloc(&["validate", &path]);
        assert_eq!(out.status.code(), Some(1), "{to}: {}", stderr(&out));
        assert!(stderr(&out).contains(field), "{to}: {}", stderr(&out));
        let out = chainloc(&["run", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{to}");
    }
}

#[test]
fn parse_errors_report_the_line() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "bad.toml", &SMALL.replace("seed = 11", "seed = eleven"));
    let out = chainloc(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

#[test]
fn dimensional_rates_need_the_flag() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "g.toml", &SMALL.replace("n_sites = 6", "n_sites = 6\ngamma = 2.0"));
    let out = chainloc(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--allow-dimensional"));
    let out = chainloc(&["validate", &path, "--allow-dimensional"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = chainloc(&["validate", "/nonexistent/chainloc.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "small.toml", SMALL);
    let blocker = write(tmp.path(), "file", "");
    let out = chainloc(&["run", &path, "--out", &format!("{blocker}/sub")]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn run_writes_the_documented_schema() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "small.toml", SMALL);
    let dir = tmp.path().join("out");
    let out = chainloc(&["run", &path, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("dim=15 realizations=6"), "{report}");
    assert!(report.contains("G2 crossing times: r=1:"), "{report}");

    let first_line = |name: &str| fs::read_to_string(dir.join(name)).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(first_line("populations.csv"), "t,P_1,P_2,P_3,P_4,P_5,P_6");
    assert_eq!(first_line("snapshots.csv"), "t,P_1,P_2,P_3,P_4,P_5,P_6");
    assert_eq!(first_line("g2.csv"), "t,r1,r2,r3");
    assert_eq!(first_line("g3.csv"), "t,value");
    assert_eq!(first_line("norms.csv"), "t,norm,stderr");

    for name in CSV_FILES {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        assert!(!text.contains('\r') && text.ends_with('\n'), "{name}");
        let width = text.lines().next().unwrap().split(',').count();
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), width, "{name}: {line}");
            assert!(cells.iter().all(|c| c.parse::<f64>().is_ok()), "{name}: {line}");
        }
    }
    assert_eq!(fs::read_to_string(dir.join("populations.csv")).unwrap().lines().count(), 10);
    assert_eq!(fs::read_to_string(dir.join("snapshots.csv")).unwrap().lines().nth(1).unwrap().split(',').next(), Some("2"));

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap();
    let mut keys: Vec<&str> = meta.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "averaging",
            "complete",
            "config",
            "crossings",
            "dim",
            "label",
            "max_norm_increase",
            "realizations_completed",
            "realizations_requested",
            "schema",
            "seed",
            "standard_errors",
            "version",
        ]
    );
    assert_eq!(meta["schema"], 1);
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["dim"], 15);
    assert_eq!(meta["complete"], true);
    assert_eq!(meta["realizations_completed"], 6);
    assert_eq!(meta["averaging"], "cumulant-then-average");
    assert_eq!(meta["crossings"]["g2"].as_array().unwrap().len(), 3);
    assert_eq!(meta["standard_errors"]["populations"].as_array().unwrap().len(), 9);
    assert_eq!(meta["config"]["system"]["n_sites"], 6);

    let clean: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("clean/metadata.json")).unwrap()).unwrap();
    assert_eq!(clean["config"]["system"]["w_over_pi"], 0.0);
    assert_eq!(clean["realizations_completed"], 1);
}

#[test]
fn config_echo_reproduces_byte_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "small.toml", SMALL);
    let first = tmp.path().join("first");
    assert!(chainloc(&["run", &path, "--out", first.to_str().unwrap()]).status.success());

    let echo = first.join("config.toml");
    let out = chainloc(&["validate", echo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let second = tmp.path().join("second");
    assert!(chainloc(&["run", echo.to_str().unwrap(), "--out", second.to_str().unwrap()]).status.success());
    for name in CSV_FILES {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sweep_points_echo_their_resolved_value() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL}\n[sweep]\naxis = \"w_over_pi\"\nvalues = [0.1, 0.5]\n");
    let path = write(tmp.path(), "sweep.toml", &text);
    let dir = tmp.path().join("out");
    let out = chainloc(&["run", &path, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for (label, w) in [("w_over_pi_0.1", 0.1), ("w_over_pi_0.5", 0.5)] {
        let echo = fs::read_to_string(dir.join(label).join("config.toml")).unwrap();
        assert!(!echo.contains("[sweep]"), "{echo}");
        assert!(echo.contains(&format!("w_over_pi = {w}")), "{echo}");
        assert!(dir.join(label).join("clean/populations.csv").exists());
    }
}

#[test]
fn worker_count_from_the_environment_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "small.toml", SMALL);
    let run_with = |workers: &str| {
        let dir = tmp.path().join(format!("w{workers}"));
        let out = Command::new(env!("CARGO_BIN_EXE_chainloc"))
            .args(["run", &path, "--out", dir.to_str().unwrap()])
            .env("CHAINLOC_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        dir
    };
    let (a, b) = (run_with("1"), run_with("3"));
    for name in CSV_FILES {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}
