mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::example_config;
use policy_game::io::{manifest_without_timestamp, read_trajectory, MANIFEST_NAME};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_policy-game")).args(args).output().expect("binary runs")
}

fn text(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn check_reports_every_label_and_matches_its_exit_code() {
    let out = bin(&["check"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for label in ["(a)", "(b)", "(c)", "(d)", "(e)"] {
        assert!(stdout.lines().any(|l| l.starts_with(label)), "{stdout}");
    }
    let failed = stdout.lines().any(|l| l.starts_with('(') && l.contains(" FAIL "));
    assert_eq!(out.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn unknown_keys_are_named_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[calibration]\nc = 0.6\nspeed = 2\n").unwrap();
    let out = bin(&["run", text(&cfg), "--out", text(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("speed") && stderr.contains("line 3"), "{stderr}");
}

#[test]
fn out_of_range_calibration_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[calibration]\nc = 1.5\n").unwrap();
    let out = bin(&["run", text(&cfg), "--out", text(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c"));
    assert!(!dir.path().join("o").join(MANIFEST_NAME).exists());
}

#[test]
fn json_output_with_horizon_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    fs::write(
        &cfg,
        "[[scenario]]\nname = \"cut\"\nregime = \"emu\"\npolicy_mode = \"nash\"\nshock = { kind = \"debt_target\", country = \"home\", delta = 0.03 }\n",
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = bin(&["run", text(&cfg), "--out", text(&out_dir), "--format", "json", "--horizon", "20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = read_trajectory(&out_dir.join("cut/trajectory.json")).unwrap();
    assert_eq!(cols.len(), 23);
    assert_eq!(rows.len(), 20);
    assert!(out_dir.join("cut/diagnostics.json").exists());
    assert!(out_dir.join("cut/plot/y_home.dat").exists());
}

#[test]
fn batch_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = example_config();
    let ra = bin(&["run", text(&cfg), "--out", text(&a), "--jobs", "1"]);
    let rb = bin(&["run", text(&cfg), "--out", text(&b), "--jobs", "4"]);
    assert_eq!(ra.status.code(), rb.status.code());
    let (ma, mb) = (manifest_without_timestamp(&a.join(MANIFEST_NAME)).unwrap(), manifest_without_timestamp(&b.join(MANIFEST_NAME)).unwrap());
    assert_eq!(ma, mb);
    for s in ["emu_nash_debt_cut", "sm_stackelberg_debt_cut"] {
        let path = |root: &Path| root.join(s).join("trajectory.csv");
        assert_eq!(fs::read(path(&a)).unwrap(), fs::read(path(&b)).unwrap());
    }
}

#[test]
fn inspection_commands_cover_every_scenario() {
    let cfg = example_config();
    let steady = bin(&["steady", text(&cfg)]);
    let spectrum = bin(&["spectrum", text(&cfg)]);
    assert!(steady.status.success() && spectrum.status.success());
    let (steady, spectrum) = (String::from_utf8_lossy(&steady.stdout), String::from_utf8_lossy(&spectrum.stdout));
    for name in ["baseline", "flexible_passive_debt_cut", "sm_dominated_debt_cut"] {
        assert!(steady.lines().any(|l| l == name), "{steady}");
        assert!(spectrum.lines().any(|l| l.starts_with(name)), "{spectrum}");
    }
}
