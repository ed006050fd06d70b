//! End-to-end checks of the `pistonfilm` binary: argument handling, strict
//! config parsing, output layout, and run-to-run reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pistonfilm"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small, fast simulate setup: coarse mesh, four steps, two snapshots.
const SMALL_SIM: &str = r#"
[mesh]
n_theta = 24
n_y = 16

[dynamics]
periods = 1
steps_per_period = 4
snapshot_interval_deg = 180.0
"#;

#[test]
fn help_lists_every_mode() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for mode in ["solve", "bench", "joint-bench", "simulate"] {
        assert!(text.contains(mode), "help text misses `{mode}`:\n{text}");
    }
}

#[test]
fn effective_config_is_a_fixed_point() {
    // Running once echoes the fully-defaulted config; feeding that file back
    // in must reproduce it byte for byte.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nn_theta = 24\nn_y = 16\n\n[solver]\ntol = 1e-5\n",
    );
    let first = dir.path().join("first");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&first)
        .output()
        .unwrap();
    assert!(out.status.success(), "solve failed: {}", stderr_of(&out));

    let echoed = first.join("config_used.toml");
    let second = dir.path().join("second");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&echoed)
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap();
    assert!(out.status.success(), "re-run failed: {}", stderr_of(&out));

    let a = fs::read(&echoed).unwrap();
    let b = fs::read(second.join("config_used.toml")).unwrap();
    assert_eq!(a, b, "config echo is not a fixed point");

    // Spot-check that the overrides survived the round trip.
    let table: toml::Value = toml::from_str(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(table["mesh"]["n_theta"].as_integer(), Some(24));
    assert_eq!(table["solver"]["tol"].as_float(), Some(1e-5));
}

#[test]
fn unknown_config_keys_abort_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\ntoll = 1e-6\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!out.status.success(), "typo in config was accepted");
    assert!(
        stderr_of(&out).contains("unknown field"),
        "error does not name the bad key: {}",
        stderr_of(&out)
    );
    assert!(!out_dir.exists(), "output directory was created for a bad config");
}

#[test]
fn invalid_config_values_abort_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\ntol = -1.0\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["bench", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!out.status.success(), "negative tolerance was accepted");
    assert!(!out_dir.exists(), "output directory was created for a bad config");
}

#[test]
fn missing_config_file_is_reported_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["solve", "--config"])
        .arg(dir.path().join("nope.toml"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("nope.toml"), "{}", stderr_of(&out));
}

#[test]
fn repeat_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SIM);
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["--workers", "2", "--seed", "7"])
            .output()
            .unwrap();
        assert!(out.status.success(), "simulate failed: {}", stderr_of(&out));
        outputs.push(out_dir);
    }

    let mut names: Vec<String> = fs::read_dir(&outputs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(
        names.iter().any(|n| n.starts_with("snapshot_")),
        "expected snapshot files, got {names:?}"
    );
    for name in &names {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn worker_count_changes_only_the_recorded_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[bench]
meshes = [[24, 16]]
preconditioners = ["jacobian", "assor2"]
omegas = [1.8]
"#,
    );
    let mut payloads = Vec::new();
    for (name, workers) in [("w1", "1"), ("w3", "3")] {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["bench", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(out.status.success(), "bench failed: {}", stderr_of(&out));
        let text = fs::read_to_string(out_dir.join("bench.csv")).unwrap();
        assert!(
            text.contains(&format!("# workers: {workers}\n")),
            "worker count not recorded in header"
        );
        let payload: String = text
            .lines()
            .filter(|l| !l.starts_with("# workers:"))
            .collect::<Vec<_>>()
            .join("\n");
        payloads.push(payload);
    }
    assert_eq!(
        payloads[0], payloads[1],
        "bench results depend on the worker count"
    );
}

#[test]
fn workers_env_var_is_honoured_when_no_flag_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[bench]\nmeshes = [[24, 16]]\npreconditioners = [\"jacobian\"]\n",
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["bench", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .env("PISTONFILM_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "bench failed: {}", stderr_of(&out));
    let text = fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    assert!(text.contains("# workers: 2\n"), "env override ignored:\n{text}");
}

#[test]
fn empty_bench_grid_yields_only_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[bench]\nmeshes = []\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["bench", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "bench failed: {}", stderr_of(&out));
    let text = fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("column header");
    assert!(header.starts_with("case,"), "unexpected header {header}");
    assert_eq!(lines.next(), None, "empty sweep produced data rows");
}

#[test]
fn seed_flag_is_recorded_in_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nn_theta = 24\nn_y = 16\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "41"])
        .output()
        .unwrap();
    assert!(out.status.success(), "solve failed: {}", stderr_of(&out));
    let text = fs::read_to_string(out_dir.join("solve_summary.csv")).unwrap();
    assert!(text.contains("# seed: 41\n"), "seed missing from header:\n{text}");
}

#[test]
fn solve_outputs_cover_every_mesh_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nn_theta = 24\nn_y = 16\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "solve failed: {}", stderr_of(&out));

    let text = fs::read_to_string(out_dir.join("pressure.csv")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("i,"))
        .collect();
    assert_eq!(rows.len(), 24 * 16, "one row per node expected");
    for row in &rows {
        let p: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(p.is_finite() && p >= 0.0, "bad pressure row: {row}");
    }
    assert!(out_dir.join("pressure_map.gp").exists());
    assert!(out_dir.join("residuals.csv").exists());
}

#[test]
fn disabled_outputs_are_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nn_theta = 24\nn_y = 16\n\n[outputs]\npressure = false\nresiduals = false\nplots = false\n",
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "solve failed: {}", stderr_of(&out));
    assert!(out_dir.join("solve_summary.csv").exists());
    assert!(!out_dir.join("pressure.csv").exists());
    assert!(!out_dir.join("residuals.csv").exists());
    assert!(!out_dir.join("pressure_map.gp").exists());
}
