//! End-to-end checks of the command-line interface: argument handling, the
//! documented exit codes (0 success / 1 config error / 2 numerical failure),
//! output-directory precedence, and the compare/slice subcommands operating
//! on real snapshot files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowrank-bgk"))
}

/// Fresh scratch directory per test so parallel tests never share state.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lowrank-bgk-cli-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const TINY_RUN: &str = "\
scenario = custom
nx = 8
ny = 8
nv = 8
rank = 2
eps = 0.1
dt = 1e-3
t_end = 3e-3
diag_every = 1
snap_every = 2
";

#[test]
fn run_writes_diagnostics_and_snapshots() {
    let dir = scratch("run-basic");
    let cfg = write_config(&dir, "tiny.cfg", TINY_RUN);
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .env_remove("LOWRANK_BGK_OUTDIR")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,mass,momentum_x,momentum_y,max_dev,moment_err,p1_sigma_err"
    );
    // t = 0 row plus one row per step at diag_every = 1.
    assert_eq!(lines.count(), 4);
    assert!(out_dir.join("final.snap").is_file());
    assert!(out_dir.join("snapshot_000002.snap").is_file());
    assert!(stdout(&out).contains("3 steps"));
}

#[test]
fn out_dir_precedence_cli_env_config() {
    let dir = scratch("run-outdir");
    let cfg = write_config(
        &dir,
        "o.cfg",
        &format!("{TINY_RUN}out_dir = {}\n", dir.join("from-config").display()),
    );
    // Config key alone.
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env_remove("LOWRANK_BGK_OUTDIR")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.join("from-config/final.snap").is_file());
    // Env var overrides the config key.
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("LOWRANK_BGK_OUTDIR", dir.join("from-env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.join("from-env/final.snap").is_file());
    // --out beats both.
    let out = bin()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("from-cli").to_str().unwrap(),
        ])
        .env("LOWRANK_BGK_OUTDIR", dir.join("ignored"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.join("from-cli/final.snap").is_file());
    assert!(!dir.join("ignored").exists());
}

#[test]
fn config_errors_exit_1() {
    let dir = scratch("run-config-errors");
    // Unknown preset.
    let out = bin()
        .args(["run", "no-such-preset"])
        .env("LOWRANK_BGK_OUTDIR", dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no-such-preset"));
    // Bad override key.
    let out = bin()
        .args(["run", "custom", "--override", "bogus=1"])
        .env("LOWRANK_BGK_OUTDIR", dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Invalid value for a known key.
    let out = bin()
        .args(["run", "custom", "--override", "rank=0"])
        .env("LOWRANK_BGK_OUTDIR", dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Config file without a scenario key.
    let cfg = write_config(&dir, "noscenario.cfg", "nx = 8\n");
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("LOWRANK_BGK_OUTDIR", dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("scenario"));
}

#[test]
fn numerical_failure_exits_2() {
    // dt * rho / eps = 1 makes the backward coupling solve singular; the run
    // must abort with the numerical-failure code, not a config error.
    let dir = scratch("run-singular");
    let out = bin()
        .args([
            "run",
            "custom",
            "--override",
            "eps=1e-3",
            "--override",
            "dt=1e-3",
            "--override",
            "t_end=2e-3",
        ])
        .env("LOWRANK_BGK_OUTDIR", dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn compare_reports_moment_differences() {
    let dir = scratch("compare");
    let cfg = write_config(&dir, "tiny.cfg", TINY_RUN);
    for (sub, steps) in [("a", "1e-3"), ("b", "3e-3")] {
        let out = bin()
            .args([
                "run",
                cfg.to_str().unwrap(),
                "--override",
                &format!("t_end={steps}"),
                "--out",
                dir.join(sub).to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let a = dir.join("a/final.snap");
    let b = dir.join("b/final.snap");
    let out = bin()
        .args(["compare", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rho"), "unexpected output: {text}");
    // Same snapshot twice: identical moments.
    let out = bin()
        .args(["compare", a.to_str().unwrap(), a.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0.000000e0"), "{}", stdout(&out));
    // Corrupt file: not a snapshot.
    let junk = write_config(&dir, "junk.snap", "not a snapshot");
    let out = bin()
        .args(["compare", a.to_str().unwrap(), junk.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slice_emits_csv_planes() {
    let dir = scratch("slice");
    let cfg = write_config(&dir, "tiny.cfg", TINY_RUN);
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let snap = out_dir.join("final.snap");
    // Fixed spatial node: g over the velocity grid.
    let out = bin()
        .args(["slice", snap.to_str().unwrap(), "--at-x", "2,3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("v,w,g"), "unexpected slice header: {text}");
    assert_eq!(text.lines().count(), 1 + 8 * 8);
    // Fixed velocity node: g over the spatial grid, written to a file.
    let csv_path = dir.join("plane.csv");
    let out = bin()
        .args([
            "slice",
            snap.to_str().unwrap(),
            "--at-v",
            "0,7",
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("x,y,g"));
    assert_eq!(text.lines().count(), 1 + 8 * 8);
    // Exactly one plane must be selected.
    let out = bin().args(["slice", snap.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Out-of-range index.
    let out = bin()
        .args(["slice", snap.to_str().unwrap(), "--at-x", "99,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slice_rejects_moment_only_snapshots() {
    let dir = scratch("slice-fluid");
    let out_dir = dir.join("out");
    let out = bin()
        .args([
            "run",
            "shear-flow",
            "--override",
            "solver=fluid",
            "--override",
            "nx=16",
            "--override",
            "ny=16",
            "--override",
            "t_end=1e-3",
            "--override",
            "dt=1e-3",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let snap = out_dir.join("final.snap");
    let out = bin()
        .args(["slice", snap.to_str().unwrap(), "--at-x", "1,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).to_lowercase().contains("kinetic"), "{}", stderr(&out));
}

#[test]
fn help_and_bad_usage_codes() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("run"));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
