use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use adamomentum::cli::{execute, preset, write_outcome, Command, ExperimentConfig, TRAJECTORY_HEADER};
use proptest::prelude::*;
use serde_json::Value;

fn bench(args: &[&str], dir: &Path) -> std::process::Output {
    Proc::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("bench runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn small(problem: &str, optimizers: &str, run: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!("[problem]\n{problem}\n\n{optimizers}\n\n[run]\n{run}\n")).unwrap()
}

#[test]
fn fig4_race_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["race", "--preset", "fig4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = fs::read_to_string(dir.path().join("race.csv")).unwrap();
    assert_eq!(got, include_str!("golden/fig4_race.csv"));
    let rows: Vec<&str> = got.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("adamomentum_0.1,"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert!(bench(&["run", "--preset", "fig4", "--seed", "3"], dir).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7, "{names:?}");
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn manifest_records_hash_seed_and_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bench(&["run", "--preset", "sphere", "--seed", "9"], dir.path()).status.success());
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "run");
    assert_eq!(m["master_seed"], 9);
    assert_eq!(m["library_version"], env!("CARGO_PKG_VERSION"));
    let mut cfg = preset("sphere").unwrap();
    assert_ne!(m["config_sha256"], cfg.hash());
    cfg.run.seed = 9;
    assert_eq!(m["config_sha256"], cfg.hash());
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(files.contains(&"trajectory.csv"));
    let copied = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&copied).unwrap(), cfg);

    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(TRAJECTORY_HEADER));
    assert_eq!(csv.lines().count(), 501);
}

#[test]
fn config_file_and_bad_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, preset("sphere").unwrap().to_toml().unwrap().replace("steps = 500", "steps = 5\nstpes = 1")).unwrap();
    let out = bench(&["run", "--config", path.to_str().unwrap()], &dir.path().join("o"));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stpes"));
    assert!(!dir.path().join("o").exists());

    let out = bench(&["run", "--preset", "no-such-preset"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn diverging_run_marks_failure_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(
        &path,
        "[problem]\nname = \"sphere\"\ndim = 2\nparams = { start = [1e300] }\n\n[optimizer]\nname = \"sgd\"\nalpha = 0.9\n\n[run]\nsteps = 50\n",
    )
    .unwrap();
    let out = bench(&["run", "--config", path.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("# FAILED at step "), "{csv}");
    assert_eq!(read_json(&dir.path().join("manifest.json"))["status"], "failed");
}

#[test]
fn every_command_produces_its_outputs() {
    let two = "[[optimizer]]\nname = \"adamomentum\"\nlabel = \"a\"\n\n[[optimizer]]\nname = \"adam\"\nlabel = \"b\"";
    let mlp = "name = \"mlp\"\nparams = { widths = [3, 5, 2], samples = 40 }";
    let cases = [
        (Command::Run, small("name = \"rosenbrock\"", two, "steps = 20\nrecord_every = 5"), "trajectory_a.csv"),
        (Command::Regret, small("name = \"online_quadratic\"\ndim = 3", two, "steps = 200\nrecord_every = 50"), "regret.csv"),
        (Command::Rate, small("name = \"quadratic\"\ndim = 3", two, "steps = 200"), "rate.csv"),
        (
            Command::Escape,
            small(
                "name = \"double_well_flat_sharp\"\nparams = { tail_index = 1.5, noise_scale = 1e-3 }",
                two,
                "steps = 50\ntrials = 30",
            ),
            "escape_trials.csv",
        ),
        (Command::Assumption, small(mlp, two, "steps = 30\nbatch_size = 8\nwindow = 5"), "assumption_a.csv"),
        (Command::Slice, small(mlp, two, "steps = 10\nbatch_size = 8\ngrid = 3\ntrials = 2"), "slice.csv"),
    ];
    for (cmd, cfg, file) in cases {
        let outcome = execute(cmd, &cfg).unwrap_or_else(|e| panic!("{cmd:?}: {e}"));
        assert!(outcome.failure.is_none());
        let dir = tempfile::tempdir().unwrap();
        write_outcome(cmd, &cfg, &outcome, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(text.lines().count() > 1, "{cmd:?}");
        assert!(dir.path().join("summary.json").exists());
    }
}

#[test]
fn escape_csv_layout() {
    let cfg = small(
        "name = \"double_well_flat_sharp\"\nparams = { tail_index = 1.5, noise_scale = 1e-3, basins = [\"sharp\"] }",
        "[optimizer]\nname = \"adam\"",
        "steps = 40\ntrials = 30",
    );
    let outcome = execute(Command::Escape, &cfg).unwrap();
    let text = String::from_utf8(outcome.files[0].1.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("basin,optimizer,trial,gamma,censored"));
    assert_eq!(lines.count(), 30);
    assert!(text.lines().skip(1).all(|l| l.starts_with("sharp,adam_0.001,")));
}

#[test]
fn wrong_problem_for_command_is_rejected() {
    let cfg = preset("sphere").unwrap();
    for cmd in [Command::Regret, Command::Escape, Command::Assumption] {
        assert!(execute(cmd, &cfg).is_err(), "{cmd:?}");
    }
    assert!(execute(Command::Race, &preset("corollary1").unwrap()).is_err());
}

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_roundtrips_through_toml(
        steps in 1u64..1_000_000,
        seed in any::<u64>(),
        alpha in 1e-6f64..1.0,
        beta1 in 0.0f64..0.999,
        start in prop::collection::vec(finite(), 1..4),
        threshold in prop::option::of(1e-12f64..1.0),
        name in prop::sample::select(vec!["adamomentum", "adam", "adamw", "rmsprop", "adabelief", "sgd"]),
    ) {
        let text = format!(
            "[problem]\nname = \"sphere\"\ndim = 3\nparams = {{ start = {start:?} }}\n\n[optimizer]\nname = \"{name}\"\nalpha = {alpha:?}\nbeta1 = {beta1:?}\n\n[run]\nsteps = {steps}\nseed = {seed}\n"
        );
        let mut cfg = ExperimentConfig::from_toml(&text).unwrap();
        cfg.run.threshold = threshold;
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back, cfg);
    }
}
