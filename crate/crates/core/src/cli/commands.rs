use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use super::build::{self, STREAM_BATCH, STREAM_DIRECTIONS, STREAM_NOISE};
use super::config::{ExperimentConfig, ProblemName};
use super::output::{fmt_f64, to_json, write_atomic, Csv};
use crate::analysis::{
    assumption_monitor, escape_harness, loss_slice, nonconvex_rate_harness, race, random_directions, recompute_regret,
    regret_harness, run, stepsize_trace, MonitorOptions, RecordOptions, Trajectory,
};
use crate::error::{Error, Result};
use crate::numerics::{derive_stream, ParamVector, RngStream};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::problems::{MlpProblem, NoisyProblem, Problem};

pub const TRAJECTORY_HEADER: &str = "t,loss,grad_sq_norm,eff_step_min,eff_step_mean,eff_step_max,alpha_t,beta1_t";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Run,
    Race,
    Regret,
    Rate,
    Escape,
    Assumption,
    Slice,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Run,
        Command::Race,
        Command::Regret,
        Command::Rate,
        Command::Escape,
        Command::Assumption,
        Command::Slice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Race => "race",
            Command::Regret => "regret",
            Command::Rate => "rate",
            Command::Escape => "escape",
            Command::Assumption => "assumption",
            Command::Slice => "slice",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Files produced by a command, before they are written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    /// Set when a run aborted part-way; partial outputs are still in `files`.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config_sha256: String,
    master_seed: u64,
    library_version: &'static str,
    status: &'a str,
    files: Vec<String>,
}

/// Runs `cmd` on `cfg` without touching the filesystem.
pub fn execute(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cmd {
        Command::Run => cmd_run(cfg),
        Command::Race => cmd_race(cfg),
        Command::Regret => cmd_regret(cfg),
        Command::Rate => cmd_rate(cfg),
        Command::Escape => cmd_escape(cfg),
        Command::Assumption => cmd_assumption(cfg),
        Command::Slice => cmd_slice(cfg),
    }
}

/// Writes the outcome, the effective config, `summary.json` and
/// `manifest.json` into `dir`.
pub fn write_outcome(cmd: Command, cfg: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, bytes) in &outcome.files {
        written.push(write_atomic(dir, name, bytes)?);
    }
    written.push(write_atomic(dir, "summary.json", &to_json(&outcome.summary))?);
    written.push(write_atomic(dir, "config.toml", cfg.to_toml()?.as_bytes())?);
    let mut files: Vec<String> = outcome.files.iter().map(|(n, _)| n.clone()).collect();
    files.extend(["summary.json".to_string(), "config.toml".to_string()]);
    let manifest = Manifest {
        command: cmd.name(),
        config_sha256: cfg.hash(),
        master_seed: cfg.run.seed,
        library_version: env!("CARGO_PKG_VERSION"),
        status: if outcome.failure.is_some() { "failed" } else { "ok" },
        files,
    };
    written.push(write_atomic(dir, "manifest.json", &to_json(&manifest))?);
    Ok(written)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let mut csv = Csv::new(&TRAJECTORY_HEADER.split(',').collect::<Vec<_>>());
    for r in &traj.records {
        csv.row(&[
            r.t.to_string(),
            f(r.loss),
            f(r.grad_sq_norm),
            f(r.eff_step_min),
            f(r.eff_step_mean),
            f(r.eff_step_max),
            f(r.alpha_t),
            f(r.beta1_t),
        ]);
    }
    if let Some(fail) = &traj.failure {
        csv.failure(fail.step, &fail.reason);
    }
    csv.into_bytes()
}

fn trajectory_name(configs: &[OptimizerConfig], label: &str) -> String {
    if configs.len() == 1 {
        "trajectory.csv".into()
    } else {
        format!("trajectory_{label}.csv")
    }
}

fn cmd_run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = build::problem(cfg)?;
    let theta0 = build::start(cfg, problem.dim(), 0)?;
    let configs = cfg.optimizers();
    let noise = build::noise(&cfg.problem.params)?;
    let opts = RecordOptions {
        every: cfg.run.record_every.unwrap_or(1),
        keep_theta: false,
    };
    let mut files = Vec::new();
    let mut summary = BTreeMap::new();
    let mut failure = None;
    for c in &configs {
        let mut extra = json!({});
        let traj = match &noise {
            Some(spec) => {
                // every optimizer sees the same noise sequence
                let rng = derive_stream(cfg.run.seed, STREAM_NOISE);
                let mut noisy = NoisyProblem::new(problem.clone(), spec.clone(), rng)?;
                run(&mut noisy, c, &theta0, cfg.run.steps, opts)?
            }
            None if cfg.problem.name == ProblemName::PlateauSlopeBasin && opts.every == 1 => {
                let trace = stepsize_trace(&build::landscape(cfg)?, c, theta0[0], cfg.run.steps)?;
                extra = json!({
                    "ramp_steps": trace.ramp_steps,
                    "ramp_mean_eff_step": trace.ramp_mean,
                    "converged_mean_eff_step": trace.converged_mean,
                });
                trace.trajectory
            }
            None => run(&mut problem.clone(), c, &theta0, cfg.run.steps, opts)?,
        };
        files.push((trajectory_name(&configs, &c.label), trajectory_csv(&traj)));
        if let Some(fail) = &traj.failure {
            failure.get_or_insert_with(|| format!("{}: step {}: {}", c.label, fail.step, fail.reason));
        }
        let last = traj.records.last();
        let mut entry = json!({
            "records": traj.records.len(),
            "complete": traj.is_complete(),
            "failure": traj.failure,
            "final_loss": last.map(|r| r.loss),
            "final_grad_sq_norm": last.map(|r| r.grad_sq_norm),
        });
        if traj.final_theta.len() <= 16 {
            entry["final_theta"] = json!(traj.final_theta);
        }
        if let (Value::Object(e), Value::Object(x)) = (&mut entry, extra) {
            e.extend(x);
        }
        summary.insert(c.label.clone(), entry);
    }
    Ok(Outcome {
        files,
        summary: json!({ "optimizers": summary }),
        failure,
    })
}

fn cmd_race(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = build::problem(cfg)?;
    let theta0 = build::start(cfg, problem.dim(), 0)?;
    let threshold = cfg.run.threshold.unwrap_or(1e-6);
    let rows = race(&problem, &cfg.optimizers(), &theta0, cfg.run.steps, threshold)?;
    let mut csv = Csv::new(&["label", "steps_to_threshold", "final_gap", "initial_dist", "max_dist", "overshoot"]);
    for r in &rows {
        csv.row(&[
            r.label.clone(),
            r.steps_to_threshold.map_or("censored".into(), |s| s.to_string()),
            f(r.final_gap),
            f(r.initial_dist),
            f(r.max_dist),
            r.overshoots().to_string(),
        ]);
    }
    Ok(Outcome {
        files: vec![("race.csv".into(), csv.into_bytes())],
        summary: json!({ "threshold": threshold, "steps": cfg.run.steps, "rows": rows }),
        failure: None,
    })
}

fn cmd_regret(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.problem.name != ProblemName::OnlineQuadratic {
        return Err(Error::Config("regret needs problem.name = \"online_quadratic\"".into()));
    }
    let stream = build::online_stream(cfg)?;
    let theta0 = build::start(cfg, stream.center(1).len(), 0)?;
    let every = cfg.run.record_every.unwrap_or(1) as usize;
    let mut csv = Csv::new(&["label", "t", "regret", "avg_regret"]);
    let mut summary = BTreeMap::new();
    for c in cfg.optimizers() {
        let rep = regret_harness(&stream, &c, &theta0)?;
        let n = rep.regret.len();
        for i in (0..n).filter(|i| (i + 1) % every == 0 || i + 1 == n) {
            csv.row(&[c.label.clone(), (i + 1).to_string(), f(rep.regret[i]), f(rep.average_regret[i])]);
        }
        summary.insert(
            c.label.clone(),
            json!({
                "slope": rep.slope,
                "final_regret": rep.regret[n - 1],
                "recomputed_final_regret": recompute_regret(&stream, &rep)?,
                "final_avg_regret": rep.average_regret[n - 1],
            }),
        );
    }
    Ok(Outcome {
        files: vec![("regret.csv".into(), csv.into_bytes())],
        summary: json!({ "horizon": cfg.run.steps, "optimizers": summary }),
        failure: None,
    })
}

fn cmd_rate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = build::problem(cfg)?;
    let theta0 = build::start(cfg, problem.dim(), 0)?;
    let noise = build::noise(&cfg.problem.params)?;
    let every = cfg.run.record_every.unwrap_or(1) as usize;
    let steps = cfg.run.steps as usize;
    let mut csv = Csv::new(&["label", "t", "avg_grad_sq"]);
    let mut summary = BTreeMap::new();
    for c in cfg.optimizers() {
        let rep = match &noise {
            Some(spec) => {
                let mut noisy =
                    NoisyProblem::new(problem.clone(), spec.clone(), derive_stream(cfg.run.seed, STREAM_NOISE))?;
                nonconvex_rate_harness(&mut noisy, &c, &theta0, steps)?
            }
            None => nonconvex_rate_harness(&mut problem.clone(), &c, &theta0, steps)?,
        };
        for t in (0..=steps).filter(|t| t % every == 0 || *t == steps) {
            csv.row(&[c.label.clone(), t.to_string(), f(rep.at(t))]);
        }
        let early = steps.min(1000);
        summary.insert(
            c.label.clone(),
            json!({
                "slope": rep.slope,
                "avg_at_1000": rep.at(early),
                "avg_at_end": rep.at(steps),
                "decrease_factor": rep.at(early) / rep.at(steps),
            }),
        );
    }
    Ok(Outcome {
        files: vec![("rate.csv".into(), csv.into_bytes())],
        summary: json!({ "steps": steps, "optimizers": summary }),
        failure: None,
    })
}

fn cmd_escape(cfg: &ExperimentConfig) -> Result<Outcome> {
    let landscape = build::landscape(cfg)?;
    let noise = build::noise(&cfg.problem.params)?
        .ok_or_else(|| Error::Config("escape needs problem.params.tail_index and noise_scale".into()))?;
    let basins = cfg
        .problem
        .params
        .basins
        .clone()
        .unwrap_or_else(|| landscape.basins.iter().map(|b| b.name.clone()).collect());
    let configs = cfg.optimizers();
    let trials = cfg.run.trials.unwrap_or(100);
    let mut csv = Csv::new(&["basin", "optimizer", "trial", "gamma", "censored"]);
    let mut summary = BTreeMap::new();
    for basin in &basins {
        let rep = escape_harness(&landscape, basin, &configs, &noise, trials, cfg.run.steps, cfg.run.seed)?;
        for t in &rep.trials {
            csv.row(&[
                t.basin.clone(),
                t.optimizer.clone(),
                t.trial.to_string(),
                t.gamma.unwrap_or(rep.budget + 1).to_string(),
                t.gamma.is_none().to_string(),
            ]);
        }
        let tests: Vec<Value> = configs
            .iter()
            .skip(1)
            .map(|other| {
                let s = rep.compare(&configs[0].label, &other.label);
                json!({ "a": configs[0].label, "b": other.label, "test": s })
            })
            .collect();
        summary.insert(basin.clone(), json!({ "stats": rep.stats, "sign_tests_a_greater": tests }));
    }
    Ok(Outcome {
        files: vec![("escape_trials.csv".into(), csv.into_bytes())],
        summary: json!({ "budget": cfg.run.steps, "trials": trials, "noise": noise, "basins": summary }),
        failure: None,
    })
}

fn cmd_assumption(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.problem.name != ProblemName::Mlp {
        return Err(Error::Config("assumption needs problem.name = \"mlp\"".into()));
    }
    let problem = build::mlp(&cfg.problem.params)?;
    let theta0 = build::start(cfg, problem.dim(), 0)?;
    let defaults = MonitorOptions::default();
    let opts = MonitorOptions {
        batch_size: cfg.run.batch_size.unwrap_or(defaults.batch_size),
        steps: cfg.run.steps,
        window: cfg.run.window.unwrap_or(defaults.window),
        threshold: cfg.run.fraction_threshold.unwrap_or(defaults.threshold),
        seed: cfg.run.seed,
    };
    let mut files = Vec::new();
    let mut summary = BTreeMap::new();
    let configs = cfg.optimizers();
    for c in &configs {
        let rep = assumption_monitor(&problem, c, &theta0, opts)?;
        let mut csv = Csv::new(&["t", "fraction", "smoothed", "loss"]);
        for (i, fr) in rep.fractions.iter().enumerate() {
            let smoothed = (i + 1 >= rep.window).then(|| f(rep.smoothed[i + 1 - rep.window]));
            csv.row(&[(i + 1).to_string(), f(*fr), smoothed.unwrap_or_default(), f(rep.losses[i])]);
        }
        let name = if configs.len() == 1 { "assumption.csv".to_string() } else { format!("assumption_{}.csv", c.label) };
        files.push((name, csv.into_bytes()));
        let mean = rep.fractions.iter().sum::<f64>() / rep.fractions.len() as f64;
        summary.insert(
            c.label.clone(),
            json!({
                "t0": rep.t0,
                "degenerate": rep.degenerate,
                "mean_fraction": mean,
                "final_smoothed": rep.smoothed.last(),
                "min_smoothed": rep.smoothed.iter().cloned().fold(f64::INFINITY, f64::min),
            }),
        );
    }
    Ok(Outcome {
        files,
        summary: json!({ "options": opts, "optimizers": summary }),
        failure: None,
    })
}

/// Mini-batch training loop; batches come from `rng`.
pub(crate) fn train_minibatch(
    problem: &MlpProblem,
    config: &OptimizerConfig,
    theta0: &ParamVector,
    steps: u64,
    batch_size: usize,
    rng: &mut RngStream,
) -> Result<ParamVector> {
    let n = problem.data.len();
    let mut state = OptimizerState::new(config.kind.kernel(), problem.dim());
    let mut theta = theta0.clone();
    for _ in 0..steps {
        let rows = rng.sample_without_replacement(n, batch_size.min(n));
        let (_, g) = problem.loss_and_grad(&theta, Some(&rows))?;
        state.step(&mut theta, &g, &config.hyper)?;
    }
    Ok(theta)
}

fn cmd_slice(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem: Problem = build::problem(cfg)?;
    let mlp = (cfg.problem.name == ProblemName::Mlp).then(|| build::mlp(&cfg.problem.params)).transpose()?;
    let trials = cfg.run.trials.unwrap_or(1) as u64;
    let grid = cfg.run.grid.unwrap_or(21);
    let radius = cfg.run.radius.unwrap_or(1.0);
    let flat_r = cfg.run.flatness_radius.unwrap_or(radius);
    let configs = cfg.optimizers();
    let mut csv = Csv::new(&["trial", "label", "a", "b", "loss"]);
    let mut per_label: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for trial in 0..trials {
        let theta0 = build::start(cfg, problem.dim(), trial)?;
        let (d1, d2) = random_directions(problem.dim(), &mut derive_stream(cfg.run.seed, STREAM_DIRECTIONS + trial))?;
        for c in &configs {
            let trained = match (&mlp, cfg.run.batch_size) {
                (Some(m), Some(b)) => {
                    let mut rng = derive_stream(cfg.run.seed, STREAM_BATCH + trial);
                    train_minibatch(m, c, &theta0, cfg.run.steps, b, &mut rng)?
                }
                _ => {
                    let opts = RecordOptions { every: cfg.run.steps, keep_theta: false };
                    let traj = run(&mut problem.clone(), c, &theta0, cfg.run.steps, opts)?;
                    if let Some(fail) = traj.failure {
                        return Err(Error::Config(format!("{} aborted at step {}: {}", c.label, fail.step, fail.reason)));
                    }
                    traj.final_theta
                }
            };
            let s = loss_slice(&problem, &trained, &d1, &d2, grid, radius, flat_r)?;
            for (i, a) in s.coords.iter().enumerate() {
                for (j, b) in s.coords.iter().enumerate() {
                    csv.row(&[trial.to_string(), c.label.clone(), f(*a), f(*b), f(s.values[i][j])]);
                }
            }
            let e = per_label.entry(c.label.clone()).or_default();
            e.0.push(s.flatness);
            e.1.push(s.center_value);
        }
    }
    let summary: BTreeMap<_, _> = per_label
        .into_iter()
        .map(|(label, (flat, loss))| {
            let mean = flat.iter().sum::<f64>() / flat.len() as f64;
            (label, json!({ "flatness": flat, "mean_flatness": mean, "center_loss": loss }))
        })
        .collect();
    Ok(Outcome {
        files: vec![("slice.csv".into(), csv.into_bytes())],
        summary: json!({ "grid": grid, "radius": radius, "flatness_radius": flat_r, "optimizers": summary }),
        failure: None,
    })
}
