use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adamomentum::cli::{execute, preset, write_outcome, Command, ExperimentConfig, PRESETS};

#[derive(Parser)]
#[command(name = "bench", version, about = "AdaMomentum experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize a problem and record per-step trajectories.
    Run(Source),
    /// Steps-to-threshold race on a problem with a known minimum.
    Race(Source),
    /// Cumulative regret on an online convex stream.
    Regret(Source),
    /// Running average of squared gradient norms.
    Rate(Source),
    /// Monte-Carlo escape times from landscape basins.
    Escape(Source),
    /// Per-step momentum-noise condition on an MLP.
    Assumption(Source),
    /// 2-D loss slices around trained weights.
    Slice(Source),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Source {
    /// TOML experiment config.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (a unique prefix is enough).
    #[arg(long)]
    preset: Option<String>,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides run.output_dir; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(src: &Source) -> adamomentum::Result<ExperimentConfig> {
    let mut cfg = match (&src.config, &src.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| adamomentum::Error::io(path, e))?;
            ExperimentConfig::from_toml(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(seed) = src.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, src) = match cli.command {
        Cmd::Run(s) => (Command::Run, s),
        Cmd::Race(s) => (Command::Race, s),
        Cmd::Regret(s) => (Command::Regret, s),
        Cmd::Rate(s) => (Command::Rate, s),
        Cmd::Escape(s) => (Command::Escape, s),
        Cmd::Assumption(s) => (Command::Assumption, s),
        Cmd::Slice(s) => (Command::Slice, s),
        Cmd::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    };
    let result = load(&src).and_then(|cfg| {
        let dir = src
            .out
            .clone()
            .or_else(|| cfg.run.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let outcome = execute(cmd, &cfg)?;
        let written = write_outcome(cmd, &cfg, &outcome, &dir)?;
        Ok((outcome, written))
    });
    match result {
        Ok((outcome, written)) => {
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
            match outcome.failure {
                Some(reason) => {
                    eprintln!("error: run aborted: {reason}");
                    ExitCode::FAILURE
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
