use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fockloop::config::{ConfigError, ExperimentConfig, ExperimentKind, Overrides};
use fockloop::ensemble::Experiment;
use fockloop::trajectory::Recording;
use fockloop::{io, run_sweep};

#[derive(Parser)]
#[command(version, about = "Fock-state feedback loop simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Per-sample logs of individual trajectories.
    Trajectory,
    /// Photon-number histograms and convergence statistics.
    Ensemble,
    /// Sequence of targets, switching when the threshold is reached.
    Sequence,
    /// Controller decisions binned by the estimated mean photon number.
    Fractions,
    /// Grid over interaction time scales and loop shape.
    Sweep,
}

#[derive(Args)]
struct Flags {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    target: Option<usize>,
    /// Comma-separated target list, e.g. 3,1,4,2.
    #[arg(long, global = true, value_delimiter = ',')]
    targets: Option<Vec<usize>>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    #[arg(long, global = true)]
    duration_ms: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    delay_depth: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

enum Failure {
    Config(ConfigError),
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut config = match &cli.flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let f = &cli.flags;
    config.apply(&Overrides {
        kind: Some(match cli.command {
            Command::Trajectory => ExperimentKind::Trajectory,
            Command::Ensemble => ExperimentKind::Ensemble,
            Command::Sequence => ExperimentKind::Sequence,
            Command::Fractions => ExperimentKind::Fractions,
            Command::Sweep => ExperimentKind::Sweep,
        }),
        target: f.target,
        targets: f.targets.clone(),
        trajectories: f.trajectories,
        duration_ms: f.duration_ms,
        seed: f.seed,
        threshold: f.threshold,
        delay_depth: f.delay_depth,
        out: f.out.clone(),
        workers: f.workers,
    });
    let exp = Experiment::new(config)?;
    let out = exp.config().out.clone();
    fs::create_dir_all(&out)?;
    io::write_json(&out.join("config.json"), exp.config())?;
    io::write_calibration_table(
        exp.calibration(),
        fs::File::create(out.join("calibration.csv"))?,
    )?;

    match cli.command {
        Command::Trajectory | Command::Sequence => write_trajectories(&exp, &out)?,
        Command::Ensemble | Command::Fractions => {
            let (agg, logs) = exp.run_ensemble();
            io::write_json(&out.join("aggregate.json"), &agg)?;
            let summaries: Vec<_> = logs.iter().map(|l| &l.summary).collect();
            io::write_json(&out.join("summaries.json"), &summaries)?;
            io::write_fractions_csv(
                &agg.decision_fractions,
                fs::File::create(out.join("fractions.csv"))?,
            )?;
            if exp.config().write_trajectories {
                for log in &logs {
                    io::write_trajectory_files(&out, log)?;
                }
            }
            log::info!(
                "{} trajectories, {} converged",
                agg.diagnostics.trajectories,
                agg.diagnostics.converged
            );
        }
        Command::Sweep => {
            let points = run_sweep(exp.config())?;
            io::write_json(&out.join("sweep.json"), &points)?;
            io::write_sweep_csv(&points, fs::File::create(out.join("sweep.csv"))?)?;
        }
    }
    Ok(())
}

fn write_trajectories(exp: &Experiment, out: &Path) -> Result<(), Failure> {
    let logs = exp.run_all(Recording::ALL);
    for log in &logs {
        io::write_trajectory_files(out, log)?;
    }
    let summaries: Vec<_> = logs.iter().map(|l| &l.summary).collect();
    io::write_json(&out.join("summaries.json"), &summaries)?;
    Ok(())
}
