//! Runs closed-loop Fock-state stabilization experiments on top of
//! `fockloop-core`: single trajectories, ensembles, decision-fraction
//! curves, programmed target sequences and parameter sweeps, with CSV and
//! JSON output.

pub mod config;
pub mod ensemble;
pub mod io;
pub mod sweep;
pub mod trajectory;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, Overrides};
pub use ensemble::{aggregate, Aggregate, Experiment};
pub use sweep::{run_sweep, SweepPoint};
pub use trajectory::{run_trajectory, Recording, TrajectoryLog};
