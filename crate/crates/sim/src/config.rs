//! Experiment configuration, as read from JSON and patched from the command
//! line.

use std::path::{Path, PathBuf};

use fockloop_core::{ActuatorCalibration, PhysicsParams, TargetSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            Self::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Trajectory,
    #[default]
    Ensemble,
    Fractions,
    Sequence,
    Sweep,
}

/// Where the actuator calibration comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationSource {
    /// `c_a(n) = 0.9·exp(−n/20)`, no phase offset.
    #[default]
    Default,
    /// Unit contrast, no phase offset.
    Ideal,
    /// Table file with rows `n, contrast, phase_offset_rad`.
    Table(PathBuf),
}

/// Grid for the `sweep` experiment. Every combination is run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub te_scale: Vec<f64>,
    pub tg_scale: Vec<f64>,
    pub n_sensors: Vec<usize>,
    pub n_controls: Vec<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            te_scale: vec![1.0],
            tg_scale: vec![1.0],
            n_sensors: vec![12],
            n_controls: vec![4],
        }
    }
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.te_scale.len() * self.tg_scale.len() * self.n_sensors.len() * self.n_controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Model used by the estimator and controller.
    pub physics: PhysicsParams,
    /// Model of the simulated apparatus, when it differs from `physics`.
    pub plant_physics: Option<PhysicsParams>,
    pub calibration: CalibrationSource,
    pub target: usize,
    /// Target list for `sequence` runs.
    pub targets: Vec<usize>,
    pub threshold: f64,
    pub duration_ms: f64,
    /// End each trajectory as soon as the estimate crosses the threshold.
    pub stop_on_threshold: bool,
    /// Defaults to 1 for `trajectory` and `sequence`, 100 otherwise.
    pub trajectories: Option<usize>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub te_scale: f64,
    pub tg_scale: f64,
    /// Sensor samples sent after the run with the controller idle; their
    /// raw detections are kept for offline reconstruction.
    pub qnd_burst: usize,
    /// Write one CSV per trajectory for ensemble-type runs.
    pub write_trajectories: bool,
    pub sweep: SweepGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::default(),
            physics: PhysicsParams::default(),
            plant_physics: None,
            calibration: CalibrationSource::default(),
            target: 3,
            targets: Vec::new(),
            threshold: 0.8,
            duration_ms: 140.0,
            stop_on_threshold: false,
            trajectories: None,
            seed: 0,
            workers: None,
            out: PathBuf::from("out"),
            te_scale: 1.0,
            tg_scale: 1.0,
            qnd_burst: 0,
            write_trajectories: false,
            sweep: SweepGrid::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kind: Option<ExperimentKind>,
    pub target: Option<usize>,
    pub targets: Option<Vec<usize>>,
    pub trajectories: Option<usize>,
    pub duration_ms: Option<f64>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub delay_depth: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(k) = o.kind {
            self.kind = k;
        }
        if let Some(t) = o.target {
            self.target = t;
        }
        if let Some(t) = &o.targets {
            self.targets = t.clone();
        }
        if let Some(n) = o.trajectories {
            self.trajectories = Some(n);
        }
        if let Some(d) = o.duration_ms {
            self.duration_ms = d;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.threshold {
            self.threshold = t;
        }
        if let Some(d) = o.delay_depth {
            self.physics.delay_depth = d;
            if let Some(p) = self.plant_physics.as_mut() {
                p.delay_depth = d;
            }
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectories.unwrap_or(match self.kind {
            ExperimentKind::Trajectory | ExperimentKind::Sequence => 1,
            _ => 100,
        })
    }

    pub fn plant_params(&self) -> PhysicsParams {
        self.plant_physics.unwrap_or(self.physics)
    }

    /// Targets visited by a run: the sequence for `sequence` runs, otherwise
    /// the single target.
    pub fn target_list(&self) -> Vec<usize> {
        if self.kind == ExperimentKind::Sequence && !self.targets.is_empty() {
            self.targets.clone()
        } else {
            vec![self.target]
        }
    }

    /// Number of sample intervals in a run.
    pub fn intervals(&self) -> usize {
        // the epsilon keeps 140 ms / 82 µs from landing a hair below 1707
        (self.duration_ms * 1e-3 / self.physics.t_sample + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let physics = |prefix: &str, p: &PhysicsParams| {
            p.validate().map_err(|e| match e {
                fockloop_core::Error::InvalidParameter { field, reason } => {
                    ConfigError::invalid(format!("{prefix}.{field}"), reason)
                }
                other => ConfigError::invalid(prefix, other.to_string()),
            })
        };
        physics("physics", &self.physics)?;
        if let Some(p) = &self.plant_physics {
            physics("plant_physics", p)?;
            if p.n_max != self.physics.n_max {
                return Err(ConfigError::invalid(
                    "plant_physics.n_max",
                    "must match physics.n_max",
                ));
            }
            if p.t_sample != self.physics.t_sample {
                return Err(ConfigError::invalid(
                    "plant_physics.t_sample",
                    "must match physics.t_sample",
                ));
            }
        }
        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0) {
            return Err(ConfigError::invalid(
                "duration_ms",
                "must be a finite non-negative number",
            ));
        }
        if self.trajectories == Some(0) {
            return Err(ConfigError::invalid("trajectories", "must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::invalid(
                "threshold",
                "must lie strictly between 0 and 1",
            ));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::invalid("workers", "must be at least 1"));
        }
        for (field, v) in [("te_scale", self.te_scale), ("tg_scale", self.tg_scale)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(field, "must be positive"));
            }
        }
        if self.kind == ExperimentKind::Sequence && self.targets.is_empty() {
            return Err(ConfigError::invalid("targets", "sequence runs need a target list"));
        }
        let field = if self.kind == ExperimentKind::Sequence {
            "targets"
        } else {
            "target"
        };
        for n in self.target_list() {
            TargetSpec::new(n, &self.physics)
                .map_err(|e| ConfigError::invalid(field, e.to_string()))?;
        }
        if self.kind == ExperimentKind::Sweep {
            self.validate_sweep()?;
        }
        if let CalibrationSource::Table(path) = &self.calibration {
            if path.as_os_str().is_empty() {
                return Err(ConfigError::invalid("calibration", "empty table path"));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), ConfigError> {
        let g = &self.sweep;
        for (field, empty) in [
            ("sweep.te_scale", g.te_scale.is_empty()),
            ("sweep.tg_scale", g.tg_scale.is_empty()),
            ("sweep.n_sensors", g.n_sensors.is_empty()),
            ("sweep.n_controls", g.n_controls.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::invalid(field, "grid axis is empty"));
            }
        }
        if g.te_scale.iter().chain(&g.tg_scale).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ConfigError::invalid("sweep", "time scales must be positive"));
        }
        if g.n_sensors.iter().chain(&g.n_controls).any(|&n| n == 0) {
            return Err(ConfigError::invalid("sweep", "sample counts must be at least 1"));
        }
        Ok(())
    }

    /// Actuator calibration for the configured source.
    pub fn load_calibration(&self) -> Result<ActuatorCalibration, ConfigError> {
        let n_max = self.physics.n_max;
        match &self.calibration {
            CalibrationSource::Default => Ok(ActuatorCalibration::default_for(n_max)),
            CalibrationSource::Ideal => Ok(ActuatorCalibration::ideal(n_max)),
            CalibrationSource::Table(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                ActuatorCalibration::parse_table(&text, n_max)
                    .map_err(|e| ConfigError::invalid("calibration", e.to_string()))
            }
        }
    }
}
