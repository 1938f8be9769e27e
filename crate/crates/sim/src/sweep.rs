//! Grid search over the actuator interaction times and the loop shape.

use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::ensemble::{aggregate, Experiment};
use crate::trajectory::Recording;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rank: usize,
    pub te_scale: f64,
    pub tg_scale: f64,
    pub n_sensors: usize,
    pub n_controls: usize,
    pub mean_steady_state_distance: f64,
    /// Over the trajectories that converged.
    pub mean_convergence_ms: Option<f64>,
    pub converged_fraction: f64,
}

/// Runs every grid point with the same seed and returns the points sorted by
/// steady-state distance (grid order among equals).
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepPoint>, ConfigError> {
    let mut config = config.clone();
    config.kind = ExperimentKind::Sweep;
    config.validate()?;
    let g = config.sweep.clone();
    let mut points = Vec::with_capacity(g.len());
    for &te in &g.te_scale {
        for &tg in &g.tg_scale {
            for &ns in &g.n_sensors {
                for &nc in &g.n_controls {
                    let mut c = config.clone();
                    c.kind = ExperimentKind::Ensemble;
                    c.te_scale = te;
                    c.tg_scale = tg;
                    c.physics.n_sensors = ns;
                    c.physics.n_controls = nc;
                    if let Some(p) = c.plant_physics.as_mut() {
                        p.n_sensors = ns;
                        p.n_controls = nc;
                    }
                    let exp = Experiment::new(c)?;
                    let logs = exp.run_all(Recording::SUMMARY);
                    let agg = aggregate(exp.config(), &logs);
                    let times = &agg.convergence_times_ms;
                    log::info!("sweep point te={te} tg={tg} ns={ns} nc={nc} done");
                    points.push(SweepPoint {
                        rank: 0,
                        te_scale: te,
                        tg_scale: tg,
                        n_sensors: ns,
                        n_controls: nc,
                        mean_steady_state_distance: agg.diagnostics.mean_steady_state_distance,
                        mean_convergence_ms: (!times.is_empty())
                            .then(|| times.iter().sum::<f64>() / times.len() as f64),
                        converged_fraction: times.len() as f64 / logs.len() as f64,
                    });
                }
            }
        }
    }
    points.sort_by(|a, b| {
        a.mean_steady_state_distance
            .total_cmp(&b.mean_steady_state_distance)
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    Ok(points)
}
