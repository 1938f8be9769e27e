//! Running many trajectories and reducing them to ensemble statistics.

use fockloop_core::distribution::poisson_pmf;
use fockloop_core::ActuatorCalibration;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};
use crate::trajectory::{
    run_trajectory, Diagnostics, FractionCounts, Recording, TrajectoryLog, FRACTION_BIN_WIDTH,
};

/// A validated configuration with its calibration loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    calibration: ActuatorCalibration,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let calibration = config.load_calibration()?;
        Ok(Self {
            config,
            calibration,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn calibration(&self) -> &ActuatorCalibration {
        &self.calibration
    }

    pub fn trajectory(&self, index: u64, recording: Recording) -> TrajectoryLog {
        run_trajectory(&self.config, &self.calibration, index, recording)
    }

    /// Every trajectory of the run, in index order whatever the number of
    /// workers.
    pub fn run_all(&self, recording: Recording) -> Vec<TrajectoryLog> {
        let n = self.config.trajectory_count() as u64;
        let job = || {
            (0..n)
                .into_par_iter()
                .map(|i| self.trajectory(i, recording))
                .collect::<Vec<_>>()
        };
        match self.config.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("thread pool")
                .install(job),
            None => job(),
        }
    }

    pub fn run_ensemble(&self) -> (Aggregate, Vec<TrajectoryLog>) {
        let recording = if self.config.write_trajectories {
            Recording::ALL
        } else {
            Recording::SUMMARY
        };
        let logs = self.run_all(recording);
        (aggregate(&self.config, &logs), logs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionFractions {
    pub bin_centers: Vec<f64>,
    pub emitter: Vec<f64>,
    pub sensor: Vec<f64>,
    pub absorber: Vec<f64>,
    /// Decisions that fell in each bin.
    pub counts: Vec<u64>,
}

impl DecisionFractions {
    /// Fractions for every non-empty bin.
    pub fn from_counts(c: &FractionCounts) -> Self {
        let mut f = Self {
            bin_centers: Vec::new(),
            emitter: Vec::new(),
            sensor: Vec::new(),
            absorber: Vec::new(),
            counts: Vec::new(),
        };
        for bin in 0..c.bins() {
            let total = c.count(bin);
            if total == 0 {
                continue;
            }
            let t = total as f64;
            f.bin_centers.push((bin as f64 + 0.5) * FRACTION_BIN_WIDTH);
            f.emitter.push(c.emitter[bin] as f64 / t);
            f.sensor.push(c.sensor[bin] as f64 / t);
            f.absorber.push(c.absorber[bin] as f64 / t);
            f.counts.push(total);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateDiagnostics {
    pub trajectories: usize,
    /// Trajectories whose estimate crossed the threshold.
    pub converged: usize,
    pub fixed_time_mean: f64,
    pub fixed_time_variance: f64,
    /// `variance / mean` of the fixed-time histogram; below 1 is
    /// sub-Poissonian.
    pub fixed_time_fano: f64,
    pub mean_steady_state_distance: f64,
    pub totals: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub config: ExperimentConfig,
    /// Histogram of the true photon number at the end of the run.
    pub pbar_fixed_time: Vec<f64>,
    /// Histogram of the true photon number when the estimate first crossed
    /// the threshold, over the trajectories that got there.
    pub pbar_threshold: Vec<f64>,
    pub poisson_ref: Vec<f64>,
    /// Sorted.
    pub convergence_times_ms: Vec<f64>,
    pub decision_fractions: DecisionFractions,
    pub diagnostics: AggregateDiagnostics,
}

fn histogram(values: impl Iterator<Item = usize>, n_max: usize) -> (Vec<f64>, usize) {
    let mut counts = vec![0u64; n_max + 1];
    let mut total = 0;
    for v in values {
        counts[v.min(n_max)] += 1;
        total += 1;
    }
    let p = counts
        .iter()
        .map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 })
        .collect();
    (p, total)
}

fn moments(p: &[f64]) -> (f64, f64) {
    let mean: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
    let var = p
        .iter()
        .enumerate()
        .map(|(n, w)| (n as f64 - mean).powi(2) * w)
        .sum();
    (mean, var)
}

/// Ensemble statistics. Independent of the order of `logs`.
pub fn aggregate(config: &ExperimentConfig, logs: &[TrajectoryLog]) -> Aggregate {
    let n_max = config.physics.n_max;
    let n_t = config.target_list()[0];
    let (pbar_fixed_time, _) = histogram(logs.iter().map(|l| l.summary.final_n_true), n_max);
    let (pbar_threshold, converged) = histogram(
        logs.iter().filter_map(|l| l.summary.n_true_at_threshold),
        n_max,
    );
    let mut convergence_times_ms: Vec<f64> = logs
        .iter()
        .filter_map(|l| l.summary.convergence_time_ms)
        .collect();
    convergence_times_ms.sort_by(f64::total_cmp);

    let mut counts = FractionCounts::new(n_max);
    let mut totals = Diagnostics::default();
    for l in logs {
        counts.merge(&l.fractions);
        totals.merge(&l.summary.diagnostics);
    }
    let mut steady: Vec<f64> = logs.iter().map(|l| l.summary.steady_state_distance).collect();
    steady.sort_by(f64::total_cmp);
    let mean_steady_state_distance = if steady.is_empty() {
        0.0
    } else {
        steady.iter().sum::<f64>() / steady.len() as f64
    };
    let (fixed_time_mean, fixed_time_variance) = moments(&pbar_fixed_time);

    Aggregate {
        config: config.clone(),
        poisson_ref: (0..=n_max).map(|n| poisson_pmf(n, n_t as f64)).collect(),
        pbar_fixed_time,
        pbar_threshold,
        convergence_times_ms,
        decision_fractions: DecisionFractions::from_counts(&counts),
        diagnostics: AggregateDiagnostics {
            trajectories: logs.len(),
            converged,
            fixed_time_mean,
            fixed_time_variance,
            fixed_time_fano: if fixed_time_mean > 0.0 {
                fixed_time_variance / fixed_time_mean
            } else {
                f64::NAN
            },
            mean_steady_state_distance,
            totals,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    fn experiment(n: usize) -> Experiment {
        Experiment::new(ExperimentConfig {
            kind: ExperimentKind::Ensemble,
            target: 4,
            duration_ms: 15.0,
            trajectories: Some(n),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn poisson_reference_at_four() {
        let (a, _) = experiment(1).run_ensemble();
        assert!((a.poisson_ref[4] - 0.1954).abs() < 5e-5);
    }

    #[test]
    fn single_trajectory_aggregate() {
        let (a, logs) = experiment(1).run_ensemble();
        let s = &logs[0].summary;
        assert_eq!(a.pbar_fixed_time[s.final_n_true], 1.0);
        assert_eq!(a.diagnostics.totals, s.diagnostics);
        assert_eq!(
            a.convergence_times_ms,
            s.convergence_time_ms.into_iter().collect::<Vec<_>>()
        );
    }

    #[test]
    fn histograms_are_normalized_and_order_free() {
        let (a, mut logs) = experiment(12).run_ensemble();
        assert!((a.pbar_fixed_time.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        if a.diagnostics.converged > 0 {
            assert!((a.pbar_threshold.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        logs.reverse();
        let b = aggregate(&a.config, &logs);
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let mut c = experiment(6).config().clone();
        c.workers = Some(1);
        let one = Experiment::new(c.clone()).unwrap().run_ensemble().0;
        c.workers = Some(3);
        let three = Experiment::new(c).unwrap().run_ensemble().0;
        assert_eq!(one.pbar_fixed_time, three.pbar_fixed_time);
        assert_eq!(one.decision_fractions, three.decision_fractions);
        assert_eq!(one.diagnostics, three.diagnostics);
    }
}
