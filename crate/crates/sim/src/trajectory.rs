//! One closed-loop trajectory: plant, estimator and controller stepped
//! together, one sample interval at a time.

use fockloop_core::controller::LoopState;
use fockloop_core::plant::{sample_thermal, Crossing};
use fockloop_core::{
    ActuatorCalibration, AtomState, Mode, PhotonDistribution, Plant, Sample, TargetSequencer,
    TargetSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};

/// Width of the `n̄` bins of the decision-fraction histogram.
pub const FRACTION_BIN_WIDTH: f64 = 0.1;

/// Per-trajectory RNG: the master seed selects the key, the trajectory
/// index the stream.
pub fn trajectory_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// One sample interval, as seen by the plant and the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t_ms: f64,
    pub role: Mode,
    pub revoked: bool,
    pub occupancy: usize,
    pub true_outcomes: Vec<AtomState>,
    /// Which of the atoms were detected (same order as the outcomes).
    pub detected: Vec<bool>,
    pub n_true: usize,
    pub n_mean_est: f64,
    pub distance: f64,
    pub target: usize,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    /// A control slot got its mode.
    Prepare,
    /// An actuator crossed with its resonance cancelled.
    Revoke,
    /// The target changed.
    Switch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t_ms: f64,
    pub kind: EventKind,
    pub sample: u64,
    pub detail: String,
    /// Predicted distance of the controller's plan at that point.
    pub expected_distance: f64,
}

/// Control-sample fates binned by the estimated mean photon number the
/// controller acted on.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FractionCounts {
    pub sensor: Vec<u64>,
    pub emitter: Vec<u64>,
    pub absorber: Vec<u64>,
}

impl FractionCounts {
    pub fn new(n_max: usize) -> Self {
        let bins = ((n_max + 1) as f64 / FRACTION_BIN_WIDTH).round() as usize;
        Self {
            sensor: vec![0; bins],
            emitter: vec![0; bins],
            absorber: vec![0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.sensor.len()
    }

    pub fn record(&mut self, mean: f64, mode: Mode) {
        let bin = ((mean / FRACTION_BIN_WIDTH).floor().max(0.0) as usize).min(self.bins() - 1);
        match mode {
            Mode::Sensor => self.sensor[bin] += 1,
            Mode::Emitter => self.emitter[bin] += 1,
            Mode::Absorber => self.absorber[bin] += 1,
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in [
            (&mut self.sensor, &other.sensor),
            (&mut self.emitter, &other.emitter),
            (&mut self.absorber, &other.absorber),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn count(&self, bin: usize) -> u64 {
        self.sensor[bin] + self.emitter[bin] + self.absorber[bin]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub intervals: u64,
    pub jumps_up: u64,
    pub jumps_down: u64,
    pub emissions: u64,
    pub absorptions: u64,
    /// Emissions attempted at the truncation ceiling.
    pub reflections: u64,
    pub estimator_updates: u64,
    /// Detector records the estimator found impossible.
    pub inconsistencies: u64,
    pub decisions: u64,
    pub revocations: u64,
    pub switches: u64,
    pub emitters: u64,
    pub absorbers: u64,
    pub control_sensors: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, o: &Self) {
        self.intervals += o.intervals;
        self.jumps_up += o.jumps_up;
        self.jumps_down += o.jumps_down;
        self.emissions += o.emissions;
        self.absorptions += o.absorptions;
        self.reflections += o.reflections;
        self.estimator_updates += o.estimator_updates;
        self.inconsistencies += o.inconsistencies;
        self.decisions += o.decisions;
        self.revocations += o.revocations;
        self.switches += o.switches;
        self.emitters += o.emitters;
        self.absorbers += o.absorbers;
        self.control_sensors += o.control_sensors;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub index: u64,
    pub intervals: usize,
    /// First time the estimated `p(n_t)` exceeded the threshold.
    pub convergence_time_ms: Option<f64>,
    /// True photon number at that moment.
    pub n_true_at_threshold: Option<usize>,
    pub final_n_true: usize,
    pub final_target: usize,
    pub final_p: Vec<f64>,
    pub switch_times_ms: Vec<f64>,
    /// Time average of `(n_true − n_t)²` over the second half of the run.
    pub steady_state_distance: f64,
    /// Raw detections of the post-run sensor burst (`e`, `g`, `eg`, `-`...).
    pub burst_detections: Vec<String>,
    pub burst_phase: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub n_max: usize,
    pub rows: Vec<Row>,
    pub events: Vec<Event>,
    pub fractions: FractionCounts,
    pub summary: TrajectorySummary,
}

/// What a run keeps besides its summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recording {
    pub rows: bool,
    pub events: bool,
}

impl Recording {
    pub const ALL: Self = Self {
        rows: true,
        events: true,
    };
    pub const SUMMARY: Self = Self {
        rows: false,
        events: false,
    };
}

/// Runs trajectory `index` of `config`. The config is assumed validated.
pub fn run_trajectory(
    config: &ExperimentConfig,
    calib: &ActuatorCalibration,
    index: u64,
    recording: Recording,
) -> TrajectoryLog {
    let params = config.physics;
    let plant_params = config.plant_params();
    let mut rng = trajectory_rng(config.seed, index);

    let n0 = sample_thermal(plant_params.n_thermal, plant_params.n_max, &mut rng);
    let mut plant = Plant::new(plant_params, calib.clone(), n0);
    let prior = PhotonDistribution::thermal(params.n_thermal, params.n_max);
    let ls = if config.kind == ExperimentKind::Sequence {
        let seq = TargetSequencer::new(config.target_list(), config.threshold)
            .expect("validated sequence");
        LoopState::with_sequence(params, calib.clone(), prior, seq).expect("validated targets")
    } else {
        let target = TargetSpec::new(config.target, &params).expect("validated target");
        LoopState::new(params, calib.clone(), prior, target)
    };
    let mut ls = ls.with_time_scale(config.te_scale, config.tg_scale);

    let t_a = params.t_sample;
    let loop_len = params.loop_len() as u64;
    let intervals = config.intervals();
    let mut rows = Vec::with_capacity(if recording.rows { intervals } else { 0 });
    let mut events = Vec::new();
    let mut fractions = FractionCounts::new(params.n_max);
    let mut convergence = None;
    let mut n_at_threshold = None;
    let mut switch_times = Vec::new();
    let mut sq_sum = 0.0;
    let mut sq_count = 0usize;
    let mut done = 0;

    ls.prepare_next();
    for k in 0..intervals {
        let t_ms = (k + 1) as f64 * t_a * 1e3;
        let acted_on = ls.estimate().mean();
        let rel = ls.release();
        if rel.index % loop_len >= params.n_sensors as u64 {
            let fate = if rel.revoked {
                Mode::Sensor
            } else {
                rel.sample.mode()
            };
            fractions.record(acted_on, fate);
        }
        if rel.revoked && recording.events {
            events.push(Event {
                t_ms: k as f64 * t_a * 1e3,
                kind: EventKind::Revoke,
                sample: rel.index,
                detail: rel.sample.mode().name().to_owned(),
                expected_distance: ls.expected_distance(),
            });
        }
        let crossing = plant.cross(&rel.sample, &mut rng);
        let prepared = ls.prepare_next();
        plant.evolve(t_a, &mut rng);

        let row_head = recording.rows.then(|| row_head(&crossing, rel.revoked));
        let exited = plant.pipeline_step(crossing);
        let report = ls.end_interval(exited.map(|c| c.announcement()).as_ref());

        if recording.events && prepared.control {
            events.push(Event {
                t_ms,
                kind: EventKind::Prepare,
                sample: prepared.index,
                detail: prepared.mode.name().to_owned(),
                expected_distance: report.expected_distance,
            });
        }
        let reached = report.switched.map_or(ls.target().n_target, |(from, _)| from);
        if convergence.is_none() && report.estimate.prob(reached) > config.threshold {
            convergence = Some(t_ms);
            n_at_threshold = Some(plant.n_true());
        }
        if let Some((from, to)) = report.switched {
            switch_times.push(t_ms);
            if recording.events {
                events.push(Event {
                    t_ms,
                    kind: EventKind::Switch,
                    sample: prepared.index,
                    detail: format!("{from}->{to}"),
                    expected_distance: report.expected_distance,
                });
            }
        }
        let target = ls.target().n_target;
        if 2 * k >= intervals {
            let e = plant.n_true() as f64 - target as f64;
            sq_sum += e * e;
            sq_count += 1;
        }
        if let Some((role, revoked, occupancy, true_outcomes, detected)) = row_head {
            rows.push(Row {
                t_ms,
                role,
                revoked,
                occupancy,
                true_outcomes,
                detected,
                n_true: plant.n_true(),
                n_mean_est: report.estimate.mean(),
                distance: report.distance,
                target,
                p: report.estimate.probabilities().to_vec(),
            });
        }
        done = k + 1;
        if config.stop_on_threshold && convergence.is_some() {
            break;
        }
    }

    let final_target = ls.target().n_target;
    let burst_phase = ls.target().phase;
    let mut burst = Vec::with_capacity(config.qnd_burst);
    for _ in 0..config.qnd_burst {
        let c = plant.cross(&Sample::sensor(burst_phase, params.m_sensor), &mut rng);
        plant.evolve(t_a, &mut rng);
        burst.push(c.detection().to_string());
    }

    let pd = plant.diagnostics();
    let ed = ls.estimator().diagnostics();
    let cd = ls.diagnostics();
    let diagnostics = Diagnostics {
        intervals: done as u64,
        jumps_up: pd.jumps_up,
        jumps_down: pd.jumps_down,
        emissions: pd.emissions,
        absorptions: pd.absorptions,
        reflections: pd.reflections,
        estimator_updates: ed.updates,
        inconsistencies: ed.inconsistencies,
        decisions: cd.decisions,
        revocations: cd.revocations,
        switches: cd.switches,
        emitters: cd.emitters,
        absorbers: cd.absorbers,
        control_sensors: cd.control_sensors,
    };

    TrajectoryLog {
        n_max: params.n_max,
        rows,
        events,
        fractions,
        summary: TrajectorySummary {
            index,
            intervals: done,
            convergence_time_ms: convergence,
            n_true_at_threshold: n_at_threshold,
            final_n_true: plant.n_true(),
            final_target,
            final_p: ls.estimate().probabilities().to_vec(),
            switch_times_ms: switch_times,
            steady_state_distance: if sq_count > 0 {
                sq_sum / sq_count as f64
            } else {
                0.0
            },
            burst_detections: burst,
            burst_phase,
            diagnostics,
        },
    }
}

type RowHead = (Mode, bool, usize, Vec<AtomState>, Vec<bool>);

fn row_head(c: &Crossing, revoked: bool) -> RowHead {
    (
        c.sample.mode(),
        revoked,
        c.occupancy(),
        c.outcomes.clone(),
        c.detected.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::Trajectory,
            duration_ms: 20.0,
            ..Default::default()
        }
    }

    fn run(c: &ExperimentConfig, index: u64) -> TrajectoryLog {
        let calib = c.load_calibration().unwrap();
        run_trajectory(c, &calib, index, Recording::ALL)
    }

    #[test]
    fn one_row_per_interval() {
        let c = config();
        let log = run(&c, 0);
        assert_eq!(log.rows.len(), c.intervals());
        assert!(log.rows.windows(2).all(|w| w[0].t_ms < w[1].t_ms));
        let l = c.physics.loop_len();
        for (k, r) in log.rows.iter().enumerate() {
            if k % l < c.physics.n_sensors {
                assert_eq!(r.role, Mode::Sensor);
            }
            assert_eq!(r.occupancy, r.true_outcomes.len());
            assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_duration_gives_summary_only() {
        let c = ExperimentConfig {
            duration_ms: 0.0,
            ..config()
        };
        let log = run(&c, 0);
        assert!(log.rows.is_empty());
        assert_eq!(log.summary.intervals, 0);
    }

    #[test]
    fn same_index_same_log() {
        let c = config();
        assert_eq!(run(&c, 3), run(&c, 3));
        assert_ne!(run(&c, 3).rows, run(&c, 4).rows);
    }

    #[test]
    fn single_target_sequence_matches_trajectory() {
        let c = config();
        let s = ExperimentConfig {
            kind: ExperimentKind::Sequence,
            targets: vec![c.target],
            ..c.clone()
        };
        assert_eq!(run(&c, 1).rows, run(&s, 1).rows);
    }

    #[test]
    fn unreachable_threshold_never_switches() {
        let c = ExperimentConfig {
            kind: ExperimentKind::Sequence,
            targets: vec![2, 1],
            threshold: 0.9999,
            ..config()
        };
        let log = run(&c, 0);
        assert!(log.summary.switch_times_ms.is_empty());
        assert!(log.events.iter().all(|e| e.kind != EventKind::Switch));
    }

    #[test]
    fn stop_on_threshold_ends_early() {
        let c = ExperimentConfig {
            stop_on_threshold: true,
            duration_ms: 140.0,
            target: 1,
            ..config()
        };
        let log = run(&c, 0);
        let t = log.summary.convergence_time_ms.expect("converges");
        assert_eq!(log.rows.last().unwrap().t_ms, t);
    }

    #[test]
    fn burst_records_raw_detections() {
        let c = ExperimentConfig {
            qnd_burst: 30,
            ..config()
        };
        let log = run(&c, 0);
        assert_eq!(log.summary.burst_detections.len(), 30);
    }

    #[test]
    fn fraction_bins() {
        let mut f = FractionCounts::new(12);
        assert_eq!(f.bins(), 130);
        f.record(0.05, Mode::Emitter);
        f.record(3.99, Mode::Sensor);
        f.record(100.0, Mode::Absorber);
        assert_eq!(f.emitter[0], 1);
        assert_eq!(f.sensor[39], 1);
        assert_eq!(f.absorber[129], 1);
    }
}
