//! Ground-truth Monte Carlo model of the cavity, the atom samples and the
//! detector.
//!
//! Random draws happen in a fixed order per interval (occupancy, then each
//! atom's outcome and detection, then cavity jumps), so a seeded generator
//! reproduces a trajectory exactly.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use libm::log;
use rand::Rng;

use crate::model::{
    flip_probability, occupancy_weights, sensor_weight, ActuatorCalibration, AtomState,
    PhysicsParams,
};
use crate::distribution::PhotonDistribution;
use crate::sample::{Detection, Interaction, Sample, SampleAnnouncement};

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Atom number of a sample: Poisson(`mean`) with two or more folded into 2.
pub fn sample_occupancy<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u8 {
    let [p0, p1, _] = occupancy_weights(mean);
    let u = uniform(rng);
    if u < p0 {
        0
    } else if u < p0 + p1 {
        1
    } else {
        2
    }
}

/// Draws a photon number from the thermal law truncated at `n_max`.
pub fn sample_thermal<R: Rng + ?Sized>(n_thermal: f64, n_max: usize, rng: &mut R) -> usize {
    let p = PhotonDistribution::thermal(n_thermal, n_max);
    let mut u = uniform(rng);
    for (n, &w) in p.probabilities().iter().enumerate() {
        if u < w {
            return n;
        }
        u -= w;
    }
    n_max
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Jumps {
    pub up: u32,
    pub down: u32,
}

/// Exact jump-process evolution of the photon number over `dt` with the
/// damping rates of [`crate::model::relaxation_generator`].
pub fn evolve_cavity<R: Rng + ?Sized>(
    n: usize,
    dt: f64,
    params: &PhysicsParams,
    rng: &mut R,
) -> (usize, Jumps) {
    let gamma = params.decay_rate();
    let mut n = n.min(params.n_max);
    let mut jumps = Jumps::default();
    let mut t = 0.0;
    loop {
        let down = gamma * (1.0 + params.n_thermal) * n as f64;
        let up = if n < params.n_max {
            gamma * params.n_thermal * (n + 1) as f64
        } else {
            0.0
        };
        let total = down + up;
        if total <= 0.0 {
            break;
        }
        t += -log(1.0 - uniform(rng)) / total;
        if t > dt {
            break;
        }
        if uniform(rng) * total < down {
            n -= 1;
            jumps.down += 1;
        } else {
            n += 1;
            jumps.up += 1;
        }
    }
    (n, jumps)
}

/// Level of a sensor atom after the Ramsey sequence; the photon number is
/// untouched.
pub fn interact_sensor_true<R: Rng + ?Sized>(
    n: usize,
    phase: f64,
    params: &PhysicsParams,
    rng: &mut R,
) -> AtomState {
    let e = sensor_weight(AtomState::Excited, n, phase, params);
    let g = sensor_weight(AtomState::Ground, n, phase, params);
    if uniform(rng) * (e + g) < e {
        AtomState::Excited
    } else {
        AtomState::Ground
    }
}

/// Final level of a resonant actuator atom and the photon number it leaves:
/// a flip of an emitter adds a photon, a flip of an absorber removes one.
/// Returns whether an emission had to be folded back into `n_max`.
pub fn interact_actuator_true<R: Rng + ?Sized>(
    n: usize,
    prepared: AtomState,
    time: f64,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
    rng: &mut R,
) -> (AtomState, usize, bool) {
    let flip = flip_probability(prepared, n, time, params.omega0, calib);
    if uniform(rng) >= flip {
        return (prepared, n, false);
    }
    match prepared {
        AtomState::Excited if n >= params.n_max => {
            log::warn!("emission above n_max = {} reflected", params.n_max);
            (AtomState::Ground, params.n_max, true)
        }
        AtomState::Excited => (AtomState::Ground, n + 1, false),
        AtomState::Ground => (AtomState::Excited, n - 1, false),
    }
}

/// Independent detection of each atom with probability `eta`.
pub fn detect<R: Rng + ?Sized>(states: &[AtomState], eta: f64, rng: &mut R) -> Vec<bool> {
    states.iter().map(|_| uniform(rng) < eta).collect()
}

/// Ground-truth record of one sample crossing the cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub sample: Sample,
    pub time: f64,
    pub n_before: usize,
    pub n_after: usize,
    /// Final level of each atom, in crossing order.
    pub outcomes: Vec<AtomState>,
    /// Whether each atom was detected.
    pub detected: Vec<bool>,
}

impl Crossing {
    pub fn occupancy(&self) -> usize {
        self.outcomes.len()
    }

    pub fn detection(&self) -> Detection {
        let seen: Vec<AtomState> = self
            .outcomes
            .iter()
            .zip(&self.detected)
            .filter(|(_, d)| **d)
            .map(|(s, _)| *s)
            .collect();
        Detection::from_states(&seen).expect("at most two atoms per sample")
    }

    pub fn announcement(&self) -> SampleAnnouncement {
        SampleAnnouncement {
            sample: self.sample,
            detected: self.detection(),
        }
    }
}

/// FIFO of samples between the cavity and the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine<T> {
    depth: usize,
    queue: VecDeque<T>,
}

impl<T> DelayLine<T> {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            queue: VecDeque::with_capacity(depth + 1),
        }
    }

    /// Pushes `item` and returns the one that reaches the detector, if the
    /// line is full.
    pub fn push(&mut self, item: T) -> Option<T> {
        self.queue.push_back(item);
        if self.queue.len() > self.depth {
            self.queue.pop_front()
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.queue.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlantDiagnostics {
    pub jumps_up: u64,
    pub jumps_down: u64,
    pub emissions: u64,
    pub absorptions: u64,
    /// Emissions at `n_max` that were folded back.
    pub reflections: u64,
}

/// The physical system of one trajectory.
#[derive(Debug, Clone)]
pub struct Plant {
    params: PhysicsParams,
    calib: ActuatorCalibration,
    n_true: usize,
    time: f64,
    pipeline: DelayLine<Crossing>,
    diagnostics: PlantDiagnostics,
}

impl Plant {
    pub fn new(params: PhysicsParams, calib: ActuatorCalibration, n_initial: usize) -> Self {
        let pipeline = DelayLine::new(params.delay_depth);
        Self {
            n_true: n_initial.min(params.n_max),
            params,
            calib,
            time: 0.0,
            pipeline,
            diagnostics: PlantDiagnostics::default(),
        }
    }

    pub fn n_true(&self) -> usize {
        self.n_true
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn diagnostics(&self) -> PlantDiagnostics {
        self.diagnostics
    }

    pub fn pipeline(&self) -> &DelayLine<Crossing> {
        &self.pipeline
    }

    /// One sample crosses the cavity now. Atoms of a two-atom actuator
    /// sample interact one after the other for the full time.
    pub fn cross<R: Rng + ?Sized>(&mut self, sample: &Sample, rng: &mut R) -> Crossing {
        let n_before = self.n_true;
        let atoms = sample_occupancy(sample.mean_atoms, rng);
        let mut outcomes = Vec::with_capacity(atoms as usize);
        let mut detected = Vec::with_capacity(atoms as usize);
        for _ in 0..atoms {
            let state = match sample.interaction {
                Interaction::Sensor { phase } => {
                    interact_sensor_true(self.n_true, phase, &self.params, rng)
                }
                Interaction::Actuator {
                    prepared,
                    resonant: false,
                    ..
                } => prepared,
                Interaction::Actuator {
                    prepared,
                    time,
                    resonant: true,
                } => {
                    let (k, n, reflected) = interact_actuator_true(
                        self.n_true,
                        prepared,
                        time,
                        &self.params,
                        &self.calib,
                        rng,
                    );
                    if k != prepared {
                        match prepared {
                            AtomState::Excited => self.diagnostics.emissions += 1,
                            AtomState::Ground => self.diagnostics.absorptions += 1,
                        }
                    }
                    if reflected {
                        self.diagnostics.reflections += 1;
                    }
                    self.n_true = n;
                    k
                }
            };
            outcomes.push(state);
            detected.push(uniform(rng) < self.params.eta_d);
        }
        Crossing {
            sample: *sample,
            time: self.time,
            n_before,
            n_after: self.n_true,
            outcomes,
            detected,
        }
    }

    /// Cavity damping and thermal excitation over `dt`.
    pub fn evolve<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) {
        let (n, jumps) = evolve_cavity(self.n_true, dt, &self.params, rng);
        self.n_true = n;
        self.time += dt;
        self.diagnostics.jumps_up += u64::from(jumps.up);
        self.diagnostics.jumps_down += u64::from(jumps.down);
    }

    /// Moves a crossed sample into the delay line; returns the sample whose
    /// detection becomes available.
    pub fn pipeline_step(&mut self, crossing: Crossing) -> Option<Crossing> {
        self.pipeline.push(crossing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{trapping_emit_time, TargetSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// |observed − expected| within 3σ of a binomial proportion.
    fn within_3_sigma(hits: usize, trials: usize, p: f64) -> bool {
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        ((hits as f64 / trials as f64) - p).abs() <= 3.0 * sigma + 1e-12
    }

    #[test]
    fn occupancy_frequencies() {
        let mut r = rng(1);
        assert!((0..1000).all(|_| sample_occupancy(0.0, &mut r) == 0));
        let trials = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[sample_occupancy(0.5, &mut r) as usize] += 1;
        }
        let w = occupancy_weights(0.5);
        for a in 0..3 {
            assert!(within_3_sigma(counts[a], trials, w[a]), "{a}: {counts:?}");
        }
        let empty = (0..trials).filter(|_| sample_occupancy(1.3, &mut r) == 0).count();
        assert!(within_3_sigma(empty, trials, 0.272_531_793));
    }

    #[test]
    fn single_photon_jump_probability() {
        let params = PhysicsParams {
            n_thermal: 0.0,
            ..Default::default()
        };
        let mut r = rng(2);
        let trials = 400_000;
        let jumps = (0..trials)
            .filter(|_| evolve_cavity(1, params.t_sample, &params, &mut r).0 == 0)
            .count();
        let p = 1.0 - (-params.t_sample / params.t_cavity).exp();
        assert!(within_3_sigma(jumps, trials, p), "{jumps}");
        assert!((0..1000).all(|_| evolve_cavity(0, 1.0, &params, &mut r).0 == 0));
    }

    #[test]
    fn long_run_is_thermal() {
        let params = PhysicsParams::default();
        let mut r = rng(3);
        let mut total = 0usize;
        let (chains, per_chain) = (100_000, 10);
        for _ in 0..chains {
            let mut n = evolve_cavity(0, 10.0 * params.t_cavity, &params, &mut r).0;
            for _ in 0..per_chain {
                n = evolve_cavity(n, params.t_sample, &params, &mut r).0;
                total += n;
            }
        }
        let mean = total as f64 / (chains * per_chain) as f64;
        assert!((mean - 0.05).abs() < 0.005, "{mean}");
    }

    #[test]
    fn sensor_frequencies() {
        let ideal = PhysicsParams {
            b_s: 0.0,
            c_s: 1.0,
            ..Default::default()
        };
        let mut r = rng(4);
        assert!((0..1000)
            .all(|_| interact_sensor_true(0, 0.0, &ideal, &mut r) == AtomState::Excited));

        let params = PhysicsParams::default();
        let t = TargetSpec::new(4, &params).unwrap();
        let trials = 100_000;
        for n in [2, 4, 5] {
            let e = (0..trials)
                .filter(|_| interact_sensor_true(n, t.phase, &params, &mut r) == AtomState::Excited)
                .count();
            let we = sensor_weight(AtomState::Excited, n, t.phase, &params);
            let wg = sensor_weight(AtomState::Ground, n, t.phase, &params);
            assert!(within_3_sigma(e, trials, we / (we + wg)), "n={n}: {e}");
        }
        let fair = (0..trials)
            .filter(|_| interact_sensor_true(4, t.phase, &ideal, &mut r) == AtomState::Excited)
            .count();
        assert!(within_3_sigma(fair, trials, 0.5));
    }

    #[test]
    fn actuator_examples() {
        let params = PhysicsParams::default();
        let ideal = ActuatorCalibration::ideal(params.n_max);
        let calib = ActuatorCalibration::default_for(params.n_max);
        let mut r = rng(5);
        for _ in 0..1000 {
            let (k, n, _) =
                interact_actuator_true(0, AtomState::Ground, 2e-5, &params, &calib, &mut r);
            assert_eq!((k, n), (AtomState::Ground, 0));
        }
        let trap = trapping_emit_time(4, params.omega0);
        for _ in 0..1000 {
            let (k, n, _) =
                interact_actuator_true(4, AtomState::Excited, trap, &params, &ideal, &mut r);
            assert_eq!((k, n), (AtomState::Excited, 4));
        }
        let t = TargetSpec::new(4, &params).unwrap();
        let trials = 100_000;
        for (prepared, time, m) in [
            (AtomState::Excited, t.t_emit, 3),
            (AtomState::Ground, t.t_absorb, 5),
        ] {
            let flips = (0..trials)
                .filter(|_| {
                    interact_actuator_true(m, prepared, time, &params, &calib, &mut r).0 != prepared
                })
                .count();
            let p = flip_probability(prepared, m, time, params.omega0, &calib);
            assert!(within_3_sigma(flips, trials, p), "{prepared:?}: {flips}");
        }
    }

    #[test]
    fn emission_at_truncation_is_reflected() {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::ideal(params.n_max);
        let t = core::f64::consts::PI / (params.omega0 * ((params.n_max + 1) as f64).sqrt());
        let mut r = rng(6);
        let (k, n, reflected) =
            interact_actuator_true(params.n_max, AtomState::Excited, t, &params, &calib, &mut r);
        assert_eq!((k, n, reflected), (AtomState::Ground, params.n_max, true));
    }

    #[test]
    fn detection_efficiency() {
        let mut r = rng(7);
        let atoms = [AtomState::Excited, AtomState::Ground];
        assert!((0..100).all(|_| detect(&atoms, 1.0, &mut r) == [true, true]));
        assert!((0..100).all(|_| detect(&atoms, 0.0, &mut r) == [false, false]));
        let trials = 100_000;
        let both = (0..trials)
            .filter(|_| detect(&atoms, 0.25, &mut r) == [true, true])
            .count();
        assert!(within_3_sigma(both, trials, 0.0625));
    }

    #[test]
    fn delay_line_is_fifo() {
        let mut line = DelayLine::new(0);
        assert_eq!(line.push(7), Some(7));

        let mut line = DelayLine::new(3);
        let mut out = Vec::new();
        for i in 0..10_000u32 {
            if let Some(x) = line.push(i) {
                out.push(x);
            }
            assert!(line.len() <= 3);
        }
        assert_eq!(out.len(), 10_000 - 3);
        assert!(out.iter().enumerate().all(|(i, x)| *x == i as u32));
    }

    #[test]
    fn revoked_actuator_does_nothing() {
        let params = PhysicsParams {
            m_control: 2.0,
            ..Default::default()
        };
        let calib = ActuatorCalibration::ideal(params.n_max);
        let mut plant = Plant::new(params, calib, 3);
        let mut sample = Sample::emitter(TargetSpec::new(4, &params).unwrap().t_emit, 2.0);
        if let Interaction::Actuator { resonant, .. } = &mut sample.interaction {
            *resonant = false;
        }
        let mut r = rng(8);
        for _ in 0..1000 {
            let c = plant.cross(&sample, &mut r);
            assert_eq!(c.n_after, 3);
            assert!(c.outcomes.iter().all(|s| *s == AtomState::Excited));
        }
    }

    #[test]
    fn sensors_never_change_the_field() {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::default_for(params.n_max);
        let mut plant = Plant::new(params, calib, 5);
        let mut r = rng(9);
        for _ in 0..2000 {
            let c = plant.cross(&Sample::sensor(0.3, 1.3), &mut r);
            assert_eq!(c.n_before, c.n_after);
        }
    }

    #[test]
    fn same_seed_same_crossings() {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::default_for(params.n_max);
        let t = TargetSpec::new(3, &params).unwrap();
        let run = |seed| {
            let mut plant = Plant::new(params, calib.clone(), 0);
            let mut r = rng(seed);
            let mut log = Vec::new();
            for i in 0..500 {
                let s = if i % 4 == 0 {
                    Sample::emitter(t.t_emit, 0.5)
                } else {
                    Sample::sensor(t.phase, 1.3)
                };
                let c = plant.cross(&s, &mut r);
                plant.evolve(params.t_sample, &mut r);
                log.push((c.outcomes, c.detected, plant.n_true()));
            }
            log
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }
}
