//! The feedback controller: loop schedule, mode selection for control
//! samples, resonance cancellation of in-flight actuators and target
//! sequencing.
//!
//! A loop is `N_s` sensor samples followed by `N_c` control samples. After
//! every detection the controller re-plans every control sample it can still
//! influence: the modes of control samples not yet prepared in the current
//! loop, and whether an already prepared actuator still on its way to the
//! cavity interacts resonantly. All combinations are enumerated and the one
//! whose outcome-averaged prediction has the smallest distance to the target
//! wins.

use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{distance_of, PhotonDistribution};
use crate::error::Error;
use crate::estimator::{Estimator, SequentialTwoAtom, TwoAtomKernel};
use crate::linalg::DenseMatrix;
use crate::model::{ActuatorCalibration, AtomState, PhysicsParams, TargetSpec};
use crate::sample::{Interaction, Mode, Sample, SampleAnnouncement};

pub use crate::model::sensor_phase;

/// Relative margin below which two expected distances count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// True iff the estimated `p(n_t)` exceeds `threshold` (strictly).
pub fn stop_rule(estimate: &PhotonDistribution, n_target: usize, threshold: f64) -> bool {
    estimate.prob(n_target) > threshold
}

/// Steps through a list of targets, moving on once the estimate of the
/// current one exceeds the threshold. The last target is held.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSequencer {
    targets: Vec<usize>,
    index: usize,
    threshold: f64,
}

impl TargetSequencer {
    pub fn new(targets: Vec<usize>, threshold: f64) -> Result<Self, Error> {
        if targets.is_empty() {
            return Err(Error::InvalidParameter {
                field: "targets",
                reason: "target sequence is empty",
            });
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter {
                field: "threshold",
                reason: "must lie strictly between 0 and 1",
            });
        }
        Ok(Self {
            targets,
            index: 0,
            threshold,
        })
    }

    pub fn current(&self) -> usize {
        self.targets[self.index]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of switches performed so far.
    pub fn position(&self) -> usize {
        self.index
    }

    pub fn is_exhausted(&self) -> bool {
        self.index + 1 >= self.targets.len()
    }

    /// Returns the new target when a switch happens.
    pub fn advance(&mut self, estimate: &PhotonDistribution) -> Option<usize> {
        if self.is_exhausted() || !stop_rule(estimate, self.current(), self.threshold) {
            return None;
        }
        self.index += 1;
        Some(self.current())
    }
}

/// Controller verdict for one revisable sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Mode for a control sample that is not prepared yet.
    Mode(Mode),
    /// Whether a prepared actuator interacts resonantly with the cavity.
    Resonant(bool),
}

/// Joint decision over all revisable samples, keyed by sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    pub decisions: Vec<(u64, Decision)>,
    /// Predicted distance after the last sample of the current loop.
    pub expected_distance: f64,
}

/// A sample that was just prepared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prepared {
    pub index: u64,
    pub position: usize,
    pub mode: Mode,
    /// Prepared in a control slot (its mode was chosen by the controller).
    pub control: bool,
    /// Mean of the estimate the choice was based on.
    pub estimated_mean: f64,
}

/// A sample leaving for the cavity with its final settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Released {
    pub index: u64,
    pub sample: Sample,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub estimate: PhotonDistribution,
    pub distance: f64,
    /// `(from, to)` when the target changed.
    pub switched: Option<(usize, usize)>,
    pub expected_distance: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ControllerDiagnostics {
    pub decisions: u64,
    pub revocations: u64,
    pub switches: u64,
    pub emitters: u64,
    pub absorbers: u64,
    pub control_sensors: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Staged {
    index: u64,
    sample: Sample,
}

#[derive(Debug, Clone)]
struct Channels {
    emit: DenseMatrix,
    absorb: DenseMatrix,
}

enum Slot<'a> {
    Sensor,
    Revocable {
        index: u64,
        keep: &'a DenseMatrix,
        emitter: bool,
    },
    Free {
        index: u64,
    },
}

/// Controller state of one trajectory.
#[derive(Debug, Clone)]
pub struct LoopState<K = SequentialTwoAtom> {
    estimator: Estimator<K>,
    target: TargetSpec,
    time_scale: (f64, f64),
    sequencer: Option<TargetSequencer>,
    staged: Option<Staged>,
    next_index: u64,
    plan: Vec<Mode>,
    estimate: PhotonDistribution,
    expected_distance: f64,
    channels: Channels,
    /// `R^h` for every horizon `h` up to one loop.
    relax_powers: Vec<DenseMatrix>,
    diagnostics: ControllerDiagnostics,
}

impl LoopState<SequentialTwoAtom> {
    pub fn new(
        params: PhysicsParams,
        calib: ActuatorCalibration,
        prior: PhotonDistribution,
        target: TargetSpec,
    ) -> Self {
        Self::from_estimator(Estimator::new(params, calib, prior), target)
    }

    /// Follows a target sequence instead of a fixed target.
    pub fn with_sequence(
        params: PhysicsParams,
        calib: ActuatorCalibration,
        prior: PhotonDistribution,
        sequencer: TargetSequencer,
    ) -> Result<Self, Error> {
        for &n in sequencer.targets() {
            TargetSpec::new(n, &params)?;
        }
        let target = TargetSpec::new(sequencer.current(), &params)?;
        let mut state = Self::new(params, calib, prior, target);
        state.sequencer = Some(sequencer);
        Ok(state)
    }
}

impl<K: TwoAtomKernel> LoopState<K> {
    pub fn from_estimator(estimator: Estimator<K>, target: TargetSpec) -> Self {
        let params = estimator.params();
        let plan = vec![Mode::Sensor; params.n_controls];
        let estimate = estimator.current();
        let channels = Self::channels_for(&estimator, &target);
        let step = estimator.relaxation_step();
        let mut relax_powers = vec![DenseMatrix::identity(step.dim())];
        for h in 0..params.loop_len() {
            let next = step.mul(&relax_powers[h]);
            relax_powers.push(next);
        }
        Self {
            estimator,
            target,
            time_scale: (1.0, 1.0),
            sequencer: None,
            staged: None,
            next_index: 0,
            plan,
            expected_distance: estimate.distance(target.n_target),
            estimate,
            channels,
            relax_powers,
            diagnostics: ControllerDiagnostics::default(),
        }
    }

    /// Scales the emitter and absorber interaction times of every target.
    pub fn with_time_scale(mut self, emit_scale: f64, absorb_scale: f64) -> Self {
        self.time_scale = (emit_scale, absorb_scale);
        let base = TargetSpec::new(self.target.n_target, self.estimator.params())
            .unwrap_or(self.target);
        self.target = base.with_time_scale(emit_scale, absorb_scale);
        self.channels = Self::channels_for(&self.estimator, &self.target);
        self
    }

    fn channels_for(estimator: &Estimator<K>, target: &TargetSpec) -> Channels {
        let m = estimator.params().m_control;
        Channels {
            emit: estimator.sample_channel(&Sample::emitter(target.t_emit, m)),
            absorb: estimator.sample_channel(&Sample::absorber(target.t_absorb, m)),
        }
    }

    fn params(&self) -> &PhysicsParams {
        self.estimator.params()
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn estimator(&self) -> &Estimator<K> {
        &self.estimator
    }

    /// Latest estimate of the field, in-flight samples traced over.
    pub fn estimate(&self) -> &PhotonDistribution {
        &self.estimate
    }

    pub fn expected_distance(&self) -> f64 {
        self.expected_distance
    }

    pub fn sequencer(&self) -> Option<&TargetSequencer> {
        self.sequencer.as_ref()
    }

    pub fn diagnostics(&self) -> ControllerDiagnostics {
        self.diagnostics
    }

    /// Planned modes of the control slots of the current loop.
    pub fn plan(&self) -> &[Mode] {
        &self.plan
    }

    /// Settings of the prepared sample not yet in the cavity.
    pub fn staged(&self) -> Option<(u64, &Sample)> {
        self.staged.as_ref().map(|s| (s.index, &s.sample))
    }

    /// Position within the loop of the next sample to prepare.
    pub fn schedule_position(&self) -> usize {
        (self.next_index % self.params().loop_len() as u64) as usize
    }

    /// Role of the next sample to prepare: sensor slots are unconditional,
    /// control slots follow the latest plan.
    pub fn schedule_next(&self) -> Mode {
        let pos = self.schedule_position();
        let n_s = self.params().n_sensors;
        if pos < n_s {
            Mode::Sensor
        } else {
            self.plan[pos - n_s]
        }
    }

    fn make_sample(&self, mode: Mode, control: bool) -> Sample {
        let params = self.params();
        let m = if control {
            params.m_control
        } else {
            params.m_sensor
        };
        match mode {
            Mode::Sensor => Sample::sensor(self.target.phase, m),
            Mode::Emitter => Sample::emitter(self.target.t_emit, m),
            Mode::Absorber => Sample::absorber(self.target.t_absorb, m),
        }
    }

    /// Prepares the next sample of the schedule. Its resonance can still be
    /// cancelled until [`LoopState::release`].
    pub fn prepare_next(&mut self) -> Prepared {
        let pos = self.schedule_position();
        let control = pos >= self.params().n_sensors;
        let mode = self.schedule_next();
        let sample = self.make_sample(mode, control);
        let index = self.next_index;
        self.next_index += 1;
        self.staged = Some(Staged { index, sample });
        if control {
            match mode {
                Mode::Sensor => self.diagnostics.control_sensors += 1,
                Mode::Emitter => self.diagnostics.emitters += 1,
                Mode::Absorber => self.diagnostics.absorbers += 1,
            }
        }
        Prepared {
            index,
            position: pos,
            mode,
            control,
            estimated_mean: self.estimate.mean(),
        }
    }

    /// The staged sample crosses the cavity with its final settings.
    pub fn release(&mut self) -> Released {
        if self.staged.is_none() {
            self.prepare_next();
        }
        let Staged { index, sample } = self.staged.take().expect("a sample is staged");
        let revoked = sample.interaction.is_revoked();
        if revoked {
            self.diagnostics.revocations += 1;
        }
        self.estimator.record_crossing(sample);
        Released {
            index,
            sample,
            revoked,
        }
    }

    /// End of a sample interval: absorb the detection that reached the
    /// controller (if any), refresh the estimate, advance the target
    /// sequence and re-plan.
    pub fn end_interval(&mut self, detection: Option<&SampleAnnouncement>) -> IntervalReport {
        let consistent = detection.is_none_or(|ann| self.estimator.absorb(ann).is_ok());
        self.estimate = self.estimator.current();

        let mut switched = None;
        if let Some(next) = self
            .sequencer
            .as_mut()
            .and_then(|seq| seq.advance(&self.estimate))
        {
            let from = self.target.n_target;
            self.set_target(next);
            self.diagnostics.switches += 1;
            switched = Some((from, next));
        }

        let set = self.decide();
        self.apply(&set);

        IntervalReport {
            distance: self.estimate.distance(self.target.n_target),
            estimate: self.estimate.clone(),
            switched,
            expected_distance: set.expected_distance,
            consistent,
        }
    }

    fn set_target(&mut self, n_target: usize) {
        let (te, tg) = self.time_scale;
        self.target = TargetSpec::new(n_target, self.params())
            .expect("sequence targets are validated up front")
            .with_time_scale(te, tg);
        self.channels = Self::channels_for(&self.estimator, &self.target);
    }

    /// Whether the current estimate of `p(n_t)` exceeds `threshold`.
    pub fn stop_rule(&self, threshold: f64) -> bool {
        stop_rule(&self.estimate, self.target.n_target, threshold)
    }

    /// Number of sample intervals covered by the next decision.
    pub fn horizon(&self) -> usize {
        let l = self.params().loop_len() as u64;
        let first = self.staged.map_or(self.next_index, |s| s.index);
        (l - first % l) as usize
    }

    /// Minimum-distance joint choice for all revisable samples.
    pub fn decide(&self) -> DecisionSet {
        let n_t = self.target.n_target;
        self.decide_with(|p| distance_of(p, n_t))
    }

    /// [`LoopState::decide`] with an arbitrary cost on the predicted
    /// distribution.
    ///
    /// The prediction applies the outcome-averaged action of every pending
    /// sample, then the damping of the whole horizon. Sensors act as the
    /// identity, so plans that only move actuators between slots tie
    /// exactly. Ties (within a relative 1e-12) go to fewer resonant
    /// actuators, then fewer emitters, then the plan that acts earliest.
    pub fn decide_with(&self, cost: impl Fn(&[f64]) -> f64) -> DecisionSet {
        let params = self.params();
        let l = params.loop_len() as u64;
        let n_s = params.n_sensors as u64;

        let staged_keep = self.staged.and_then(|s| match s.sample.interaction {
            Interaction::Actuator { prepared, time, .. } => {
                let sample = Sample {
                    interaction: Interaction::Actuator {
                        prepared,
                        time,
                        resonant: true,
                    },
                    mean_atoms: s.sample.mean_atoms,
                };
                Some((self.estimator.sample_channel(&sample), prepared))
            }
            Interaction::Sensor { .. } => None,
        });

        let first = self.staged.map_or(self.next_index, |s| s.index);
        let last = first - first % l + l;
        let mut slots = Vec::with_capacity((last - first) as usize);
        for index in first..last {
            let staged = self.staged.filter(|s| s.index == index);
            let slot = match (staged, &staged_keep) {
                (Some(s), Some((keep, prepared))) => Slot::Revocable {
                    index: s.index,
                    keep,
                    emitter: *prepared == AtomState::Excited,
                },
                (Some(_), None) => Slot::Sensor,
                (None, _) if index % l < n_s => Slot::Sensor,
                (None, _) => Slot::Free { index },
            };
            slots.push(slot);
        }

        let dim = self.estimate.len();
        let mut bufs = vec![vec![0.0; dim]; slots.len() + 1];
        bufs[0].copy_from_slice(self.estimate.probabilities());
        let mut search = Search {
            slots: &slots,
            channels: &self.channels,
            relax: &self.relax_powers[slots.len()],
            cost: &cost,
            scratch: vec![0.0; dim],
            choice: Vec::with_capacity(slots.len()),
            key: TieKey::default(),
            best: None,
        };
        search.run(0, &mut bufs);
        let best = search.best.expect("at least one combination");
        DecisionSet {
            decisions: best.choice,
            expected_distance: best.cost,
        }
    }

    fn apply(&mut self, set: &DecisionSet) {
        let l = self.params().loop_len() as u64;
        let n_s = self.params().n_sensors as u64;
        for &(index, decision) in &set.decisions {
            match decision {
                Decision::Resonant(keep) => {
                    if let Some(Staged {
                        index: staged,
                        sample:
                            Sample {
                                interaction: Interaction::Actuator { resonant, .. },
                                ..
                            },
                    }) = self.staged.as_mut()
                    {
                        if *staged == index {
                            *resonant = keep;
                        }
                    }
                }
                Decision::Mode(mode) => {
                    let pos = index % l;
                    if pos >= n_s {
                        self.plan[(pos - n_s) as usize] = mode;
                    }
                }
            }
        }
        self.expected_distance = set.expected_distance;
        self.diagnostics.decisions += 1;
    }
}

/// Secondary order among equally good plans; smaller wins.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct TieKey {
    resonant: usize,
    emitters: usize,
    /// Depths of the resonant actuators, in time order.
    positions: Vec<usize>,
}

struct Best {
    cost: f64,
    key: TieKey,
    choice: Vec<(u64, Decision)>,
}

struct Search<'a, F> {
    slots: &'a [Slot<'a>],
    channels: &'a Channels,
    relax: &'a DenseMatrix,
    cost: &'a F,
    scratch: Vec<f64>,
    choice: Vec<(u64, Decision)>,
    key: TieKey,
    best: Option<Best>,
}

impl<F: Fn(&[f64]) -> f64> Search<'_, F> {
    fn leaf(&mut self, v: &[f64]) {
        self.relax.apply_into(v, &mut self.scratch);
        let d = (self.cost)(&self.scratch);
        let better = match &self.best {
            None => true,
            Some(best) => {
                let tol = TIE_TOLERANCE * best.cost.abs();
                d < best.cost - tol || (d <= best.cost + tol && self.key < best.key)
            }
        };
        if better {
            self.best = Some(Best {
                cost: d,
                key: self.key.clone(),
                choice: self.choice.clone(),
            });
        }
    }

    fn branch(&mut self, bufs: &mut [Vec<f64>], depth: usize, m: Option<&DenseMatrix>, emitter: bool) {
        match m {
            Some(m) => {
                step(m, bufs, depth);
                self.key.resonant += 1;
                self.key.emitters += usize::from(emitter);
                self.key.positions.push(depth);
                self.run(depth + 1, bufs);
                self.key.positions.pop();
                self.key.emitters -= usize::from(emitter);
                self.key.resonant -= 1;
            }
            None => {
                let (head, tail) = bufs.split_at_mut(depth + 1);
                tail[0].copy_from_slice(&head[depth]);
                self.run(depth + 1, bufs);
            }
        }
    }

    fn run(&mut self, depth: usize, bufs: &mut [Vec<f64>]) {
        if depth == self.slots.len() {
            let v = core::mem::take(&mut bufs[depth]);
            self.leaf(&v);
            bufs[depth] = v;
            return;
        }
        match self.slots[depth] {
            Slot::Sensor => self.branch(bufs, depth, None, false),
            Slot::Revocable {
                index,
                keep,
                emitter,
            } => {
                for resonant in [false, true] {
                    self.choice.push((index, Decision::Resonant(resonant)));
                    self.branch(bufs, depth, resonant.then_some(keep), emitter);
                    self.choice.pop();
                }
            }
            Slot::Free { index } => {
                for mode in Mode::PREFERENCE {
                    let channels = self.channels;
                    let m = match mode {
                        Mode::Sensor => None,
                        Mode::Absorber => Some(&channels.absorb),
                        Mode::Emitter => Some(&channels.emit),
                    };
                    self.choice.push((index, Decision::Mode(mode)));
                    self.branch(bufs, depth, m, mode == Mode::Emitter);
                    self.choice.pop();
                }
            }
        }
    }
}

fn step(m: &DenseMatrix, bufs: &mut [Vec<f64>], depth: usize) {
    let (head, tail) = bufs.split_at_mut(depth + 1);
    m.apply_into(&head[depth], &mut tail[0]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Detection;

    fn state_with_prior(prior: PhotonDistribution, n_t: usize) -> LoopState {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::default_for(params.n_max);
        let target = TargetSpec::new(n_t, &params).unwrap();
        LoopState::from_estimator(Estimator::new(params, calib, prior), target)
    }

    fn advance_to_control(state: &mut LoopState) {
        let n_s = PhysicsParams::default().n_sensors;
        // stage the last sensor sample, so every control slot is free
        for _ in 0..n_s - 1 {
            state.prepare_next();
            state.release();
        }
        state.prepare_next();
    }

    fn modes(set: &DecisionSet) -> Vec<Mode> {
        set.decisions
            .iter()
            .filter_map(|(_, d)| match d {
                Decision::Mode(m) => Some(*m),
                Decision::Resonant(_) => None,
            })
            .collect()
    }

    #[test]
    fn schedule_wraps_with_loop() {
        let mut state = state_with_prior(PhotonDistribution::vacuum(12), 3);
        let l = PhysicsParams::default().loop_len();
        let mut roles = Vec::new();
        for _ in 0..2 * l {
            let p = state.prepare_next();
            roles.push((p.position, p.control));
            state.release();
        }
        assert_eq!(roles[0], (0, false));
        assert_eq!(roles[11], (11, false));
        assert_eq!(roles[12], (12, true));
        assert_eq!(roles[15], (15, true));
        assert_eq!(roles[16], (0, false));
    }

    #[test]
    fn fock_target_keeps_sensors() {
        let mut state = state_with_prior(PhotonDistribution::fock(3, 12).unwrap(), 3);
        advance_to_control(&mut state);
        let set = state.decide();
        assert_eq!(modes(&set), vec![Mode::Sensor; 4]);
    }

    #[test]
    fn one_photon_short_requests_emitter() {
        let mut state = state_with_prior(PhotonDistribution::fock(2, 12).unwrap(), 3);
        advance_to_control(&mut state);
        let set = state.decide();
        assert!(modes(&set).contains(&Mode::Emitter), "{set:?}");
        assert!(!modes(&set).contains(&Mode::Absorber));
    }

    #[test]
    fn excess_photons_request_absorbers() {
        let mut state = state_with_prior(PhotonDistribution::fock(5, 12).unwrap(), 3);
        advance_to_control(&mut state);
        let set = state.decide();
        assert!(modes(&set).contains(&Mode::Absorber), "{set:?}");
        assert!(!modes(&set).contains(&Mode::Emitter));
    }

    #[test]
    fn decision_never_worse_than_all_sensors() {
        let params = PhysicsParams::default();
        for k in 0..10 {
            let mut state = state_with_prior(PhotonDistribution::fock(k, 12).unwrap(), 3);
            advance_to_control(&mut state);
            let set = state.decide();
            let mut v = state.estimate().probabilities().to_vec();
            let mut w = v.clone();
            let relax = state.estimator().relaxation_step();
            for _ in 0..state.horizon() {
                relax.apply_into(&v, &mut w);
                core::mem::swap(&mut v, &mut w);
            }
            let all_sensors = distance_of(&v, 3);
            assert!(set.expected_distance <= all_sensors + 1e-12, "k={k}");
            assert_eq!(state.horizon(), params.n_controls + 1);
        }
    }

    #[test]
    fn argmin_is_scale_invariant() {
        for k in [0, 1, 2, 4, 6] {
            let mut state = state_with_prior(PhotonDistribution::fock(k, 12).unwrap(), 3);
            advance_to_control(&mut state);
            let a = state.decide();
            for c in [1e-6, 0.37, 5.0, 1e8] {
                let b = state.decide_with(|p| c * distance_of(p, 3));
                assert_eq!(a.decisions, b.decisions, "k={k} c={c}");
            }
        }
    }

    #[test]
    fn staged_actuator_can_be_cancelled() {
        let mut state = state_with_prior(PhotonDistribution::fock(2, 12).unwrap(), 3);
        advance_to_control(&mut state);
        state.release();
        state.end_interval(None);
        state.plan[0] = Mode::Emitter;
        state.prepare_next();
        let (_, staged) = state.staged().unwrap();
        assert_eq!(staged.mode(), Mode::Emitter);
        // once the estimate sits on target, the emitter is switched off
        state.estimate = PhotonDistribution::fock(3, 12).unwrap();
        let set = state.decide();
        assert!(set.decisions.contains(&(
            state.staged().unwrap().0,
            Decision::Resonant(false)
        )));
        state.apply(&set);
        let rel = state.release();
        assert!(rel.revoked);
        assert_eq!(state.diagnostics().revocations, 1);
    }

    #[test]
    fn decisions_are_deterministic() {
        let run = || {
            let mut state = state_with_prior(PhotonDistribution::thermal(0.05, 12), 2);
            let mut out = Vec::new();
            for k in 0..60 {
                state.prepare_next();
                let rel = state.release();
                let detected = if k % 3 == 0 {
                    Detection::single(crate::model::AtomState::Excited)
                } else {
                    Detection::none()
                };
                let ann = SampleAnnouncement {
                    sample: rel.sample,
                    detected,
                };
                let r = state.end_interval(Some(&ann));
                out.push((r.expected_distance.to_bits(), state.plan().to_vec()));
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stop_rule_is_strict() {
        let mut w = vec![0.0; 13];
        w[3] = 0.8;
        w[2] = 0.2;
        let p = PhotonDistribution::from_weights(w).unwrap();
        assert!(!stop_rule(&p, 3, 0.8));
        assert!(stop_rule(&p, 3, 0.79));
    }

    #[test]
    fn sequencer_switches_only_above_threshold() {
        let mut seq = TargetSequencer::new(vec![3, 1], 0.8).unwrap();
        let mut w = vec![0.0; 13];
        w[3] = 0.79;
        w[4] = 0.21;
        let p = PhotonDistribution::from_weights(w).unwrap();
        assert_eq!(seq.advance(&p), None);
        let p = PhotonDistribution::fock(3, 12).unwrap();
        assert_eq!(seq.advance(&p), Some(1));
        assert!(seq.is_exhausted());
        assert_eq!(seq.advance(&PhotonDistribution::fock(1, 12).unwrap()), None);
        assert_eq!(seq.current(), 1);
    }

    #[test]
    fn sequencer_rejects_bad_input() {
        assert!(TargetSequencer::new(vec![], 0.8).is_err());
        assert!(TargetSequencer::new(vec![2], 1.0).is_err());
        assert!(TargetSequencer::new(vec![2], 0.0).is_err());
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::default_for(12);
        let seq = TargetSequencer::new(vec![3, 11], 0.8).unwrap();
        let prior = PhotonDistribution::vacuum(12);
        assert!(LoopState::with_sequence(params, calib, prior, seq).is_err());
    }
}
