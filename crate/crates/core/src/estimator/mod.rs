//! The controller-side Bayesian photon-number filter.
//!
//! Every update is linear in `p` followed by one renormalization, so the
//! recursive filter reproduces the exact marginal posterior of the hidden
//! photon number.

mod kernel;
mod update;

use alloc::collections::VecDeque;
use alloc::vec;

pub use kernel::{averaged_channel, ActuatorKernel, SequentialTwoAtom, TwoAtomKernel};
pub use update::{
    distance, trace_pending, two_atom_update, two_atom_update_with, update_actuator,
    update_announced, update_announced_with, update_no_detection, update_partial_detection,
    update_relaxation, update_sensor,
};

use crate::distribution::PhotonDistribution;
use crate::error::Inconsistency;
use crate::linalg::DenseMatrix;
use crate::model::{relaxation_propagator, ActuatorCalibration, PhysicsParams};
use crate::sample::{Sample, SampleAnnouncement};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimatorDiagnostics {
    pub updates: u64,
    /// Detector records that had zero likelihood and were ignored.
    pub inconsistencies: u64,
}

/// Filter state of one trajectory.
///
/// `posterior` is conditioned on every detection received so far and refers
/// to the field one sample interval after the last detected sample crossed
/// the cavity. Samples that crossed later are kept in crossing order and
/// traced over on demand by [`Estimator::current`].
#[derive(Debug, Clone)]
pub struct Estimator<K = SequentialTwoAtom> {
    params: PhysicsParams,
    calib: ActuatorCalibration,
    two_atom: K,
    posterior: PhotonDistribution,
    in_flight: VecDeque<Sample>,
    step: DenseMatrix,
    diagnostics: EstimatorDiagnostics,
}

impl Estimator<SequentialTwoAtom> {
    pub fn new(params: PhysicsParams, calib: ActuatorCalibration, prior: PhotonDistribution) -> Self {
        Self::with_kernel(params, calib, prior, SequentialTwoAtom)
    }
}

impl<K: TwoAtomKernel> Estimator<K> {
    pub fn with_kernel(
        params: PhysicsParams,
        calib: ActuatorCalibration,
        prior: PhotonDistribution,
        two_atom: K,
    ) -> Self {
        assert_eq!(prior.n_max(), params.n_max, "prior truncation mismatch");
        let step = relaxation_propagator(&params, params.t_sample);
        Self {
            params,
            calib,
            two_atom,
            posterior: prior,
            in_flight: VecDeque::new(),
            step,
            diagnostics: EstimatorDiagnostics::default(),
        }
    }

    /// A sample has crossed the cavity; its detection arrives later.
    pub fn record_crossing(&mut self, sample: Sample) {
        self.in_flight.push_back(sample);
    }

    /// Folds in the detection of the oldest in-flight sample, then the
    /// damping of the interval that followed its crossing.
    ///
    /// An impossible record leaves the posterior unchanged (damping is still
    /// applied) and is counted in the diagnostics.
    pub fn absorb(&mut self, ann: &SampleAnnouncement) -> Result<(), Inconsistency> {
        let front = self.in_flight.pop_front();
        debug_assert!(
            front.is_none_or(|s| s == ann.sample),
            "detections must arrive in crossing order"
        );
        self.diagnostics.updates += 1;
        let result = update_announced_with(
            &mut self.posterior,
            ann,
            &self.params,
            &self.calib,
            &self.two_atom,
        );
        if result.is_err() {
            self.diagnostics.inconsistencies += 1;
        }
        self.relax_posterior();
        result
    }

    fn relax_posterior(&mut self) {
        let mut out = vec![0.0; self.posterior.len()];
        self.step.apply_into(self.posterior.probabilities(), &mut out);
        self.posterior
            .assign_normalized(&out)
            .expect("relaxation conserves probability");
    }

    /// Best estimate of the field now: the posterior carried through every
    /// in-flight sample (outcome-averaged) and the damping that followed it.
    pub fn current(&self) -> PhotonDistribution {
        let mut cur = self.posterior.probabilities().to_vec();
        let mut next = vec![0.0; cur.len()];
        for sample in &self.in_flight {
            self.predict_sample(sample, &cur, &mut next);
            self.step.apply_into(&next, &mut cur);
        }
        let mut out = self.posterior.clone();
        out.assign_normalized(&cur)
            .expect("prediction conserves probability");
        out
    }

    /// Expected field after `sample` crosses, its outcome unknown.
    pub fn predict_sample(&self, sample: &Sample, p: &[f64], out: &mut [f64]) {
        match ActuatorKernel::for_interaction(&sample.interaction, &self.params, &self.calib) {
            Some(kernel) => {
                kernel::predict_actuator(&kernel, &self.two_atom, sample.mean_atoms, p, out)
            }
            None => out.copy_from_slice(p),
        }
    }

    /// Matrix of `sample`'s outcome-averaged action; the identity for
    /// sensors.
    pub fn sample_channel(&self, sample: &Sample) -> DenseMatrix {
        match ActuatorKernel::for_interaction(&sample.interaction, &self.params, &self.calib) {
            Some(kernel) => averaged_channel(&kernel, &self.two_atom, sample.mean_atoms),
            None => DenseMatrix::identity(self.posterior.len()),
        }
    }

    /// Matrix of `sample`'s expected action followed by one interval of
    /// damping.
    pub fn interval_channel(&self, sample: &Sample) -> DenseMatrix {
        match ActuatorKernel::for_interaction(&sample.interaction, &self.params, &self.calib) {
            Some(kernel) => self
                .step
                .mul(&averaged_channel(&kernel, &self.two_atom, sample.mean_atoms)),
            None => self.step.clone(),
        }
    }

    pub fn relaxation_step(&self) -> &DenseMatrix {
        &self.step
    }

    pub fn posterior(&self) -> &PhotonDistribution {
        &self.posterior
    }

    pub fn in_flight(&self) -> impl ExactSizeIterator<Item = &Sample> {
        self.in_flight.iter()
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn calibration(&self) -> &ActuatorCalibration {
        &self.calib
    }

    pub fn two_atom_kernel(&self) -> &K {
        &self.two_atom
    }

    pub fn diagnostics(&self) -> EstimatorDiagnostics {
        self.diagnostics
    }
}
