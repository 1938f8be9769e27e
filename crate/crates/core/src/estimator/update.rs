use alloc::vec;

use super::kernel::{
    accumulate_occupancy_branch, actuator_evidence, predict_actuator, ActuatorKernel,
    SequentialTwoAtom, TwoAtomKernel,
};
use crate::distribution::PhotonDistribution;
use crate::error::Inconsistency;
use crate::model::{relaxation_propagator, sensor_weight, ActuatorCalibration, AtomState, PhysicsParams};
use crate::sample::{Detection, Interaction, Sample, SampleAnnouncement};

/// Bayes update for one sensor atom detected in `j`:
/// `p'(n) ∝ p(n)·π_s(j|n)`.
pub fn update_sensor(
    p: &mut PhotonDistribution,
    j: AtomState,
    phase: f64,
    params: &PhysicsParams,
) -> Result<(), Inconsistency> {
    let weights: alloc::vec::Vec<f64> = p
        .probabilities()
        .iter()
        .enumerate()
        .map(|(n, pn)| pn * sensor_weight(j, n, phase, params))
        .collect();
    p.assign_normalized(&weights)
}

/// Bayes update for a single actuator atom prepared in `prepared` and
/// detected in `fin`: `p'(n) ∝ p(n+j−k)·π_a(j,k|n+j−k)`.
pub fn update_actuator(
    p: &mut PhotonDistribution,
    prepared: AtomState,
    fin: AtomState,
    time: f64,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Result<(), Inconsistency> {
    let kernel = ActuatorKernel::new(prepared, time, params, calib);
    let mut out = vec![0.0; p.len()];
    kernel.accumulate(fin, p.probabilities(), &mut out);
    p.assign_normalized(&out)
}

/// Update after a sample left no detector click. Sensors leave `p`
/// unchanged; actuators mix the empty, one-missed-atom and
/// two-missed-atom hypotheses by their posterior weights.
pub fn update_no_detection(
    p: &mut PhotonDistribution,
    sample: &Sample,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) {
    let ann = SampleAnnouncement {
        sample: *sample,
        detected: Detection::none(),
    };
    // An undetected sample is always possible: the empty branch carries weight.
    let _ = update_announced(p, &ann, params, calib);
}

/// Update after exactly one atom of an actuator sample was detected in
/// `detected`; the sample may have held a second, missed atom.
pub fn update_partial_detection(
    p: &mut PhotonDistribution,
    sample: &Sample,
    detected: AtomState,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Result<(), Inconsistency> {
    let ann = SampleAnnouncement {
        sample: *sample,
        detected: Detection::single(detected),
    };
    update_announced(p, &ann, params, calib)
}

/// Posterior under the hypothesis that the actuator sample held two atoms,
/// given the detector record of those atoms.
pub fn two_atom_update(
    p: &mut PhotonDistribution,
    prepared: AtomState,
    detected: Detection,
    time: f64,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Result<(), Inconsistency> {
    two_atom_update_with(p, prepared, detected, time, params, calib, &SequentialTwoAtom)
}

pub fn two_atom_update_with<K: TwoAtomKernel + ?Sized>(
    p: &mut PhotonDistribution,
    prepared: AtomState,
    detected: Detection,
    time: f64,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
    two: &K,
) -> Result<(), Inconsistency> {
    let kernel = ActuatorKernel::new(prepared, time, params, calib);
    let mut out = vec![0.0; p.len()];
    accumulate_occupancy_branch(
        &kernel,
        two,
        2,
        detected,
        params.eta_d,
        p.probabilities(),
        1.0,
        &mut out,
    );
    p.assign_normalized(&out)
}

/// Full update for an announced sample, whatever its role and detector
/// record.
pub fn update_announced(
    p: &mut PhotonDistribution,
    ann: &SampleAnnouncement,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Result<(), Inconsistency> {
    update_announced_with(p, ann, params, calib, &SequentialTwoAtom)
}

pub fn update_announced_with<K: TwoAtomKernel + ?Sized>(
    p: &mut PhotonDistribution,
    ann: &SampleAnnouncement,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
    two: &K,
) -> Result<(), Inconsistency> {
    match ann.sample.interaction {
        Interaction::Sensor { phase } => {
            // QND atoms are conditionally independent given n; undetected
            // ones carry no information.
            let mut q = p.clone();
            for j in ann.detected.states() {
                update_sensor(&mut q, j, phase, params)?;
            }
            *p = q;
            Ok(())
        }
        ref interaction => {
            let kernel = ActuatorKernel::for_interaction(interaction, params, calib)
                .expect("actuator interaction");
            let out = actuator_evidence(
                &kernel,
                two,
                ann.sample.mean_atoms,
                ann.detected,
                params.eta_d,
                p.probabilities(),
            );
            p.assign_normalized(&out)
        }
    }
}

/// Cavity damping over `dt`: `p' = exp(L·dt)·p`.
pub fn update_relaxation(p: &mut PhotonDistribution, dt: f64, params: &PhysicsParams) {
    if dt <= 0.0 {
        return;
    }
    let m = relaxation_propagator(params, dt);
    let mut out = vec![0.0; p.len()];
    m.apply_into(p.probabilities(), &mut out);
    p.assign_normalized(&out)
        .expect("relaxation conserves probability");
}

/// Averages `p` over the unknown outcomes of samples that crossed the cavity
/// but are not detected yet, in crossing order. Sensors leave `p` unchanged.
pub fn trace_pending(
    p: &mut PhotonDistribution,
    pending: &[Sample],
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) {
    let mut actuators = pending
        .iter()
        .filter(|s| !matches!(s.interaction, Interaction::Sensor { .. }))
        .peekable();
    if actuators.peek().is_none() {
        return;
    }
    let mut cur = p.probabilities().to_vec();
    let mut next = vec![0.0; p.len()];
    for sample in actuators {
        if let Some(kernel) = ActuatorKernel::for_interaction(&sample.interaction, params, calib) {
            predict_actuator(&kernel, &SequentialTwoAtom, sample.mean_atoms, &cur, &mut next);
            core::mem::swap(&mut cur, &mut next);
        }
    }
    p.assign_normalized(&cur)
        .expect("prediction conserves probability");
}

/// `Σ_n (n − n_t)² p(n)`.
pub fn distance(p: &PhotonDistribution, n_target: usize) -> f64 {
    p.distance(n_target)
}
