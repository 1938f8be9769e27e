//! Brute-force posterior: enumerates every hidden configuration of a
//! scripted run (initial photon number, atom number of each sample, each
//! atom's outcome, which atoms were detected, photon number after every
//! damping interval) on a small truncation.

#![allow(dead_code)]

use fockloop_core::estimator::{update_announced, update_relaxation};
use fockloop_core::model::{actuator_likelihood, occupancy_weights, relaxation_propagator, sensor_likelihood};
use fockloop_core::{
    ActuatorCalibration, AtomState, Detection, PhotonDistribution, PhysicsParams, Sample,
    SampleAnnouncement,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N_MAX: usize = 3;

pub fn params() -> PhysicsParams {
    PhysicsParams {
        n_max: N_MAX,
        ..Default::default()
    }
}

/// Probability of one atom ending in `fin` and the new photon number.
fn single_atom(
    sample: &Sample,
    n: usize,
    fin: AtomState,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> (f64, usize) {
    match sample.interaction {
        fockloop_core::Interaction::Sensor { phase } => {
            let e = sensor_likelihood(AtomState::Excited, n, phase, params).unwrap();
            let g = sensor_likelihood(AtomState::Ground, n, phase, params).unwrap();
            let w = if fin == AtomState::Excited { e } else { g };
            (w / (e + g), n)
        }
        fockloop_core::Interaction::Actuator {
            prepared,
            time,
            resonant,
        } => {
            if !resonant {
                return (if fin == prepared { 1.0 } else { 0.0 }, n);
            }
            let w = actuator_likelihood(prepared, fin, n, time, params, calib).unwrap();
            let next = if fin == prepared {
                n
            } else if prepared == AtomState::Excited {
                (n + 1).min(N_MAX)
            } else {
                n.saturating_sub(1)
            };
            (w, next)
        }
    }
}

/// Weight of every (final photon number) given the initial one, summed over
/// all hidden variables consistent with the detector record.
fn enumerate_sample(
    sample: &Sample,
    detected: Detection,
    n: usize,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
    out: &mut [f64],
) {
    let eta = params.eta_d;
    for (atoms, w_a) in occupancy_weights(sample.mean_atoms).into_iter().enumerate() {
        // every outcome path
        for path in 0..(1usize << atoms) {
            let mut m = n;
            let mut w = w_a;
            let mut outcomes = Vec::new();
            for i in 0..atoms {
                let fin = if path >> i & 1 == 0 {
                    AtomState::Excited
                } else {
                    AtomState::Ground
                };
                let (p, next) = single_atom(sample, m, fin, params, calib);
                w *= p;
                m = next;
                outcomes.push(fin);
            }
            if w == 0.0 {
                continue;
            }
            // every detection mask
            for mask in 0..(1usize << atoms) {
                let mut record = Vec::new();
                let mut wm = 1.0;
                for (i, &o) in outcomes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        record.push(o);
                        wm *= eta;
                    } else {
                        wm *= 1.0 - eta;
                    }
                }
                if Detection::from_states(&record).unwrap() == detected {
                    out[m] += w * wm;
                }
            }
        }
    }
}

pub fn oracle(
    prior: &[f64],
    script: &[(Sample, Detection)],
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Option<Vec<f64>> {
    let relax = relaxation_propagator(params, params.t_sample);
    // joint weight over hidden histories, grouped by the current photon
    // number; a linear map, so grouping loses nothing
    let mut weights = prior.to_vec();
    for (sample, detected) in script {
        let mut after = [0.0; N_MAX + 1];
        for (n, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut branch = vec![0.0; N_MAX + 1];
            enumerate_sample(sample, *detected, n, params, calib, &mut branch);
            for (a, b) in after.iter_mut().zip(branch) {
                *a += w * b;
            }
        }
        let mut damped = vec![0.0; N_MAX + 1];
        for (to, d) in damped.iter_mut().enumerate() {
            for (from, &a) in after.iter().enumerate() {
                *d += relax.get(to, from) * a;
            }
        }
        weights = damped;
    }
    let total: f64 = weights.iter().sum();
    (total > 1e-280).then(|| weights.iter().map(|w| w / total).collect())
}

pub fn recursive(
    prior: &[f64],
    script: &[(Sample, Detection)],
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Option<Vec<f64>> {
    let mut p = PhotonDistribution::from_weights(prior.to_vec()).unwrap();
    for &(sample, detected) in script {
        update_announced(&mut p, &SampleAnnouncement { sample, detected }, params, calib).ok()?;
        update_relaxation(&mut p, params.t_sample, params);
    }
    Some(p.probabilities().to_vec())
}

pub fn random_sample(rng: &mut impl Rng, params: &PhysicsParams) -> Sample {
    let m = rng.random_range(0.2..1.6);
    match rng.random_range(0..4) {
        0 => Sample::sensor(rng.random_range(-3.0..3.0), m),
        1 => Sample::emitter(rng.random_range(0.0..4.0) / params.omega0, m),
        2 => Sample::absorber(rng.random_range(0.0..4.0) / params.omega0, m),
        _ => {
            let mut s = Sample::emitter(1.3 / params.omega0, m);
            if let fockloop_core::Interaction::Actuator { resonant, .. } = &mut s.interaction {
                *resonant = false;
            }
            s
        }
    }
}

pub fn random_detection(rng: &mut impl Rng) -> Detection {
    let e = rng.random_range(0..3usize);
    let g = rng.random_range(0..3 - e);
    let mut states = vec![AtomState::Excited; e];
    states.extend(vec![AtomState::Ground; g]);
    Detection::from_states(&states).unwrap()
}

/// Largest deviation between the recursive filter and the enumeration over
/// `scripts` random scripts of `len` samples, alternating the default and
/// the ideal calibration.
pub fn max_deviation(scripts: usize, len: usize, seed: u64) -> f64 {
    let params = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let calibs = [
        ActuatorCalibration::default_for(N_MAX),
        ActuatorCalibration::ideal(N_MAX),
    ];
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    while compared < scripts {
        let calib = &calibs[compared % 2];
        let prior: Vec<f64> = (0..=N_MAX).map(|_| rng.random_range(0.0..1.0)).collect();
        let script: Vec<_> = (0..len)
            .map(|_| (random_sample(&mut rng, &params), random_detection(&mut rng)))
            .collect();
        match (
            oracle(&prior, &script, &params, calib),
            recursive(&prior, &script, &params, calib),
        ) {
            (Some(a), Some(b)) => {
                for (x, y) in a.iter().zip(&b) {
                    worst = worst.max((x - y).abs());
                }
                compared += 1;
            }
            (None, None) => {}
            // one side saw an impossible record, the other did not
            _ => return f64::INFINITY,
        }
    }
    worst
}
