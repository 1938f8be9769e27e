use core::f64::consts::PI;

use libm::{cos, exp, sqrt};

use super::{ActuatorCalibration, PhysicsParams};
use crate::error::Error;

/// Detected atomic level. The index `j` is 0 for `e` and 1 for `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AtomState {
    Excited,
    Ground,
}

impl AtomState {
    pub const BOTH: [AtomState; 2] = [AtomState::Excited, AtomState::Ground];

    pub const fn index(self) -> usize {
        match self {
            AtomState::Excited => 0,
            AtomState::Ground => 1,
        }
    }

    pub const fn from_index(j: usize) -> Option<Self> {
        match j {
            0 => Some(AtomState::Excited),
            1 => Some(AtomState::Ground),
            _ => None,
        }
    }

    pub const fn flipped(self) -> Self {
        match self {
            AtomState::Excited => AtomState::Ground,
            AtomState::Ground => AtomState::Excited,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            AtomState::Excited => 'e',
            AtomState::Ground => 'g',
        }
    }
}

/// `π_s(j|n) = [1 + j·b_s + c_s·cos(Φ0·n + φ_r − jπ)] / 2`.
///
/// The pair over `j` sums to `1 + b_s/2`; the estimator uses these values as
/// Bayes weights and the plant normalizes them before sampling.
pub fn sensor_likelihood(
    j: AtomState,
    n: usize,
    phase: f64,
    params: &PhysicsParams,
) -> Result<f64, Error> {
    if n > params.n_max {
        return Err(Error::PhotonNumberOutOfRange {
            n,
            n_max: params.n_max,
        });
    }
    Ok(sensor_weight(j, n, phase, params))
}

pub(crate) fn sensor_weight(j: AtomState, n: usize, phase: f64, params: &PhysicsParams) -> f64 {
    let jf = j.index() as f64;
    let w = (1.0 + jf * params.b_s + params.c_s * cos(params.phi0 * n as f64 + phase - jf * PI)) / 2.0;
    w.clamp(0.0, 1.0)
}

/// Probability that an actuator prepared in `prepared` flips its level while
/// interacting for `time` with `m` photons.
///
/// The Rabi index is `r = m + 1` for an emitter and `r = m` for an absorber.
/// An absorber facing vacuum has nothing to absorb and never flips.
pub fn flip_probability(
    prepared: AtomState,
    m: usize,
    time: f64,
    omega0: f64,
    calib: &ActuatorCalibration,
) -> f64 {
    let r = match prepared {
        AtomState::Excited => m + 1,
        AtomState::Ground => m,
    };
    if r == 0 {
        return 0.0;
    }
    let theta = omega0 * time * sqrt(r as f64) + calib.phase_offset(m);
    ((1.0 - calib.contrast(m) * cos(theta)) / 2.0).clamp(0.0, 1.0)
}

/// `π_a(j, k | m) = {1 + c_a(m)·cos[Ω0·t·√r + (j−k)π + β(m)]} / 2`, with
/// `m` the photon number before the interaction.
pub fn actuator_likelihood(
    prepared: AtomState,
    fin: AtomState,
    m: usize,
    time: f64,
    params: &PhysicsParams,
    calib: &ActuatorCalibration,
) -> Result<f64, Error> {
    if m > params.n_max {
        return Err(Error::PhotonNumberOutOfRange {
            n: m,
            n_max: params.n_max,
        });
    }
    let flip = flip_probability(prepared, m, time, params.omega0, calib);
    Ok(if fin == prepared { 1.0 - flip } else { flip })
}

/// Poisson law for the atom number of a sample, truncated to {0, 1, 2} with
/// the tail of two or more atoms folded into 2.
pub fn occupancy_weights(mean: f64) -> [f64; 3] {
    let p0 = exp(-mean);
    let p1 = mean * p0;
    let p2 = (1.0 - p0 - p1).max(0.0);
    [p0, p1, p2]
}
