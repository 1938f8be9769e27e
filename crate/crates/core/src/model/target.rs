use core::f64::consts::{PI, TAU};

use libm::{fmod, sqrt};

use super::PhysicsParams;
use crate::error::Error;

/// Ramsey phase that puts the sensor fringe at mid-height for `n_target`
/// photons, reduced to `(-π, π]`.
pub fn sensor_phase(n_target: usize, phi0: f64) -> f64 {
    wrap_phase(PI / 2.0 - phi0 * n_target as f64)
}

fn wrap_phase(x: f64) -> f64 {
    let mut r = fmod(x, TAU);
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Emitter interaction time for which a full Rabi period elapses with
/// `n_target` photons, leaving that Fock state invariant.
pub fn trapping_emit_time(n_target: usize, omega0: f64) -> f64 {
    2.0 * PI / (omega0 * sqrt(n_target as f64 + 1.0))
}

/// The active target photon number with the sensor and actuator settings
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub n_target: usize,
    /// Ramsey phase for sensors.
    pub phase: f64,
    /// Emitter interaction time.
    pub t_emit: f64,
    /// Absorber interaction time.
    pub t_absorb: f64,
}

impl TargetSpec {
    /// `t_e = 1.6π/(Ω0√(n_t+1))`, `t_g = 2.4π/(Ω0√n_t)`.
    pub fn new(n_target: usize, params: &PhysicsParams) -> Result<Self, Error> {
        if n_target == 0 || n_target + 4 > params.n_max {
            return Err(Error::InvalidTarget {
                n_target,
                n_max: params.n_max,
            });
        }
        let n = n_target as f64;
        Ok(Self {
            n_target,
            phase: sensor_phase(n_target, params.phi0),
            t_emit: 1.6 * PI / (params.omega0 * sqrt(n + 1.0)),
            t_absorb: 2.4 * PI / (params.omega0 * sqrt(n)),
        })
    }

    /// Multiplies the actuator times, for interaction-time sweeps.
    pub fn with_time_scale(mut self, emit_scale: f64, absorb_scale: f64) -> Self {
        self.t_emit *= emit_scale;
        self.t_absorb *= absorb_scale;
        self
    }
}
