use core::f64::consts::PI;

use crate::error::Error;

/// Physical and loop constants. Times in seconds, frequencies in rad/s,
/// phases in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct PhysicsParams {
    /// Cavity energy lifetime.
    pub t_cavity: f64,
    /// Mean blackbody photon number at the mirror temperature.
    pub n_thermal: f64,
    /// Repetition interval of the atom samples.
    pub t_sample: f64,
    /// Vacuum Rabi angular frequency.
    pub omega0: f64,
    /// Dispersive phase shift per photon picked up by a sensor atom.
    pub phi0: f64,
    pub eta_d: f64,
    /// Mean atom number in sensor samples.
    pub m_sensor: f64,
    /// Mean atom number in control samples.
    pub m_control: f64,
    pub n_sensors: usize,
    pub n_controls: usize,
    /// Sensor fringe offset.
    pub b_s: f64,
    /// Sensor fringe contrast.
    pub c_s: f64,
    pub n_max: usize,
    /// Samples that crossed the cavity but are not yet detected.
    pub delay_depth: usize,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            t_cavity: 65e-3,
            n_thermal: 0.05,
            t_sample: 82e-6,
            omega0: 2.0 * PI * 47.9e3,
            phi0: 0.252 * PI,
            eta_d: 0.25,
            m_sensor: 1.3,
            m_control: 0.5,
            n_sensors: 12,
            n_controls: 4,
            b_s: 0.02,
            c_s: 0.75,
            n_max: 12,
            delay_depth: 4,
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), Error> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: "must be finite and strictly positive",
        })
    }
}

fn unit_interval(field: &'static str, v: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: "must lie in [0, 1]",
        })
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), Error> {
        positive("t_cavity", self.t_cavity)?;
        positive("t_sample", self.t_sample)?;
        positive("omega0", self.omega0)?;
        if !(self.n_thermal.is_finite() && self.n_thermal >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "n_thermal",
                reason: "must be finite and non-negative",
            });
        }
        if !self.phi0.is_finite() {
            return Err(Error::InvalidParameter {
                field: "phi0",
                reason: "must be finite",
            });
        }
        unit_interval("eta_d", self.eta_d)?;
        unit_interval("c_s", self.c_s)?;
        if !(0.0..=1.0 - self.c_s).contains(&self.b_s) {
            return Err(Error::InvalidParameter {
                field: "b_s",
                reason: "must satisfy 0 <= b_s <= 1 - c_s",
            });
        }
        for (field, m) in [("m_sensor", self.m_sensor), ("m_control", self.m_control)] {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: "must be finite and non-negative",
                });
            }
        }
        if self.n_sensors == 0 {
            return Err(Error::InvalidParameter {
                field: "n_sensors",
                reason: "must be at least 1",
            });
        }
        if self.n_controls == 0 {
            return Err(Error::InvalidParameter {
                field: "n_controls",
                reason: "must be at least 1",
            });
        }
        if self.n_max < 8 {
            return Err(Error::InvalidParameter {
                field: "n_max",
                reason: "must be at least 8",
            });
        }
        Ok(())
    }

    /// True when the sample interval is not small against the cavity lifetime.
    pub fn coarse_sampling(&self) -> bool {
        self.t_sample / self.t_cavity > 0.01
    }

    pub fn decay_rate(&self) -> f64 {
        1.0 / self.t_cavity
    }

    pub fn loop_len(&self) -> usize {
        self.n_sensors + self.n_controls
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}
