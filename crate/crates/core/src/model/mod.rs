//! Physical constants and the conditional probabilities shared by the plant
//! and the estimator.

mod calibration;
mod generator;
mod likelihood;
mod params;
mod target;

pub use calibration::ActuatorCalibration;
pub use generator::{relaxation_generator, relaxation_propagator};
pub use likelihood::{
    actuator_likelihood, flip_probability, occupancy_weights, sensor_likelihood, AtomState,
};
pub(crate) use likelihood::sensor_weight;
pub use params::PhysicsParams;
pub use target::{sensor_phase, trapping_emit_time, TargetSpec};
