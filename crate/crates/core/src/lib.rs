//! Building blocks for simulating a quantum feedback loop that locks a cavity
//! field onto a photon-number (Fock) state.
//!
//! * [`model`]: physical constants, the sensor/actuator likelihoods and the
//!   cavity damping generator.
//! * [`estimator`]: the controller-side Bayesian filter over `p(n)`.
//! * [`controller`]: loop schedule, distance-minimizing mode selection and
//!   target sequencing.
//! * [`plant`]: the ground-truth Monte Carlo system (true photon number,
//!   atom samples, detector, delay line).
//!
//! The crate is `no_std` and only needs `alloc`. Configuration files, logs
//! and the command line live in the `fockloop` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod controller;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model;
pub mod plant;
pub mod sample;

pub use controller::{LoopState, TargetSequencer};
pub use distribution::PhotonDistribution;
pub use error::{Error, Inconsistency};
pub use estimator::Estimator;
pub use model::{ActuatorCalibration, AtomState, PhysicsParams, TargetSpec};
pub use plant::Plant;
pub use sample::{Detection, Interaction, Mode, Sample, SampleAnnouncement};
