//! What the controller knows about an atom sample.

use core::fmt;

use crate::error::Error;
use crate::model::AtomState;

/// Operating mode of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "lowercase")
)]
pub enum Mode {
    Sensor,
    Emitter,
    Absorber,
}

impl Mode {
    /// Order used to break ties between equally good choices.
    pub const PREFERENCE: [Mode; 3] = [Mode::Sensor, Mode::Absorber, Mode::Emitter];

    /// Level in which an actuator is prepared; sensors have none.
    pub const fn prepared_state(self) -> Option<AtomState> {
        match self {
            Mode::Sensor => None,
            Mode::Emitter => Some(AtomState::Excited),
            Mode::Absorber => Some(AtomState::Ground),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Mode::Sensor => "sensor",
            Mode::Emitter => "emitter",
            Mode::Absorber => "absorber",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a sample meets the cavity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    /// Dispersive Ramsey measurement at the given interferometer phase.
    Sensor { phase: f64 },
    /// Resonant exchange for `time`, or no interaction at all when the
    /// controller kept the atom off resonance (`resonant == false`).
    Actuator {
        prepared: AtomState,
        time: f64,
        resonant: bool,
    },
}

impl Interaction {
    pub fn mode(&self) -> Mode {
        match self {
            Interaction::Sensor { .. } => Mode::Sensor,
            Interaction::Actuator {
                prepared: AtomState::Excited,
                ..
            } => Mode::Emitter,
            Interaction::Actuator {
                prepared: AtomState::Ground,
                ..
            } => Mode::Absorber,
        }
    }

    pub fn is_revoked(&self) -> bool {
        matches!(
            self,
            Interaction::Actuator {
                resonant: false,
                ..
            }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub interaction: Interaction,
    /// Poisson mean of the atom number.
    pub mean_atoms: f64,
}

impl Sample {
    pub fn sensor(phase: f64, mean_atoms: f64) -> Self {
        Self {
            interaction: Interaction::Sensor { phase },
            mean_atoms,
        }
    }

    pub fn actuator(prepared: AtomState, time: f64, mean_atoms: f64) -> Self {
        Self {
            interaction: Interaction::Actuator {
                prepared,
                time,
                resonant: true,
            },
            mean_atoms,
        }
    }

    pub fn emitter(time: f64, mean_atoms: f64) -> Self {
        Self::actuator(AtomState::Excited, time, mean_atoms)
    }

    pub fn absorber(time: f64, mean_atoms: f64) -> Self {
        Self::actuator(AtomState::Ground, time, mean_atoms)
    }

    pub fn mode(&self) -> Mode {
        self.interaction.mode()
    }
}

/// Detected levels of one sample, as counts (the atoms of a sample are not
/// distinguishable at the detector).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Detection {
    excited: u8,
    ground: u8,
}

impl Detection {
    pub const fn none() -> Self {
        Self {
            excited: 0,
            ground: 0,
        }
    }

    pub const fn single(state: AtomState) -> Self {
        match state {
            AtomState::Excited => Self {
                excited: 1,
                ground: 0,
            },
            AtomState::Ground => Self {
                excited: 0,
                ground: 1,
            },
        }
    }

    pub fn from_states(states: &[AtomState]) -> Result<Self, Error> {
        if states.len() > 2 {
            return Err(Error::TooManyDetections(states.len()));
        }
        let excited = states.iter().filter(|s| **s == AtomState::Excited).count() as u8;
        Ok(Self {
            excited,
            ground: states.len() as u8 - excited,
        })
    }

    pub const fn count(&self) -> usize {
        (self.excited + self.ground) as usize
    }

    pub const fn count_of(&self, state: AtomState) -> usize {
        match state {
            AtomState::Excited => self.excited as usize,
            AtomState::Ground => self.ground as usize,
        }
    }

    /// Detected levels, excited first.
    pub fn states(&self) -> impl Iterator<Item = AtomState> {
        core::iter::repeat_n(AtomState::Excited, self.excited as usize)
            .chain(core::iter::repeat_n(AtomState::Ground, self.ground as usize))
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count() == 0 {
            return f.write_str("-");
        }
        for s in self.states() {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

/// A sample together with the detector record the controller receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleAnnouncement {
    pub sample: Sample,
    pub detected: Detection,
}
