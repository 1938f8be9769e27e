use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    PhotonNumberOutOfRange { n: usize, n_max: usize },
    InvalidParameter { field: &'static str, reason: &'static str },
    InvalidTarget { n_target: usize, n_max: usize },
    CalibrationTable { line: usize, reason: &'static str },
    InvalidDistribution(&'static str),
    TooManyDetections(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PhotonNumberOutOfRange { n, n_max } => {
                write!(f, "photon number {n} outside 0..={n_max}")
            }
            Error::InvalidParameter { field, reason } => write!(f, "{field}: {reason}"),
            Error::InvalidTarget { n_target, n_max } => write!(
                f,
                "target photon number {n_target} must lie in 1..={} for n_max = {n_max}",
                n_max.saturating_sub(4)
            ),
            Error::CalibrationTable { line, reason } => {
                write!(f, "calibration table line {line}: {reason}")
            }
            Error::InvalidDistribution(reason) => write!(f, "invalid distribution: {reason}"),
            Error::TooManyDetections(n) => {
                write!(f, "{n} detected atoms in one sample, at most 2 are modeled")
            }
        }
    }
}

impl core::error::Error for Error {}

/// A detection record with zero probability under the current model.
///
/// Updates that return this leave the distribution untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconsistency;

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("observed outcome has zero likelihood")
    }
}

impl core::error::Error for Inconsistency {}
