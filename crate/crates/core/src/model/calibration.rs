use alloc::vec::Vec;

use libm::exp;

use crate::error::Error;

/// Per-photon-number contrast and phase offset of the actuator Rabi
/// oscillation, indexed by the photon number before the interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorCalibration {
    contrast: Vec<f64>,
    phase_offset: Vec<f64>,
}

impl ActuatorCalibration {
    /// Full contrast, no offsets.
    pub fn ideal(n_max: usize) -> Self {
        Self {
            contrast: alloc::vec![1.0; n_max + 1],
            phase_offset: alloc::vec![0.0; n_max + 1],
        }
    }

    /// `c_a(n) = c0 · exp(-n / n_c)`, zero phase offset.
    pub fn exponential(c0: f64, n_c: f64, n_max: usize) -> Self {
        Self {
            contrast: (0..=n_max).map(|n| c0 * exp(-(n as f64) / n_c)).collect(),
            phase_offset: alloc::vec![0.0; n_max + 1],
        }
    }

    /// The stand-in model used when no measured table is supplied.
    pub fn default_for(n_max: usize) -> Self {
        Self::exponential(0.9, 20.0, n_max)
    }

    /// Rows are `(n, contrast, phase_offset)` with `n` running 0, 1, 2, ...
    pub fn from_rows(rows: &[(usize, f64, f64)], n_max: usize) -> Result<Self, Error> {
        let mut contrast = Vec::with_capacity(rows.len());
        let mut phase_offset = Vec::with_capacity(rows.len());
        for (i, &(n, c, beta)) in rows.iter().enumerate() {
            if n != i {
                return Err(Error::CalibrationTable {
                    line: i + 1,
                    reason: "photon numbers must start at 0 and increase by one",
                });
            }
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::CalibrationTable {
                    line: i + 1,
                    reason: "contrast must lie in [0, 1]",
                });
            }
            if !beta.is_finite() {
                return Err(Error::CalibrationTable {
                    line: i + 1,
                    reason: "phase offset must be finite",
                });
            }
            contrast.push(c);
            phase_offset.push(beta);
        }
        if contrast.len() <= n_max {
            return Err(Error::CalibrationTable {
                line: rows.len(),
                reason: "table does not cover every photon number up to n_max",
            });
        }
        Ok(Self {
            contrast,
            phase_offset,
        })
    }

    /// Parses `n, contrast, phase_offset_rad` rows. Commas or whitespace
    /// separate fields; blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str, n_max: usize) -> Result<Self, Error> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty());
            let bad = |reason| Error::CalibrationTable {
                line: lineno + 1,
                reason,
            };
            let n = fields
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or(bad("expected a non-negative integer photon number"))?;
            let c = fields
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or(bad("expected a contrast value"))?;
            let beta = fields
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or(bad("expected a phase offset"))?;
            if fields.next().is_some() {
                return Err(bad("expected exactly three fields"));
            }
            if n != rows.len() {
                return Err(bad("photon numbers must start at 0 and increase by one"));
            }
            rows.push((n, c, beta));
        }
        Self::from_rows(&rows, n_max)
    }

    pub fn contrast(&self, m: usize) -> f64 {
        self.contrast[m.min(self.contrast.len() - 1)]
    }

    pub fn phase_offset(&self, m: usize) -> f64 {
        self.phase_offset[m.min(self.phase_offset.len() - 1)]
    }

    pub fn len(&self) -> usize {
        self.contrast.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contrast.is_empty()
    }

    pub fn covers(&self, n_max: usize) -> bool {
        self.contrast.len() > n_max
    }
}
