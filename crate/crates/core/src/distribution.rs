use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, lgamma, log, pow};

use crate::error::{Error, Inconsistency};

/// Total weight below which an update is treated as an impossible outcome.
pub const MIN_EVIDENCE: f64 = 1e-300;

/// Normalized photon-number distribution `p(n)`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    p: Vec<f64>,
}

impl PhotonDistribution {
    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self, Error> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total < MIN_EVIDENCE {
            return Err(Error::InvalidDistribution("weights sum to zero"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { p: weights })
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self, Error> {
        if n > n_max {
            return Err(Error::PhotonNumberOutOfRange { n, n_max });
        }
        let mut p = vec![0.0; n_max + 1];
        p[n] = 1.0;
        Ok(Self { p })
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        Self { p }
    }

    pub fn uniform(n_max: usize) -> Self {
        Self {
            p: vec![1.0 / (n_max + 1) as f64; n_max + 1],
        }
    }

    /// Bose–Einstein distribution with mean `n_th`, truncated at `n_max`.
    pub fn thermal(n_th: f64, n_max: usize) -> Self {
        let x = n_th / (1.0 + n_th);
        let weights = (0..=n_max).map(|n| pow(x, n as f64)).collect();
        Self::from_weights(weights).expect("geometric weights are positive")
    }

    /// Poisson distribution, truncated at `n_max` and renormalized.
    pub fn poisson(mean: f64, n_max: usize) -> Self {
        let weights = (0..=n_max).map(|n| poisson_pmf(n, mean)).collect();
        Self::from_weights(weights).unwrap_or_else(|_| Self::vacuum(n_max))
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `p(n)`, zero beyond the truncation.
    pub fn prob(&self, n: usize) -> f64 {
        self.p.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.p
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean) * (n as f64 - mean) * p)
            .sum()
    }

    /// `Σ (n − n_t)² p(n)`, the controller's cost.
    pub fn distance(&self, n_target: usize) -> f64 {
        distance_of(&self.p, n_target)
    }

    /// Replaces the contents with normalized `weights`; on zero total weight
    /// the distribution is left as it was.
    pub(crate) fn assign_normalized(&mut self, weights: &[f64]) -> Result<(), Inconsistency> {
        debug_assert_eq!(weights.len(), self.p.len());
        let total: f64 = weights.iter().sum();
        // NaN totals fail too
        if total.is_nan() || total < MIN_EVIDENCE {
            return Err(Inconsistency);
        }
        for (dst, w) in self.p.iter_mut().zip(weights) {
            *dst = w / total;
        }
        Ok(())
    }
}

/// Squared distance to the target for a raw probability vector.
pub fn distance_of(p: &[f64], n_target: usize) -> f64 {
    p.iter()
        .enumerate()
        .map(|(n, p)| {
            let dn = n as f64 - n_target as f64;
            dn * dn * p
        })
        .sum()
}

pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    exp(k * log(mean) - mean - lgamma(k + 1.0))
}
