use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::DenseMatrix;
use crate::model::{flip_probability, occupancy_weights, ActuatorCalibration, AtomState, PhysicsParams};
use crate::sample::{Detection, Interaction};

/// Single-atom actuator map: for each initial photon number `m`, the
/// probability that the atom flips and the photon number it leaves behind.
///
/// Emission out of `n_max` is folded back into `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorKernel {
    prepared: AtomState,
    flip: Vec<f64>,
}

impl ActuatorKernel {
    pub fn new(
        prepared: AtomState,
        time: f64,
        params: &PhysicsParams,
        calib: &ActuatorCalibration,
    ) -> Self {
        let flip = (0..=params.n_max)
            .map(|m| flip_probability(prepared, m, time, params.omega0, calib))
            .collect();
        Self { prepared, flip }
    }

    /// Atom kept off resonance: it never changes level.
    pub fn off_resonant(prepared: AtomState, n_max: usize) -> Self {
        Self {
            prepared,
            flip: vec![0.0; n_max + 1],
        }
    }

    /// `None` for sensors.
    pub fn for_interaction(
        interaction: &Interaction,
        params: &PhysicsParams,
        calib: &ActuatorCalibration,
    ) -> Option<Self> {
        match *interaction {
            Interaction::Sensor { .. } => None,
            Interaction::Actuator {
                prepared,
                time,
                resonant: true,
            } => Some(Self::new(prepared, time, params, calib)),
            Interaction::Actuator {
                prepared,
                resonant: false,
                ..
            } => Some(Self::off_resonant(prepared, params.n_max)),
        }
    }

    pub fn prepared(&self) -> AtomState {
        self.prepared
    }

    pub fn dim(&self) -> usize {
        self.flip.len()
    }

    pub fn likelihood(&self, fin: AtomState, m: usize) -> f64 {
        if fin == self.prepared {
            1.0 - self.flip[m]
        } else {
            self.flip[m]
        }
    }

    /// Photon number after a flip starting from `m`.
    fn flipped_target(&self, m: usize) -> usize {
        match self.prepared {
            AtomState::Excited => (m + 1).min(self.flip.len() - 1),
            AtomState::Ground => m.saturating_sub(1),
        }
    }

    /// `out(n) += p(m)·π_a(j, fin | m)` with `n` the photon number left by
    /// the transition.
    pub fn accumulate(&self, fin: AtomState, p: &[f64], out: &mut [f64]) {
        let flipped = fin != self.prepared;
        for (m, &pm) in p.iter().enumerate() {
            if pm == 0.0 {
                continue;
            }
            if flipped {
                let w = pm * self.flip[m];
                if w != 0.0 {
                    out[self.flipped_target(m)] += w;
                }
            } else {
                out[m] += pm * (1.0 - self.flip[m]);
            }
        }
    }

    /// Outcome-summed single-atom map (a stochastic matrix).
    pub fn accumulate_any(&self, p: &[f64], out: &mut [f64]) {
        for (m, &pm) in p.iter().enumerate() {
            let w = pm * self.flip[m];
            out[m] += pm - w;
            out[self.flipped_target(m)] += w;
        }
    }
}

/// How two atoms of the same actuator sample act on the field.
pub trait TwoAtomKernel {
    /// Adds to `out` the unnormalized field after both atoms interacted, the
    /// first ending in `first` and the second in `second`.
    fn accumulate_path(
        &self,
        kernel: &ActuatorKernel,
        first: AtomState,
        second: AtomState,
        p: &[f64],
        out: &mut [f64],
    );
}

/// Two independent interactions of the full duration, one after the other.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SequentialTwoAtom;

impl TwoAtomKernel for SequentialTwoAtom {
    fn accumulate_path(
        &self,
        kernel: &ActuatorKernel,
        first: AtomState,
        second: AtomState,
        p: &[f64],
        out: &mut [f64],
    ) {
        let mut mid = vec![0.0; p.len()];
        kernel.accumulate(first, p, &mut mid);
        kernel.accumulate(second, &mid, out);
    }
}

/// Weight of all detection masks over two atoms ending in `(k1, k2)` that
/// report exactly `detected`.
fn two_atom_mask_weight(k1: AtomState, k2: AtomState, detected: Detection, eta: f64) -> f64 {
    let mut w = 0.0;
    for mask in 0u8..4 {
        let mut seen = [0usize; 2];
        let mut hits = 0;
        for (bit, k) in [k1, k2].into_iter().enumerate() {
            if mask & (1 << bit) != 0 {
                seen[k.index()] += 1;
                hits += 1;
            }
        }
        if seen[0] == detected.count_of(AtomState::Excited)
            && seen[1] == detected.count_of(AtomState::Ground)
        {
            w += libm::pow(eta, hits as f64) * libm::pow(1.0 - eta, (2 - hits) as f64);
        }
    }
    w
}

/// Adds `scale ·` (evidence-weighted field) for a sample holding `atoms`
/// atoms whose detector record is `detected`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn accumulate_occupancy_branch<K: TwoAtomKernel + ?Sized>(
    kernel: &ActuatorKernel,
    two: &K,
    atoms: usize,
    detected: Detection,
    eta: f64,
    p: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    if scale == 0.0 || detected.count() > atoms {
        return;
    }
    let mut branch = vec![0.0; p.len()];
    match atoms {
        0 => branch.copy_from_slice(p),
        1 => match detected.states().next() {
            None => {
                kernel.accumulate_any(p, &mut branch);
                branch.iter_mut().for_each(|x| *x *= 1.0 - eta);
            }
            Some(k) => {
                kernel.accumulate(k, p, &mut branch);
                branch.iter_mut().for_each(|x| *x *= eta);
            }
        },
        2 => {
            let mut path = vec![0.0; p.len()];
            for k1 in AtomState::BOTH {
                for k2 in AtomState::BOTH {
                    let w = two_atom_mask_weight(k1, k2, detected, eta);
                    if w == 0.0 {
                        continue;
                    }
                    path.iter_mut().for_each(|x| *x = 0.0);
                    two.accumulate_path(kernel, k1, k2, p, &mut path);
                    for (b, x) in branch.iter_mut().zip(&path) {
                        *b += w * x;
                    }
                }
            }
        }
        _ => unreachable!("occupancy is truncated at two atoms"),
    }
    for (o, b) in out.iter_mut().zip(&branch) {
        *o += scale * b;
    }
}

/// Unnormalized posterior weights after an actuator sample, summed over the
/// hidden atom number (0, 1 or 2).
pub(crate) fn actuator_evidence<K: TwoAtomKernel + ?Sized>(
    kernel: &ActuatorKernel,
    two: &K,
    mean_atoms: f64,
    detected: Detection,
    eta: f64,
    p: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (atoms, w) in occupancy_weights(mean_atoms).into_iter().enumerate() {
        accumulate_occupancy_branch(kernel, two, atoms, detected, eta, p, w, &mut out);
    }
    out
}

/// Expected field after an actuator sample whose outcome is unknown.
pub(crate) fn predict_actuator<K: TwoAtomKernel + ?Sized>(
    kernel: &ActuatorKernel,
    two: &K,
    mean_atoms: f64,
    p: &[f64],
    out: &mut [f64],
) {
    let [w0, w1, w2] = occupancy_weights(mean_atoms);
    let mut tmp = vec![0.0; p.len()];
    kernel.accumulate_any(p, &mut tmp);
    for ((o, &x0), &x1) in out.iter_mut().zip(p).zip(&tmp) {
        *o = w0 * x0 + w1 * x1;
    }
    if w2 > 0.0 {
        let mut path = vec![0.0; p.len()];
        for k1 in AtomState::BOTH {
            for k2 in AtomState::BOTH {
                two.accumulate_path(kernel, k1, k2, p, &mut path);
            }
        }
        for (o, x) in out.iter_mut().zip(&path) {
            *o += w2 * x;
        }
    }
}

/// Matrix form of [`predict_actuator`].
pub fn averaged_channel<K: TwoAtomKernel + ?Sized>(
    kernel: &ActuatorKernel,
    two: &K,
    mean_atoms: f64,
) -> DenseMatrix {
    DenseMatrix::from_columns(kernel.dim(), |src, dst| {
        predict_actuator(kernel, two, mean_atoms, src, dst)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_weights_sum_to_one() {
        let eta = 0.25;
        for k1 in AtomState::BOTH {
            for k2 in AtomState::BOTH {
                let mut total = 0.0;
                for e in 0..=2u8 {
                    for g in 0..=(2 - e) {
                        let states: Vec<AtomState> = core::iter::repeat_n(AtomState::Excited, e as usize)
                            .chain(core::iter::repeat_n(AtomState::Ground, g as usize))
                            .collect();
                        let d = Detection::from_states(&states).unwrap();
                        total += two_atom_mask_weight(k1, k2, d, eta);
                    }
                }
                assert!((total - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn averaged_channel_is_stochastic() {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::default_for(params.n_max);
        for prepared in AtomState::BOTH {
            let k = ActuatorKernel::new(prepared, 9.3e-6, &params, &calib);
            let c = averaged_channel(&k, &SequentialTwoAtom, 0.5);
            for s in c.column_sums() {
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn emission_folds_at_truncation() {
        let params = PhysicsParams::default();
        let calib = ActuatorCalibration::ideal(params.n_max);
        let k = ActuatorKernel::new(AtomState::Excited, 9.3e-6, &params, &calib);
        let mut p = vec![0.0; params.dim()];
        p[params.n_max] = 1.0;
        let mut out = vec![0.0; params.dim()];
        k.accumulate_any(&p, &mut out);
        assert!((out[params.n_max] - 1.0).abs() < 1e-15);
    }
}
