use libm::ceil;

use super::PhysicsParams;
use crate::linalg::DenseMatrix;

/// Birth–death generator of cavity damping towards the thermal state.
///
/// `n → n−1` at rate `(1+n_th)·n/T_c`, `n → n+1` at rate `n_th·(n+1)/T_c`.
/// The upward rate out of `n_max` is dropped so probability stays inside the
/// truncated space. Columns sum to zero.
pub fn relaxation_generator(params: &PhysicsParams) -> DenseMatrix {
    let dim = params.dim();
    let gamma = params.decay_rate();
    let mut l = DenseMatrix::zeros(dim);
    for n in 0..dim {
        let down = gamma * (1.0 + params.n_thermal) * n as f64;
        let up = if n < params.n_max {
            gamma * params.n_thermal * (n + 1) as f64
        } else {
            0.0
        };
        if n > 0 {
            l.set(n - 1, n, down);
        }
        if n < params.n_max {
            l.set(n + 1, n, up);
        }
        l.set(n, n, -(down + up));
    }
    l
}

/// Largest per-step `rate·h` allowed in the second-order scheme.
const MAX_STEP_RATE: f64 = 0.01;

/// `exp(L·dt)` by repeated second-order Taylor steps `I + hL + h²L²/2`.
///
/// At least four sub-steps are used; long intervals get as many as needed to
/// keep every step's `rate·h` under 0.01, which keeps the step matrix
/// non-negative. Column sums of the result stay 1 to rounding.
pub fn relaxation_propagator(params: &PhysicsParams, dt: f64) -> DenseMatrix {
    let l = relaxation_generator(params);
    let dim = l.dim();
    if dt <= 0.0 {
        return DenseMatrix::identity(dim);
    }
    let max_rate = (0..dim).map(|n| -l.get(n, n)).fold(0.0, f64::max);
    let steps = ceil(max_rate * dt / MAX_STEP_RATE).max(4.0) as u64;
    let h = dt / steps as f64;
    let hl = l.scaled(h);
    let step = DenseMatrix::identity(dim)
        .add(&hl)
        .add(&hl.mul(&hl).scaled(0.5));
    step.pow(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn zero_temperature_rates() {
        let p = PhysicsParams {
            n_thermal: 0.0,
            ..Default::default()
        };
        let l = relaxation_generator(&p);
        assert!((l.get(0, 1) - 1.0 / p.t_cavity).abs() < 1e-12);
        assert_eq!(l.get(2, 1), 0.0);
    }

    #[test]
    fn columns_sum_to_zero() {
        let l = relaxation_generator(&PhysicsParams::default());
        for s in l.column_sums() {
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_state_is_stationary() {
        let p = PhysicsParams::default();
        let l = relaxation_generator(&p);
        let x = p.n_thermal / (1.0 + p.n_thermal);
        let mut th: Vec<f64> = (0..=p.n_max).map(|n| libm::pow(x, n as f64)).collect();
        let z: f64 = th.iter().sum();
        th.iter_mut().for_each(|v| *v /= z);
        let mut out = alloc::vec![0.0; p.dim()];
        l.apply_into(&th, &mut out);
        for v in out {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn single_photon_decay_over_one_interval() {
        let p = PhysicsParams {
            n_thermal: 0.0,
            ..Default::default()
        };
        let m = relaxation_propagator(&p, p.t_sample);
        let exact = 1.0 - libm::exp(-p.t_sample / p.t_cavity);
        assert!((m.get(0, 1) - exact).abs() < 1e-10, "{}", m.get(0, 1));
        assert!((exact - 1.26e-3).abs() < 1e-5);
    }

    #[test]
    fn propagator_is_stochastic() {
        let p = PhysicsParams::default();
        for dt in [0.0, p.t_sample, 0.01, 3.0] {
            let m = relaxation_propagator(&p, dt);
            for s in m.column_sums() {
                assert!((s - 1.0).abs() < 1e-11, "dt={dt}: {s}");
            }
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    assert!(m.get(i, j) >= -1e-15);
                }
            }
        }
    }
}
