//! Small dense matrices acting on photon-number vectors.

use alloc::vec;
use alloc::vec::Vec;

/// Square matrix stored row-major, indexed as `(to, from)` so that
/// `apply` computes `M · p` for a column vector `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for to in 0..dim {
            for from in 0..dim {
                m.data[to * dim + from] = f(to, from);
            }
        }
        m
    }

    /// Builds the matrix column by column from its action on basis vectors.
    pub fn from_columns(dim: usize, mut column: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut m = Self::zeros(dim);
        let mut basis = vec![0.0; dim];
        let mut out = vec![0.0; dim];
        for from in 0..dim {
            basis.iter_mut().for_each(|x| *x = 0.0);
            basis[from] = 1.0;
            out.iter_mut().for_each(|x| *x = 0.0);
            column(&basis, &mut out);
            for (to, v) in out.iter().enumerate() {
                m.data[to * dim + from] = *v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.data[to * self.dim + from]
    }

    pub fn set(&mut self, to: usize, from: usize, value: f64) {
        self.data[to * self.dim + from] = value;
    }

    /// `dst = self · src`
    pub fn apply_into(&self, src: &[f64], dst: &mut [f64]) {
        debug_assert_eq!(src.len(), self.dim);
        debug_assert_eq!(dst.len(), self.dim);
        for (row, d) in self.data.chunks_exact(self.dim).zip(dst.iter_mut()) {
            *d = row.iter().zip(src).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, p: &mut [f64]) {
        let src = p.to_vec();
        self.apply_into(&src, p);
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn pow(&self, mut exp: u64) -> DenseMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|from| (0..self.dim).map(|to| self.get(to, from)).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_mul() {
        let m = DenseMatrix::from_fn(3, |i, j| 0.1 * (i as f64) + 0.2 * (j as f64) + 0.05);
        let mut slow = DenseMatrix::identity(3);
        for _ in 0..7 {
            slow = slow.mul(&m);
        }
        let fast = m.pow(7);
        for i in 0..3 {
            for j in 0..3 {
                assert!((slow.get(i, j) - fast.get(i, j)).abs() < 1e-12 * slow.get(i, j).abs());
            }
        }
        assert_eq!(m.pow(0), DenseMatrix::identity(3));
    }

    #[test]
    fn from_columns_reproduces_matrix() {
        let m = DenseMatrix::from_fn(4, |i, j| (i * 4 + j) as f64);
        let rebuilt = DenseMatrix::from_columns(4, |src, dst| m.apply_into(src, dst));
        assert_eq!(m, rebuilt);
    }
}
