//! Dense symmetric matrices.

use crate::error::{NodalError, Result};
use crate::graph::StateVector;

/// Dense symmetric matrix stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows, rejecting asymmetric or non-finite input.
    ///
    /// Entry pairs may differ by at most `1e-12 * (1 + max |entry|)`; the
    /// stored matrix is the exact average of each pair.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(NodalError::InvalidInput("matrix must have n >= 1".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(NodalError::DimensionMismatch { expected: n, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        let mut m = Self { n, data };
        m.symmetrize_checked()?;
        Ok(m)
    }

    /// Builds a matrix from a function of `(i, j)` evaluated for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    fn symmetrize_checked(&mut self) -> Result<()> {
        let n = self.n;
        let mut max = 0.0f64;
        for (idx, &v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(NodalError::NonFinite { i: idx / n, j: idx % n });
            }
            max = max.max(v.abs());
        }
        let tol = 1e-12 * (1.0 + max);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.data[i * n + j];
                let b = self.data[j * n + i];
                if (a - b).abs() > tol {
                    return Err(NodalError::NotSymmetric { i, j, a, b });
                }
                let avg = 0.5 * (a + b);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| -v).collect() }
    }

    /// Returns `D M D` with `D = diag(eps)`.
    pub fn switched(&self, eps: &StateVector) -> Result<Self> {
        if eps.len() != self.n {
            return Err(NodalError::DimensionMismatch { expected: self.n, got: eps.len() });
        }
        let s = eps.as_f64();
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= s[i] * s[j];
            }
        }
        Ok(out)
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut out = Self::zeros(m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * m + b] = self.get(i, j);
            }
        }
        out
    }

    /// True when every entry is an integer.
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
    }

    /// `|M x - lambda x|_2`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let mx = self.mul_vec(x);
        mx.iter().zip(x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_with_indices() {
        let err = DenseSymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert_eq!(err, NodalError::NotSymmetric { i: 0, j: 1, a: 1.0, b: 2.0 });
    }

    #[test]
    fn rejects_nan() {
        let err = DenseSymmetricMatrix::from_rows(&[vec![f64::NAN]]).unwrap_err();
        assert!(matches!(err, NodalError::NonFinite { i: 0, j: 0 }));
    }

    #[test]
    fn switching_flips_cut_entries() {
        let m = DenseSymmetricMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 0.0, 2.0],
            vec![0.0, 2.0, 3.0],
        ])
        .unwrap();
        let eps = StateVector::new(vec![1, -1, 1]).unwrap();
        let s = m.switched(&eps).unwrap();
        assert_eq!(s.get(0, 1), 1.0);
        assert_eq!(s.get(1, 2), -2.0);
        assert_eq!(s.get(1, 1), 0.0);
        assert_eq!(s.get(2, 2), 3.0);
        assert_eq!(s.switched(&eps).unwrap(), m);
    }
}
