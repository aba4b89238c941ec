//! Small dense linear-algebra helpers shared by the spectral and basis code.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::DenseSymmetricMatrix;
use crate::spectral::eigendecompose;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`.
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(x: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().map(|v| v * alpha).collect()
}

/// Normalizes in place; returns the original norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let nrm = norm(x);
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// Removes the components of `x` along the orthonormal vectors `basis`
/// (two passes for stability).
pub fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            axpy(x, -c, b);
        }
    }
}

/// Linear combination `sum_i coeffs[i] * vecs[i]`.
pub fn combine(vecs: &[Vec<f64>], coeffs: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (v, &c) in vecs.iter().zip(coeffs) {
        if c != 0.0 {
            axpy(&mut out, c, v);
        }
    }
    out
}

/// Orthonormal basis of the span of `vecs` orthogonal to the orthonormal set
/// `against`, taking vectors greedily by largest remaining norm. Vectors whose
/// residual norm falls below `tol` are dropped.
pub fn orthonormal_complement(vecs: &[Vec<f64>], against: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut pool: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| {
            let mut w = v.clone();
            project_out(&mut w, against);
            w
        })
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    loop {
        let Some((idx, nrm)) = pool
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        else {
            break;
        };
        if nrm <= tol {
            break;
        }
        let mut v = pool.swap_remove(idx);
        project_out(&mut v, &out);
        project_out(&mut v, against);
        if normalize(&mut v) <= tol {
            continue;
        }
        for w in pool.iter_mut() {
            let c = dot(w, &v);
            axpy(w, -c, &v);
        }
        out.push(v);
    }
    out
}

/// Haar-distributed random orthogonal `r x r` matrix, returned as columns.
pub fn random_orthogonal<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let cols: Vec<Vec<f64>> =
            (0..r).map(|_| (0..r).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let q = orthonormal_complement(&cols, &[], 1e-8);
        if q.len() == r {
            return q;
        }
    }
}

/// Columns `vecs * Q` where `Q` is given by its columns.
pub fn rotate(vecs: &[Vec<f64>], q: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    q.iter().map(|col| combine(vecs, col, len)).collect()
}

/// Solves the square system `a x = b` by partial pivoting; `None` when the
/// smallest pivot is below `tol`.
pub fn solve(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= tol {
            return None;
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Orthonormal basis of `{x : C x = 0}` for `C` with `ncols` columns, via the
/// eigendecomposition of `C^T C`; eigenvalues `<= tol * (1 + max)` count as zero.
pub fn nullspace(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    let ctc = DenseSymmetricMatrix::from_fn(ncols, |i, j| rows.iter().map(|r| r[i] * r[j]).sum());
    let spec = eigendecompose(&ctc).expect("finite Gram matrix");
    let top = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    spec.eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .filter(|(v, _)| v.abs() <= tol * (1.0 + top))
        .map(|(_, vec)| vec.clone())
        .collect()
}

/// Scalar field used by [`rref`].
pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn magnitude(&self) -> f64;
    /// Exact fields ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Reduced row echelon form, visiting columns in `col_order`.
///
/// Returns the pivot column of each surviving row; rows are truncated to the
/// rank. Pivot rows are chosen by largest magnitude (irrelevant for exact
/// fields, since the reduced form is unique).
pub fn rref<F: Field>(rows: &mut Vec<Vec<F>>, col_order: &[usize], tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for &col in col_order {
        if next == rows.len() {
            break;
        }
        let best = (next..rows.len())
            .filter(|&r| !rows[r][col].is_negligible(tol))
            .max_by(|&a, &b| rows[a][col].magnitude().total_cmp(&rows[b][col].magnitude()).then(b.cmp(&a)));
        let Some(piv) = best else { continue };
        rows.swap(next, piv);
        let p = rows[next][col].clone();
        for v in rows[next].iter_mut() {
            *v = v.div(&p);
        }
        rows[next][col] = F::one();
        for r in 0..rows.len() {
            if r == next || rows[r][col].is_negligible(0.0) {
                continue;
            }
            let f = rows[r][col].clone();
            for c in 0..rows[r].len() {
                let delta = f.mul(&rows[next][c]);
                rows[r][c] = rows[r][c].sub(&delta);
                if rows[r][c].is_negligible(tol * 1e-3) {
                    rows[r][c] = F::zero();
                }
            }
            rows[r][col] = F::zero();
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rref_rational_reversed_order() {
        // x0 + x1 + x2 = 0, x1 - x2 = 0; reversed column order pivots x2 then x1.
        let mut rows = vec![vec![q(1, 1), q(1, 1), q(1, 1)], vec![q(0, 1), q(1, 1), q(-1, 1)]];
        let piv = rref(&mut rows, &[2, 1, 0], 0.0);
        assert_eq!(piv, vec![2, 1]);
        assert_eq!(rows[0], vec![q(1, 2), q(0, 1), q(1, 1)]);
        assert_eq!(rows[1], vec![q(1, 2), q(1, 1), q(0, 1)]);
    }

    #[test]
    fn rref_float_matches_rational() {
        let mut f = vec![vec![2.0, 4.0, -2.0], vec![1.0, 1.0, 1.0], vec![3.0, 5.0, -1.0]];
        let piv = rref(&mut f, &[0, 1, 2], 1e-12);
        assert_eq!(piv, vec![0, 1]);
        assert!((f[0][2] - 3.0).abs() < 1e-12 && (f[1][2] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_and_nullspace() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0], 1e-12).is_none());
        let ns = nullspace(&[vec![1.0, 1.0, 0.0]], 3, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + v[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn complement_is_orthonormal() {
        let against = vec![vec![1.0, 0.0, 0.0]];
        let out = orthonormal_complement(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]], &against, 1e-10);
        assert_eq!(out.len(), 2);
        assert!(dot(&out[0], &out[1]).abs() < 1e-12);
        assert!(out.iter().all(|v| dot(v, &against[0]).abs() < 1e-12 && (norm(v) - 1.0).abs() < 1e-12));
    }
}
