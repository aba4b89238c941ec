//! Dense symmetric eigendecomposition (cyclic Jacobi), eigenvalue grouping and
//! vanishing-set detection.

use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::linalg::{max_abs, norm};
use crate::matrix::DenseSymmetricMatrix;

/// Default relative gap for merging eigenvalues (scaled by the spectral radius).
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;
/// Default relative threshold for zero eigenvector entries.
pub const DEFAULT_ENTRY_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Full spectrum with eigenvectors as columns (`eigenvectors[k]` belongs to
/// `eigenvalues[k]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norm: f64,
}

/// A cluster of equal eigenvalues with its orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenGroup {
    pub lambda: f64,
    /// One plus the number of eigenvalues strictly below the group.
    pub index_k: usize,
    pub multiplicity_r: usize,
    pub basis: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition, ascending, with each eigenvector's
/// largest-magnitude entry (smallest index on ties) made positive.
pub fn eigendecompose(m: &DenseSymmetricMatrix) -> Result<Spectrum> {
    let n = m.n();
    if n == 0 {
        return Err(NodalError::InvalidInput("matrix must have n >= 1".into()));
    }
    if let Some(idx) = m.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(NodalError::NonFinite { i: idx / n, j: idx % n });
    }
    let mut a = m.as_slice().to_vec();
    // Rows of `vt` are the columns of the accumulated rotation.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let target = 1e-12 * m.frobenius();
    for sweep in 0..MAX_SWEEPS {
        let off = off_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 || apq.abs() <= threshold {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if sweep > 3 && apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotate(&mut a, &mut vt, n, p, q, app, aqq, apq);
            }
        }
        if sweep + 1 == MAX_SWEEPS {
            return Err(NodalError::Numerical("Jacobi iteration did not converge".into()));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut v = vt[i * n..(i + 1) * n].to_vec();
            canonical_sign(&mut v);
            v
        })
        .collect();
    let residual_norm = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, v)| m.residual(l, v))
        .fold(0.0f64, f64::max);
    Ok(Spectrum { eigenvalues, eigenvectors, residual_norm })
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut [f64], vt: &mut [f64], n: usize, p: usize, q: usize, app: f64, aqq: f64, apq: f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let np = arp - s * (arq + tau * arp);
        let nq = arq + s * (arp - tau * arq);
        a[r * n + p] = np;
        a[p * n + r] = np;
        a[r * n + q] = nq;
        a[q * n + r] = nq;
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    let (lo, hi) = vt.split_at_mut(q * n);
    let vp = &mut lo[p * n..(p + 1) * n];
    let vq = &mut hi[..n];
    for k in 0..n {
        let x = vp[k];
        let y = vq[k];
        vp[k] = x - s * (y + tau * x);
        vq[k] = y + s * (x - tau * y);
    }
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Merges consecutive eigenvalues whose gap is at most
/// `group_tol * max(spectral radius, 1e-300)`.
pub fn group_eigenvalues(spec: &Spectrum, group_tol: f64) -> Vec<EigenGroup> {
    let radius = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = if radius > 0.0 { group_tol * radius } else { group_tol };
    let mut groups = Vec::new();
    let mut start = 0;
    let n = spec.eigenvalues.len();
    for i in 1..=n {
        if i == n || spec.eigenvalues[i] - spec.eigenvalues[i - 1] > tol {
            let vals = &spec.eigenvalues[start..i];
            groups.push(EigenGroup {
                lambda: vals.iter().sum::<f64>() / vals.len() as f64,
                index_k: start + 1,
                multiplicity_r: i - start,
                basis: spec.eigenvectors[start..i].to_vec(),
            });
            start = i;
        }
    }
    groups
}

/// Indices with `|x(j)| <= zero_tol`.
pub fn vanishing_set(x: &[f64], zero_tol: f64) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| v.abs() <= zero_tol).map(|(i, _)| i).collect()
}

/// Vanishing set with the default relative tolerance `1e-9 * |x|_inf`.
pub fn default_vanishing_set(x: &[f64]) -> Vec<usize> {
    vanishing_set(x, DEFAULT_ENTRY_TOL * max_abs(x))
}

/// Vertices where the row of the basis block has norm `<= zero_tol * sqrt(r)`.
pub fn eigenspace_common_zeros(group: &EigenGroup, zero_tol: f64) -> Vec<usize> {
    let n = group.basis.first().map_or(0, Vec::len);
    let r = group.basis.len();
    let cut = zero_tol * (r as f64).sqrt();
    (0..n)
        .filter(|&j| norm(&group.basis.iter().map(|b| b[j]).collect::<Vec<_>>()) <= cut)
        .collect()
}

/// Eigenvectors of all eigenvalues strictly below the group.
pub fn lower_eigenvectors<'a>(spec: &'a Spectrum, group: &EigenGroup) -> &'a [Vec<f64>] {
    &spec.eigenvectors[..group.index_k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn star_laplacian(n: usize) -> DenseSymmetricMatrix {
        let mut m = DenseSymmetricMatrix::zeros(n);
        for i in 1..n {
            m.set(0, i, -1.0);
            m.set(i, i, 1.0);
        }
        m.set(0, 0, (n - 1) as f64);
        m
    }

    #[test]
    fn star_spectrum_and_groups() {
        let spec = eigendecompose(&star_laplacian(5)).unwrap();
        let expect = [0.0, 1.0, 1.0, 1.0, 5.0];
        for (a, b) in spec.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let groups = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        let shape: Vec<_> = groups.iter().map(|g| (g.index_k, g.multiplicity_r)).collect();
        assert_eq!(shape, vec![(1, 1), (2, 3), (5, 1)]);
        assert_eq!(eigenspace_common_zeros(&groups[1], 1e-9), vec![0]);
        assert!(eigenspace_common_zeros(&groups[0], 1e-9).is_empty());
    }

    #[test]
    fn negative_path_adjacency_closed_form() {
        let n = 7;
        let m = DenseSymmetricMatrix::from_fn(n, |i, j| if j == i + 1 { -1.0 } else { 0.0 });
        let spec = eigendecompose(&m).unwrap();
        for (k, l) in spec.eigenvalues.iter().enumerate() {
            let exact = -2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-12, "{l} vs {exact}");
        }
    }

    #[test]
    fn identity_is_one_group() {
        let spec = eigendecompose(&DenseSymmetricMatrix::identity(4)).unwrap();
        let g = group_eigenvalues(&spec, DEFAULT_GROUP_TOL);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].multiplicity_r, 4);
    }

    #[test]
    fn sign_convention_and_orthonormality() {
        let m = DenseSymmetricMatrix::from_fn(6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let spec = eigendecompose(&m).unwrap();
        for (a, va) in spec.eigenvectors.iter().enumerate() {
            let big = va.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let first = va.iter().position(|v| v.abs() == big).unwrap();
            assert!(va[first] > 0.0);
            for (b, vb) in spec.eigenvectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot(va, vb) - want).abs() < 1e-12);
            }
        }
        assert!(spec.residual_norm < 1e-10);
    }

    #[test]
    fn vanishing_sets() {
        assert_eq!(vanishing_set(&[1.0, 0.0, -2.0, 1e-14], 1e-12), vec![1, 3]);
        assert!(vanishing_set(&[1.0, -1.0], 1e-12).is_empty());
        assert_eq!(default_vanishing_set(&[0.0, 0.0]), vec![0, 1]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DenseSymmetricMatrix::zeros(2);
        m.set(0, 1, f64::INFINITY);
        assert!(eigendecompose(&m).is_err());
    }
}
