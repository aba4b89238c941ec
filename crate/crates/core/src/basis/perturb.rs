//! Stability of a signed basis under small rotations inside the eigenspace.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::construct::SignedBasisResult;
use crate::error::Result;
use crate::graph::{SignedGraph, DEFAULT_ZERO_TOL};
use crate::matrix::DenseSymmetricMatrix;
use crate::nodal::{nodal_count, ExactConfig, SignConvention};
use crate::rng::derived_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub trials: usize,
    pub passed: usize,
    pub fraction: f64,
    /// Largest rotation angle used.
    pub upsilon: f64,
}

/// Vertices where every vector of the basis vanishes.
fn common_zeros(result: &SignedBasisResult, tol: f64) -> Vec<bool> {
    let n = result.vectors.first().map_or(0, |v| v.phi.len());
    (0..n).map(|i| result.vectors.iter().all(|v| v.phi[i].abs() <= tol)).collect()
}

/// Applies `trials` random products of Givens rotations over all pairs, with
/// angles uniform in `[-upsilon, upsilon]` where
/// `upsilon = scale * 2^(-C(r,2)) * min |phi_s(j)|` off the common zeros.
/// A trial passes when every sign off the common zeros survives and every
/// re-signed vector still meets its bound.
pub fn perturbation_stability_test(
    m: &DenseSymmetricMatrix,
    result: &SignedBasisResult,
    upsilon_scale: f64,
    trials: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    let r = result.vectors.len();
    let zero = common_zeros(result, 1e-12);
    let min_entry = result
        .vectors
        .iter()
        .flat_map(|v| v.phi.iter().enumerate().filter(|(i, _)| !zero[*i]).map(|(_, x)| x.abs()))
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|p| (p + 1..r).map(move |q| (p, q))).collect();
    let upsilon = if min_entry.is_finite() {
        upsilon_scale * 2f64.powi(-(pairs.len() as i32)) * min_entry
    } else {
        0.0
    };
    let exact = ExactConfig::default();

    let trial = |t: usize| -> Result<bool> {
        let mut rng = derived_rng(seed, &format!("perturb/{t}"));
        let mut phis: Vec<Vec<f64>> = result.vectors.iter().map(|v| v.phi.clone()).collect();
        for &(p, q) in &pairs {
            let theta = if upsilon > 0.0 { rng.random_range(-upsilon..=upsilon) } else { 0.0 };
            let (c, s) = (theta.cos(), theta.sin());
            for i in 0..phis[p].len() {
                let (a, b) = (phis[p][i], phis[q][i]);
                phis[p][i] = c * a + s * b;
                phis[q][i] = -s * a + c * b;
            }
        }
        for (v, phi) in result.vectors.iter().zip(&phis) {
            let mut eps = v.eps.clone();
            for i in 0..phi.len() {
                if zero[i] {
                    continue;
                }
                let orig = v.phi[i];
                if orig != 0.0 && (phi[i] == 0.0 || phi[i].signum() != orig.signum()) {
                    return Ok(false);
                }
                eps[i] = if phi[i] > 0.0 { 1 } else { -1 };
            }
            let n_value = if eps == v.eps {
                v.n_value
            } else {
                let x: Vec<f64> = eps.iter().map(|&e| f64::from(e)).collect();
                nodal_count(&g, m, &x, SignConvention::LaplacianLike, &exact)?.size
            };
            if n_value > v.bound {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let outcomes: Vec<bool> = (0..trials).into_par_iter().map(trial).collect::<Result<_>>()?;
    let passed = outcomes.iter().filter(|&&b| b).count();
    let fraction = if trials == 0 { 1.0 } else { passed as f64 / trials as f64 };
    Ok(PerturbationReport { trials, passed, fraction, upsilon })
}
