//! Signed orthonormal eigenbasis with `N(eps_s) <= k + (s-1) + f`.
//!
//! Works in the switched matrix `DMD` whose positive off-diagonal pairs number
//! exactly `f`, then maps vectors and signings back with `D`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::structure::EigenspaceStructure;
use crate::error::{NodalError, Result};
use crate::frustration::{frustration_index_exact, frustration_index_heuristic, DEFAULT_FRUSTRATION_CAP};
use crate::graph::{SignedGraph, StateVector, DEFAULT_ZERO_TOL};
use crate::linalg::{axpy, dot, max_abs, norm, normalize, orthonormal_complement, project_out, random_orthogonal, rotate, solve};
use crate::matrix::DenseSymmetricMatrix;
use crate::nodal::{nodal_count, ExactConfig, SignConvention};
use crate::spectral::EigenGroup;

/// Upper limit on the `1, -1, 2, -2, ...` scan for a free coefficient.
const MAX_SCAN: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionConfig {
    pub seed: u64,
    /// Entries of unit vectors at or below this magnitude count as zero.
    pub zero_tol: f64,
    /// Halvings allowed in the orthogonality fallback.
    pub delta_halvings: usize,
    pub exact: ExactConfig,
    pub frustration_cap: usize,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            zero_tol: 1e-12,
            delta_halvings: 40,
            exact: ExactConfig::default(),
            frustration_cap: DEFAULT_FRUSTRATION_CAP,
        }
    }
}

/// Role of a coefficient in the construction of one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PiClass {
    /// Pivot fixed by the eigenspace constraints.
    E,
    /// Sign-restricted.
    S,
    /// Solved for orthogonality.
    O,
    /// Free.
    F,
}

/// Coefficients of one constructed vector before normalization and rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub s: usize,
    /// All variables in `(j, sigma)` order, pivots included (switched frame).
    pub alpha: Vec<f64>,
    pub classes: Vec<PiClass>,
    /// `sum alpha psi` mapped back to the original frame.
    pub raw_phi: Vec<f64>,
    /// Set when the orthogonality fallback later perturbed this vector.
    pub perturbed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedVector {
    pub phi: Vec<f64>,
    pub eps: Vec<i8>,
    pub partition: Vec<Vec<usize>>,
    pub bound: usize,
    #[serde(rename = "N")]
    pub n_value: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedBasisResult {
    pub eigenvalue: f64,
    pub k: usize,
    pub r: usize,
    pub f: usize,
    pub vectors: Vec<SignedVector>,
    /// Whether every `N` above is a certified minimum.
    #[serde(default)]
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientRecord>,
}

impl SignedBasisResult {
    pub fn bounds_hold(&self) -> bool {
        self.vectors.iter().all(|v| v.n_value <= v.bound)
    }
}

/// Per-vector bookkeeping for the coefficient choice.
struct Builder<'a> {
    st: &'a EigenspaceStructure,
    g: &'a SignedGraph,
    w: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    /// Largest variable with a non-zero coefficient, per vertex outside i0.
    lead: Vec<Option<usize>>,
    block_of_var: Vec<usize>,
    last_var: Vec<usize>,
    hat_y: Vec<usize>,
    zero_tol: f64,
}

impl<'a> Builder<'a> {
    fn new(st: &'a EigenspaceStructure, g: &'a SignedGraph, zero_tol: f64) -> Self {
        let w = st.free_vectors();
        let n = st.n;
        let nv = st.r_hat;
        let mut lead = vec![None; n];
        for part in &st.y_parts {
            for &i in part {
                let scale = (0..nv).map(|v| w[v][i].abs()).fold(0.0f64, f64::max);
                lead[i] = (0..nv).rev().find(|&v| w[v][i].abs() > 1e-12 * scale.max(1e-300));
            }
        }
        let vars = st.variables();
        let off = st.offsets();
        Self {
            st,
            g,
            w,
            pivots: st.pivot_vars(),
            lead,
            block_of_var: vars.iter().map(|&(j, _)| j).collect(),
            last_var: (0..st.q()).map(|j| off[j + 1] - 1).collect(),
            hat_y: st.hat_y(),
            zero_tol,
        }
    }

    fn qg(&self) -> usize {
        self.st.q().saturating_sub(self.st.gamma)
    }

    /// Variables solved for orthogonality when building vector `s` (1-based).
    fn pi_o(&self, s: usize) -> Vec<usize> {
        let qg = self.qg();
        if s >= qg {
            return Vec::new();
        }
        (qg - s + 2..=qg).map(|m| self.last_var[self.hat_y[m - 1]]).collect()
    }

    /// Blocks `j_m` carrying sign restrictions for vector `s`.
    fn pi_s_blocks(&self, s: usize) -> Vec<usize> {
        let qg = self.qg();
        if s >= qg {
            return Vec::new();
        }
        (2..=qg - s + 1).map(|m| self.hat_y[m - 1]).collect()
    }

    fn classes(&self, s: usize) -> Vec<PiClass> {
        let o = self.pi_o(s);
        let sb = self.pi_s_blocks(s);
        (0..self.st.r_hat)
            .map(|v| {
                if self.pivots.contains(&v) {
                    PiClass::E
                } else if o.contains(&v) {
                    PiClass::O
                } else if sb.contains(&self.block_of_var[v]) {
                    PiClass::S
                } else {
                    PiClass::F
                }
            })
            .collect()
    }

    /// Vertices whose sign pattern vector `s` must keep: all of the
    /// non-vanishing part for `s = 1`, otherwise `Y_j` with `j <= j_{q-gamma-s+1}`.
    fn active(&self, s: usize) -> Vec<usize> {
        let qg = self.qg();
        let limit = if s == 1 || s >= qg { usize::MAX } else { self.hat_y[qg - s] };
        self.st
            .y_parts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j <= limit)
            .flat_map(|(_, p)| p.iter().copied())
            .collect()
    }

    fn value(&self, alpha: &[f64], i: usize) -> f64 {
        (0..alpha.len()).map(|v| alpha[v] * self.w[v][i]).sum()
    }

    /// Coefficients for vector `s` given the earlier ones; may perturb the
    /// previous vector when the orthogonality system is singular.
    fn build(&self, s: usize, prev: &mut [Vec<f64>], prev_alpha: &mut [Vec<f64>], perturbed: &mut [bool], delta_halvings: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let nv = self.st.r_hat;
        let o_vars = self.pi_o(s);
        let s_blocks = self.pi_s_blocks(s);
        let mut alpha = vec![0.0; nv];
        let mut set = vec![false; nv];
        for &p in &self.pivots {
            set[p] = true;
        }
        for v in 0..nv {
            if set[v] || o_vars.contains(&v) {
                continue;
            }
            // Half-line restriction on the last coefficient of a sign block.
            let block = self.block_of_var[v];
            let half = if v == self.last_var[block] && s_blocks.contains(&block) {
                let (a, _) = self.st.pair(self.g, block).ok_or_else(|| {
                    NodalError::Construction(format!("Y_{} has no neighbor in X_v", block + 1))
                })?;
                let anchor = self.st.anchors[self.st.v[block]];
                let av = self.partial(&alpha, &set, anchor);
                if av.abs() <= self.zero_tol {
                    return Err(NodalError::Construction(format!("anchor {anchor} vanishes")));
                }
                Some((a, self.partial(&alpha, &set, a), av.signum()))
            } else {
                None
            };
            // Vertices led by v that do not wait on an orthogonality variable.
            let led: Vec<usize> = (0..self.st.n)
                .filter(|&i| self.lead[i] == Some(v))
                .filter(|&i| o_vars.iter().all(|&o| self.w[o][i] == 0.0))
                .collect();
            if half.is_none() && led.is_empty() {
                set[v] = true;
                continue;
            }
            let mut chosen = None;
            for t in 0..MAX_SCAN {
                let cand = if t % 2 == 0 { (t / 2 + 1) as f64 } else { -((t / 2 + 1) as f64) };
                alpha[v] = cand;
                if let Some((a, known, sign)) = half {
                    let total = known + cand * self.w[v][a];
                    if total == 0.0 || total.signum() != sign {
                        continue;
                    }
                }
                let ok = led.iter().all(|&i| {
                    let val = self.partial(&alpha, &set, i) + cand * self.w[v][i];
                    let scale: f64 = (0..nv).map(|x| (alpha[x] * self.w[x][i]).abs()).sum();
                    val.abs() > 1e-9 * scale.max(1e-300)
                });
                if ok {
                    chosen = Some(cand);
                    break;
                }
            }
            let Some(c) = chosen else {
                return Err(NodalError::Construction(format!("no admissible value for coefficient {v}")));
            };
            alpha[v] = c;
            set[v] = true;
        }

        if !o_vars.is_empty() {
            let beta = self.solve_orth(s, &alpha, &o_vars, prev, prev_alpha, perturbed, delta_halvings)?;
            for (&o, b) in o_vars.iter().zip(beta) {
                alpha[o] = b;
            }
        }
        self.st.complete_alpha(&mut alpha);
        let phi = (0..self.st.n).map(|i| if self.lead[i].is_some() { self.value(&alpha, i) } else { 0.0 }).collect();
        Ok((alpha, phi))
    }

    /// Value at `i` from the variables fixed so far.
    fn partial(&self, alpha: &[f64], set: &[bool], i: usize) -> f64 {
        (0..alpha.len()).filter(|&v| set[v] && !self.pivots.contains(&v)).map(|v| alpha[v] * self.w[v][i]).sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_orth(
        &self,
        s: usize,
        alpha: &[f64],
        o_vars: &[usize],
        prev: &mut [Vec<f64>],
        prev_alpha: &mut [Vec<f64>],
        perturbed: &mut [bool],
        delta_halvings: usize,
    ) -> Result<Vec<f64>> {
        let n = self.st.n;
        let mut base_alpha = alpha.to_vec();
        for &o in o_vars {
            base_alpha[o] = 0.0;
        }
        let phi0: Vec<f64> = (0..n).map(|i| self.value(&base_alpha, i)).collect();
        let system = |prev: &[Vec<f64>]| -> (Vec<Vec<f64>>, Vec<f64>) {
            let a = prev.iter().map(|p| o_vars.iter().map(|&o| dot(p, &self.w[o])).collect()).collect();
            let b = prev.iter().map(|p| -dot(p, &phi0)).collect();
            (a, b)
        };
        let try_solve = |a: &[Vec<f64>], b: &[f64]| {
            let scale = a.iter().map(|r| max_abs(r)).fold(0.0f64, f64::max);
            solve(a, b, 1e-10 * scale.max(1e-300))
        };
        let (a, b) = system(prev);
        if let Some(x) = try_solve(&a, &b) {
            return Ok(x);
        }
        // Replace the previous vector by prev + delta * x with x orthogonal to
        // the older ones and contributing a new direction on the solved variables.
        let t = s - 1;
        let older = orthonormal_complement(&prev[..t - 1], &[], 1e-12);
        let keep = self.active(t);
        let min_entry = keep.iter().map(|&i| prev[t - 1][i].abs()).fold(f64::INFINITY, f64::min);
        for &o in o_vars {
            let mut x = self.w[o].clone();
            project_out(&mut x, &older);
            if normalize(&mut x) <= 1e-12 {
                continue;
            }
            // Coefficients of x: e_o minus the projections.
            let mut x_alpha = vec![0.0; self.st.r_hat];
            x_alpha[o] = 1.0;
            let raw_norm = {
                let mut y = self.w[o].clone();
                let mut coeff_alpha = x_alpha.clone();
                for (pa, pv) in prev_alpha[..t - 1].iter().zip(&prev[..t - 1]) {
                    let c = dot(&self.w[o], pv) / dot(pv, pv);
                    axpy(&mut y, -c, pv);
                    axpy(&mut coeff_alpha, -c, pa);
                }
                x_alpha = coeff_alpha;
                norm(&y)
            };
            let mut delta = 1e-3 * min_entry;
            for _ in 0..=delta_halvings {
                let mut cand = prev[t - 1].clone();
                axpy(&mut cand, delta, &x);
                let signs_kept = keep.iter().all(|&i| cand[i] != 0.0 && cand[i].signum() == prev[t - 1][i].signum());
                if signs_kept {
                    let mut trial = prev.to_vec();
                    trial[t - 1] = cand.clone();
                    let (a, b) = system(&trial);
                    if let Some(sol) = try_solve(&a, &b) {
                        prev[t - 1] = cand;
                        axpy(&mut prev_alpha[t - 1], delta / raw_norm, &x_alpha);
                        self.st.complete_alpha(&mut prev_alpha[t - 1]);
                        perturbed[t - 1] = true;
                        return Ok(sol);
                    }
                }
                delta /= 2.0;
            }
        }
        Err(NodalError::Construction(format!("orthogonality system for vector {s} stays singular")))
    }
}

/// Builds the signed basis for `group` from `structure` (computed on `m`).
pub fn construct_signed_basis(
    m: &DenseSymmetricMatrix,
    group: &EigenGroup,
    structure: &EigenspaceStructure,
    cfg: &ConstructionConfig,
) -> Result<SignedBasisResult> {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    g.require_connected()?;
    let n = m.n();
    if structure.n != n {
        return Err(NodalError::DimensionMismatch { expected: n, got: structure.n });
    }
    let fr = if n <= cfg.frustration_cap {
        frustration_index_exact(&g)?
    } else {
        frustration_index_heuristic(&g, cfg.seed, 16)
    };
    let d = fr.witness.clone();
    let ds = d.as_f64();
    let m_sw = m.switched(&d)?;
    let st = structure.switched(&d, &m_sw);
    let r = st.r;
    let builder = Builder::new(&st, &g, cfg.zero_tol);
    let qg = builder.qg();
    let count = if qg >= 2 { qg - 1 } else { 1 }.min(r);

    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut alphas: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut perturbed = vec![false; count];
    for s in 1..=count {
        let (alpha, phi) = builder.build(s, &mut raw, &mut alphas, &mut perturbed, cfg.delta_halvings)?;
        raw.push(phi);
        alphas.push(alpha);
    }
    let records: Vec<CoefficientRecord> = (0..count)
        .map(|idx| CoefficientRecord {
            s: idx + 1,
            alpha: alphas[idx].clone(),
            classes: builder.classes(idx + 1),
            raw_phi: raw[idx].iter().zip(&ds).map(|(a, b)| a * b).collect(),
            perturbed: perturbed[idx],
        })
        .collect();

    // Normalize, then complete with a rotated orthonormal basis of the rest.
    let mut basis: Vec<Vec<f64>> = raw
        .iter()
        .map(|v| {
            let mut u = v.clone();
            normalize(&mut u);
            u
        })
        .collect();
    let group_sw: Vec<Vec<f64>> =
        group.basis.iter().map(|b| b.iter().zip(&ds).map(|(x, y)| x * y).collect()).collect();
    let built = orthonormal_complement(&basis, &[], 1e-10);
    if built.len() != basis.len() {
        return Err(NodalError::Construction("constructed vectors are linearly dependent".into()));
    }
    let rest = orthonormal_complement(&group_sw, &built, 1e-6);
    if rest.len() != r - count {
        return Err(NodalError::Numerical(format!(
            "completion has {} vectors, expected {}",
            rest.len(),
            r - count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let q = random_orthogonal(rest.len(), &mut rng);
    basis.extend(rotate(&rest, &q, n));
    let i0 = &st.i0_lambda;
    for b in basis.iter_mut() {
        for &i in i0 {
            b[i] = 0.0;
        }
    }

    // Givens rotations G_{1,i}(rho / 2^r) against the first vector.
    let rho = basis
        .iter()
        .flatten()
        .map(|v| v.abs())
        .filter(|&v| v > cfg.zero_tol)
        .fold(f64::INFINITY, f64::min);
    let theta = rho / 2f64.powi(r as i32);
    let (c, sn) = (theta.cos(), theta.sin());
    for i in 1..r {
        let (a, b) = (basis[0].clone(), basis[i].clone());
        for j in 0..n {
            basis[0][j] = c * a[j] + sn * b[j];
            basis[i][j] = -sn * a[j] + c * b[j];
        }
    }

    // Signings in the switched frame, then back.
    let mut vectors = Vec::with_capacity(r);
    let mut certified = true;
    for (idx, phi_sw) in basis.iter().enumerate() {
        let mut eps_sw = vec![1i8; n];
        for part in &st.y_parts {
            for &i in part {
                if phi_sw[i] == 0.0 {
                    return Err(NodalError::Construction(format!("vector {} vanishes at {i}", idx + 1)));
                }
                eps_sw[i] = if phi_sw[i] > 0.0 { 1 } else { -1 };
            }
        }
        for (xi, &anchor) in st.x_parts.iter().zip(&st.anchors) {
            for &a in xi {
                eps_sw[a] = eps_sw[anchor];
            }
        }
        let phi: Vec<f64> = phi_sw.iter().zip(&ds).map(|(a, b)| a * b).collect();
        let eps: Vec<i8> = eps_sw.iter().zip(d.values()).map(|(a, b)| a * b).collect();
        let x: Vec<f64> = eps.iter().map(|&e| f64::from(e)).collect();
        let dec = nodal_count(&g, m, &x, SignConvention::LaplacianLike, &cfg.exact)?;
        certified &= dec.certified_minimal;
        vectors.push(SignedVector {
            phi,
            eps,
            partition: dec.parts,
            bound: group.index_k + idx + fr.f,
            n_value: dec.size,
        });
    }
    check_sign_blocks(&builder, &basis, &st)?;

    Ok(SignedBasisResult {
        eigenvalue: group.lambda,
        k: group.index_k,
        r,
        f: fr.f,
        vectors,
        certified: certified && fr.exact,
        coefficients: records,
    })
}

/// Re-checks the sign restrictions on the rotated vectors.
fn check_sign_blocks(b: &Builder<'_>, basis: &[Vec<f64>], st: &EigenspaceStructure) -> Result<()> {
    let qg = b.qg();
    for s in 1..qg.min(basis.len() + 1) {
        for block in b.pi_s_blocks(s) {
            let (a, _) = st.pair(b.g, block).expect("pair exists");
            let anchor = st.anchors[st.v[block]];
            if basis[s - 1][a].signum() != basis[s - 1][anchor].signum() {
                return Err(NodalError::Construction(format!(
                    "vector {s}: sign restriction at vertex {a} lost after rotation"
                )));
            }
        }
    }
    Ok(())
}

/// Convenience: the switching state used by the construction.
pub fn construction_switching(m: &DenseSymmetricMatrix, cap: usize) -> Result<StateVector> {
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    Ok(if m.n() <= cap { frustration_index_exact(&g)?.witness } else { frustration_index_heuristic(&g, 0, 16).witness })
}
