//! Skeleton of an eigenspace with structural zeros: the vanishing set, its
//! components X_i, the components Y_j of the rest, the bipartite graph H between
//! them, non-vanishing bases psi of each block and the reduced constraint system.


use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::graph::{SignedGraph, StateVector, DEFAULT_ZERO_TOL};
use crate::linalg::{max_abs, orthonormal_complement, random_orthogonal, rotate, rref};
use crate::matrix::DenseSymmetricMatrix;
use crate::spectral::{eigendecompose, eigenspace_common_zeros, canonical_sign, EigenGroup, DEFAULT_ENTRY_TOL};

const PSI_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureConfig {
    /// Absolute threshold on basis row norms for the common vanishing set.
    pub zero_tol: f64,
    /// Entries of psi smaller than this count as vanishing.
    pub psi_floor: f64,
    /// Relative tolerance of the floating-point elimination.
    pub rref_tol: f64,
    pub seed: u64,
    /// Replaces the computed psi bases. Indexed by Y part (final order), then
    /// basis vector, in the local coordinates of the part (ascending vertices).
    pub psi_override: Option<Vec<Vec<Vec<f64>>>>,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self { zero_tol: DEFAULT_ENTRY_TOL, psi_floor: 1e-6, rref_tol: 1e-9, seed: 0, psi_override: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenspaceStructure {
    pub lambda: f64,
    pub k: usize,
    pub r: usize,
    pub n: usize,
    pub i0_lambda: Vec<usize>,
    pub x_parts: Vec<Vec<usize>>,
    pub y_parts: Vec<Vec<usize>>,
    /// Pairs `(i, j)` with `x_i ~ y_j`, sorted.
    pub h_edges: Vec<(usize, usize)>,
    /// Smallest `j` adjacent to each `x_i`.
    pub u: Vec<usize>,
    /// Smallest `i` adjacent to each `y_j`; empty when `p = 0`.
    pub v: Vec<usize>,
    /// `psi[j][sigma]` in the local coordinates of `y_parts[j]`.
    pub psi: Vec<Vec<Vec<f64>>>,
    /// Pivot variables `(eta, sigma)`, ascending.
    pub pivots: Vec<(usize, usize)>,
    /// Row `l` of the reduced system over all variables in `(j, sigma)` order;
    /// `coeffs[l][pivot_l] == 1`.
    pub coeffs: Vec<Vec<f64>>,
    #[serde(skip)]
    pub exact_coeffs: Option<Vec<Vec<BigRational>>>,
    pub gamma: usize,
    pub k_hat: usize,
    pub r_hat: usize,
    pub f_hat: usize,
    pub f_tilde: usize,
    /// Smallest-index neighbor of `X_i` inside `Y_{u(i)}`.
    pub anchors: Vec<usize>,
}

impl EigenspaceStructure {
    pub fn p(&self) -> usize {
        self.x_parts.len()
    }

    pub fn q(&self) -> usize {
        self.y_parts.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.psi.iter().map(Vec::len).collect()
    }

    /// Offset of each block in the flat variable order.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.q() + 1);
        let mut acc = 0;
        for b in &self.psi {
            off.push(acc);
            acc += b.len();
        }
        off.push(acc);
        off
    }

    /// `(j, sigma)` of every variable in flat order.
    pub fn variables(&self) -> Vec<(usize, usize)> {
        self.psi.iter().enumerate().flat_map(|(j, b)| (0..b.len()).map(move |s| (j, s))).collect()
    }

    pub fn var_index(&self, j: usize, sigma: usize) -> usize {
        self.offsets()[j] + sigma
    }

    pub fn pivot_vars(&self) -> Vec<usize> {
        self.pivots.iter().map(|&(j, s)| self.var_index(j, s)).collect()
    }

    /// Full-length psi vector.
    pub fn psi_full(&self, j: usize, sigma: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (a, &y) in self.y_parts[j].iter().enumerate() {
            out[y] = self.psi[j][sigma][a];
        }
        out
    }

    /// `w_v = psi_v - sum_l c_{l,v} psi_{pivot_l}` for every variable (zero for
    /// pivots). A vector of the eigenspace is `sum_free alpha_v w_v`.
    pub fn free_vectors(&self) -> Vec<Vec<f64>> {
        let vars = self.variables();
        let piv = self.pivot_vars();
        let piv_psi: Vec<Vec<f64>> = self.pivots.iter().map(|&(j, s)| self.psi_full(j, s)).collect();
        vars.iter()
            .enumerate()
            .map(|(idx, &(j, s))| {
                if piv.contains(&idx) {
                    return vec![0.0; self.n];
                }
                let mut w = self.psi_full(j, s);
                for (l, row) in self.coeffs.iter().enumerate() {
                    let c = row[idx];
                    if c != 0.0 {
                        for (wi, pi) in w.iter_mut().zip(&piv_psi[l]) {
                            *wi -= c * pi;
                        }
                    }
                }
                w
            })
            .collect()
    }

    /// Values of all variables (pivots included) from the free ones.
    pub fn complete_alpha(&self, alpha: &mut [f64]) {
        let piv = self.pivot_vars();
        for (l, row) in self.coeffs.iter().enumerate() {
            let mut s = 0.0;
            for (idx, &c) in row.iter().enumerate() {
                if idx != piv[l] {
                    s += c * alpha[idx];
                }
            }
            alpha[piv[l]] = -s;
        }
    }

    /// Vector `sum_{j,sigma} alpha psi` for a full variable assignment.
    pub fn vector_from_alpha(&self, alpha: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (idx, &(j, s)) in self.variables().iter().enumerate() {
            if alpha[idx] != 0.0 {
                for (a, &y) in self.y_parts[j].iter().enumerate() {
                    out[y] += alpha[idx] * self.psi[j][s][a];
                }
            }
        }
        out
    }

    /// Indices `j_1 < ... ` of blocks without pivots, truncated to `q - gamma`.
    pub fn hat_y(&self) -> Vec<usize> {
        let pivot_blocks: Vec<usize> = self.pivots.iter().map(|&(j, _)| j).collect();
        (0..self.q()).filter(|j| !pivot_blocks.contains(j)).take(self.q().saturating_sub(self.gamma)).collect()
    }

    /// Pivot formula `alpha_pivot = sum coeff * alpha` over free variables, in
    /// exact arithmetic when available.
    pub fn pivot_formula_exact(&self, l: usize) -> Option<Vec<(usize, BigRational)>> {
        let rows = self.exact_coeffs.as_ref()?;
        let piv = self.pivot_vars()[l];
        Some(
            rows[l]
                .iter()
                .enumerate()
                .filter(|(idx, c)| *idx != piv && !c.is_zero())
                .map(|(idx, c)| (idx, -c.clone()))
                .collect(),
        )
    }

    /// Lexicographically smallest adjacent pair `(a, b)` with `a` in `Y_j` and
    /// `b` in `X_{v(j)}`.
    pub fn pair(&self, g: &SignedGraph, j: usize) -> Option<(usize, usize)> {
        let xi = &self.x_parts[*self.v.get(j)?];
        self.y_parts[j]
            .iter()
            .flat_map(|&a| xi.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| g.has_edge(a, b))
            .min()
    }

    /// Same structure for `DMD`: psi is multiplied by `D`, the reduced system is
    /// unchanged and the positive-pair diagnostics are recomputed.
    pub fn switched(&self, eps: &StateVector, m_switched: &DenseSymmetricMatrix) -> Self {
        let mut out = self.clone();
        for (j, part) in self.y_parts.iter().enumerate() {
            for b in out.psi[j].iter_mut() {
                for (a, &y) in part.iter().enumerate() {
                    b[a] *= f64::from(eps.get(y));
                }
            }
        }
        let (f_hat, f_tilde) = positive_pair_counts(m_switched, &self.x_parts, &self.y_parts, &self.u);
        out.f_hat = f_hat;
        out.f_tilde = f_tilde;
        out
    }

    /// Checks the ordering facts the construction depends on.
    pub fn check(&self) -> std::result::Result<(), String> {
        let adj = |i: usize, j: usize| self.h_edges.binary_search(&(i, j)).is_ok();
        for i1 in 1..self.p() {
            let ok = (0..i1).any(|i2| (0..self.q()).any(|j| adj(i1, j) && adj(i2, j)));
            if !ok {
                return Err(format!("x_{} has no earlier part at H-distance 2", i1 + 1));
            }
        }
        if self.v.windows(2).any(|w| w[0] > w[1]) {
            return Err("v is not non-decreasing".into());
        }
        if self.gamma + self.r != self.r_hat {
            return Err(format!("gamma {} + r {} != r_hat {}", self.gamma, self.r, self.r_hat));
        }
        if self.p() > 0 {
            for (m, &jm) in self.hat_y().iter().enumerate().skip(1) {
                if jm <= self.u[self.v[jm]] {
                    return Err(format!("j_{} = {} is not beyond u(v(j))", m + 1, jm + 1));
                }
            }
        }
        Ok(())
    }
}

/// Builds the structure of `group`'s eigenspace.
pub fn analyze_eigenspace(
    m: &DenseSymmetricMatrix,
    group: &EigenGroup,
    cfg: &StructureConfig,
) -> Result<EigenspaceStructure> {
    let n = m.n();
    let g = SignedGraph::from_symmetric_matrix(m, DEFAULT_ZERO_TOL)?;
    g.require_connected()?;
    let i0 = eigenspace_common_zeros(group, cfg.zero_tol);
    let rest: Vec<usize> = (0..n).filter(|v| i0.binary_search(v).is_err()).collect();

    let x_comp = g.connected_components(&i0);
    let y_comp = g.connected_components(&rest);
    let mut part_of = vec![usize::MAX; n];
    for (j, c) in y_comp.iter().enumerate() {
        for &v in c {
            part_of[v] = j;
        }
    }
    // Raw H adjacency between component indices.
    let raw_adj: Vec<Vec<usize>> = x_comp
        .iter()
        .map(|c| {
            let mut js: Vec<usize> = c
                .iter()
                .flat_map(|&a| g.neighbors(a).iter().map(|&(b, _)| part_of[b]))
                .filter(|&j| j != usize::MAX)
                .collect();
            js.sort_unstable();
            js.dedup();
            js
        })
        .collect();

    let x_order = order_x(&x_comp, &raw_adj, y_comp.len());
    let x_parts: Vec<Vec<usize>> = x_order.iter().map(|&i| x_comp[i].clone()).collect();
    let x_adj: Vec<&Vec<usize>> = x_order.iter().map(|&i| &raw_adj[i]).collect();

    // v and H-degree per raw Y component.
    let mut v_raw = vec![usize::MAX; y_comp.len()];
    let mut deg = vec![0usize; y_comp.len()];
    for (i, js) in x_adj.iter().enumerate() {
        for &j in js.iter() {
            v_raw[j] = v_raw[j].min(i);
            deg[j] += 1;
        }
    }
    let mut y_order: Vec<usize> = (0..y_comp.len()).collect();
    y_order.sort_by_key(|&j| (v_raw[j], deg[j], y_comp[j][0]));
    let mut y_pos = vec![0; y_comp.len()];
    for (pos, &j) in y_order.iter().enumerate() {
        y_pos[j] = pos;
    }
    let y_parts: Vec<Vec<usize>> = y_order.iter().map(|&j| y_comp[j].clone()).collect();

    let mut h_edges: Vec<(usize, usize)> =
        x_adj.iter().enumerate().flat_map(|(i, js)| { let y_pos = &y_pos; js.iter().map(move |&j| (i, y_pos[j])) }).collect();
    h_edges.sort_unstable();
    let p = x_parts.len();
    let q = y_parts.len();
    let mut u = vec![usize::MAX; p];
    let mut v = if p == 0 { Vec::new() } else { vec![usize::MAX; q] };
    for &(i, j) in &h_edges {
        u[i] = u[i].min(j);
        v[j] = v[j].min(i);
    }
    if p > 0 && (u.contains(&usize::MAX) || v.contains(&usize::MAX)) {
        return Err(NodalError::Construction("bipartite graph H is not connected".into()));
    }
    let anchors: Vec<usize> = (0..p)
        .map(|i| {
            y_parts[u[i]]
                .iter()
                .copied()
                .find(|&b| x_parts[i].iter().any(|&a| g.has_edge(a, b)))
                .expect("u(i) is adjacent to X_i")
        })
        .collect();

    let psi = match &cfg.psi_override {
        Some(ov) => {
            if ov.len() != q || ov.iter().zip(&y_parts).any(|(b, part)| b.iter().any(|v| v.len() != part.len())) {
                return Err(NodalError::InvalidInput("psi override does not match the Y parts".into()));
            }
            ov.clone()
        }
        None => build_psi(group, &y_parts, cfg)?,
    };

    // Constraint rows: one per vanishing vertex, over variables in (j, sigma) order.
    let vars: Vec<(usize, usize)> =
        psi.iter().enumerate().flat_map(|(j, b)| (0..b.len()).map(move |s| (j, s))).collect();
    let r_hat = vars.len();
    let raw_rows: Vec<Vec<f64>> = x_parts
        .iter()
        .flatten()
        .map(|&a| {
            vars.iter()
                .map(|&(j, s)| y_parts[j].iter().zip(&psi[j][s]).map(|(&y, &val)| m.get(a, y) * val).sum())
                .collect()
        })
        .collect();
    let col_order: Vec<usize> = (0..r_hat).rev().collect();
    let scale = raw_rows.iter().map(|r| max_abs(r)).fold(0.0f64, f64::max);
    let mut rows = raw_rows.clone();
    let piv_cols = rref(&mut rows, &col_order, cfg.rref_tol * (1.0 + scale));
    let gamma = piv_cols.len();
    if gamma + group.multiplicity_r != r_hat {
        return Err(NodalError::Numerical(format!(
            "constraint rank {gamma} inconsistent with r_hat {r_hat} - r {}",
            group.multiplicity_r
        )));
    }
    let mut order: Vec<usize> = (0..gamma).collect();
    order.sort_by_key(|&l| piv_cols[l]);
    let coeffs: Vec<Vec<f64>> = order.iter().map(|&l| rows[l].clone()).collect();
    let pivots: Vec<(usize, usize)> = order.iter().map(|&l| vars[piv_cols[l]]).collect();

    let exact_coeffs = exact_rref(m, &raw_rows, &psi, &x_parts, &y_parts, &vars, &col_order)
        .filter(|(_, cols)| {
            let mut c = cols.clone();
            c.sort_unstable();
            let mut f: Vec<usize> = piv_cols.clone();
            f.sort_unstable();
            c == f
        })
        .map(|(rows, cols)| {
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.sort_by_key(|&l| cols[l]);
            idx.into_iter().map(|l| rows[l].clone()).collect::<Vec<_>>()
        });

    let sub = m.submatrix(&rest);
    let k_hat = if rest.is_empty() {
        1
    } else {
        let spec = eigendecompose(&sub)?;
        let radius = spec.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
        1 + spec.eigenvalues.iter().filter(|&&e| e < group.lambda - 1e-8 * radius).count()
    };
    let (f_hat, f_tilde) = positive_pair_counts(m, &x_parts, &y_parts, &u);

    let out = EigenspaceStructure {
        lambda: group.lambda,
        k: group.index_k,
        r: group.multiplicity_r,
        n,
        i0_lambda: i0,
        x_parts,
        y_parts,
        h_edges,
        u,
        v,
        psi,
        pivots,
        coeffs,
        exact_coeffs,
        gamma,
        k_hat,
        r_hat,
        f_hat,
        f_tilde,
        anchors,
    };
    out.check().map_err(NodalError::Construction)?;
    Ok(out)
}

/// X order: start from the largest component (smallest vertex on ties), then
/// repeatedly take the best-keyed component at H-distance 2 from a placed one.
fn order_x(x_comp: &[Vec<usize>], adj: &[Vec<usize>], q: usize) -> Vec<usize> {
    let p = x_comp.len();
    if p == 0 {
        return Vec::new();
    }
    let key = |i: usize| (std::cmp::Reverse(x_comp[i].len()), x_comp[i][0]);
    let mut by_y: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (i, js) in adj.iter().enumerate() {
        for &j in js {
            by_y[j].push(i);
        }
    }
    let mut placed = vec![false; p];
    let mut frontier = vec![false; p];
    let mut order = Vec::with_capacity(p);
    let mut next = (0..p).min_by_key(|&i| key(i));
    while let Some(i) = next {
        placed[i] = true;
        order.push(i);
        for &j in &adj[i] {
            for &w in &by_y[j] {
                frontier[w] = !placed[w];
            }
        }
        for w in 0..p {
            if placed[w] {
                frontier[w] = false;
            }
        }
        next = (0..p).filter(|&w| frontier[w]).min_by_key(|&w| key(w));
        if next.is_none() && order.len() < p {
            // H disconnected; continue with the remaining parts so the caller can report it.
            next = (0..p).filter(|&w| !placed[w]).min_by_key(|&w| key(w));
        }
    }
    order
}

/// Orthonormal non-vanishing basis of the projection of the eigenspace onto
/// each Y part.
fn build_psi(group: &EigenGroup, y_parts: &[Vec<usize>], cfg: &StructureConfig) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(y_parts.len());
    for part in y_parts {
        let proj: Vec<Vec<f64>> = group.basis.iter().map(|b| part.iter().map(|&y| b[y]).collect()).collect();
        let mut basis = orthonormal_complement(&proj, &[], 1e-7);
        if basis.is_empty() {
            return Err(NodalError::Numerical("eigenspace projection onto a Y part is trivial".into()));
        }
        let floor = |b: &[Vec<f64>]| b.iter().flatten().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if basis.len() == 1 {
            canonical_sign(&mut basis[0]);
        } else if floor(&basis) <= cfg.psi_floor {
            let mut best = basis.clone();
            for _ in 0..PSI_ATTEMPTS {
                let q = random_orthogonal(basis.len(), &mut rng);
                let cand = rotate(&basis, &q, part.len());
                if floor(&cand) > floor(&best) {
                    best = cand;
                }
                if floor(&best) > cfg.psi_floor {
                    break;
                }
            }
            if floor(&best) <= cfg.psi_floor {
                best = targeted_givens(best, cfg.psi_floor);
            }
            basis = best;
        }
        if floor(&basis) <= cfg.zero_tol {
            return Err(NodalError::Numerical("could not find a non-vanishing block basis".into()));
        }
        out.push(basis);
    }
    Ok(out)
}

/// Rotates pairs of basis vectors by small angles until no entry sits below
/// `floor`, trying each offending entry against every partner.
fn targeted_givens(mut basis: Vec<Vec<f64>>, floor: f64) -> Vec<Vec<f64>> {
    let r = basis.len();
    for _ in 0..(4 * r * basis[0].len()) {
        let Some((s, i)) = (0..r)
            .flat_map(|s| (0..basis[s].len()).map(move |i| (s, i)))
            .find(|&(s, i)| basis[s][i].abs() <= floor)
        else {
            break;
        };
        let current = basis.iter().flatten().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let mut applied = false;
        'outer: for t in (0..r).filter(|&t| t != s && basis[t][i].abs() > floor) {
            for theta in [0.3, 0.1, 0.03, 0.01] {
                let (c, sn) = (f64::cos(theta), f64::sin(theta));
                let a: Vec<f64> = basis[s].iter().zip(&basis[t]).map(|(x, y)| c * x + sn * y).collect();
                let b: Vec<f64> = basis[s].iter().zip(&basis[t]).map(|(x, y)| -sn * x + c * y).collect();
                let newmin = a.iter().chain(&b).fold(f64::INFINITY, |m, v| m.min(v.abs()));
                if a[i].abs() > floor && (newmin > current || newmin > floor) {
                    basis[s] = a;
                    basis[t] = b;
                    applied = true;
                    break 'outer;
                }
            }
        }
        if !applied {
            break;
        }
    }
    basis
}

fn to_rational(x: f64) -> Option<BigRational> {
    (x.fract() == 0.0 && x.abs() < 1e15).then(|| BigRational::from_integer(BigInt::from(x as i64)))
}

/// Exact elimination when `M` and psi are integral.
fn exact_rref(
    m: &DenseSymmetricMatrix,
    raw_rows: &[Vec<f64>],
    psi: &[Vec<Vec<f64>>],
    x_parts: &[Vec<usize>],
    y_parts: &[Vec<usize>],
    vars: &[(usize, usize)],
    col_order: &[usize],
) -> Option<(Vec<Vec<BigRational>>, Vec<usize>)> {
    if !m.is_integral() || psi.iter().flatten().flatten().any(|v| v.fract() != 0.0) {
        return None;
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(raw_rows.len());
    for &a in x_parts.iter().flatten() {
        let mut row = Vec::with_capacity(vars.len());
        for &(j, s) in vars {
            let mut acc = BigRational::zero();
            for (&y, &val) in y_parts[j].iter().zip(&psi[j][s]) {
                acc += to_rational(m.get(a, y))? * to_rational(val)?;
            }
            row.push(acc);
        }
        rows.push(row);
    }
    let cols = rref(&mut rows, col_order, 0.0);
    Some((rows, cols))
}

/// `(f_hat, f_tilde)`: positive off-diagonal pairs inside the non-vanishing
/// part, and pairs from each `X_i` to `X_i` or `Y_{u(i)}`.
fn positive_pair_counts(
    m: &DenseSymmetricMatrix,
    x_parts: &[Vec<usize>],
    y_parts: &[Vec<usize>],
    u: &[usize],
) -> (usize, usize) {
    let pos = |a: usize, b: usize| m.get(a, b) > DEFAULT_ZERO_TOL;
    let mut f_hat = 0;
    for part in y_parts {
        for (ai, &a) in part.iter().enumerate() {
            f_hat += part[ai + 1..].iter().filter(|&&b| pos(a, b)).count();
        }
    }
    let mut f_tilde = 0;
    for (i, part) in x_parts.iter().enumerate() {
        for (ai, &a) in part.iter().enumerate() {
            f_tilde += part[ai + 1..].iter().filter(|&&b| pos(a, b)).count();
            f_tilde += y_parts[u[i]].iter().filter(|&&b| pos(a, b)).count();
        }
    }
    (f_hat, f_tilde)
}

/// Human-readable rational, e.g. `-3/14`.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rational to nearest f64.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
