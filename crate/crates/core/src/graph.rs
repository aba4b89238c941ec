//! Signed graphs derived from symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::matrix::DenseSymmetricMatrix;

/// Default threshold below which a matrix entry is treated as absent.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// An edge `i < j` with sign `sigma` in {+1, -1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedEdge {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
}

/// A switching state: one sign per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<i8>);

impl StateVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(NodalError::InvalidInput(format!(
                "state entry {pos} is {}, expected +1 or -1",
                values[pos]
            )));
        }
        Ok(Self(values))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Signs of `x`, with zeros mapped to +1.
    pub fn from_signs(x: &[f64]) -> Self {
        Self(x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }

    /// Entrywise product.
    pub fn compose(&self, other: &StateVector) -> Result<StateVector> {
        if self.len() != other.len() {
            return Err(NodalError::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }
}

/// Component count, cyclomatic number and edge sign counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInvariants {
    pub kappa: usize,
    pub nu: usize,
    pub e_total: usize,
    pub e_pos: usize,
    pub e_neg: usize,
}

/// Signed graph with `sigma_ij = -sgn(M_ij)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<SignedEdge>,
    adj: Vec<Vec<(usize, i8)>>,
}

impl SignedGraph {
    /// Validates and builds a graph from an edge list.
    pub fn from_edges(n: usize, edges: &[SignedEdge]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for e in edges {
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if i == j {
                return Err(NodalError::InvalidInput(format!("self-loop at vertex {i}")));
            }
            if j >= n {
                return Err(NodalError::InvalidInput(format!("vertex {j} out of range (n = {n})")));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(NodalError::InvalidInput(format!("edge ({i},{j}) has sign {}", e.sign)));
            }
            if !seen.insert((i, j)) {
                return Err(NodalError::InvalidInput(format!("duplicate edge ({i},{j})")));
            }
            norm.push(SignedEdge { i, j, sign: e.sign });
        }
        norm.sort_by_key(|e| (e.i, e.j));
        Ok(Self::build(n, norm))
    }

    /// Edge `(i, j)` exists iff `|M_ij| > zero_tol`, with sign `-sgn(M_ij)`.
    pub fn from_symmetric_matrix(m: &DenseSymmetricMatrix, zero_tol: f64) -> Result<Self> {
        if !(zero_tol >= 0.0) {
            return Err(NodalError::InvalidInput("zero_tol must be >= 0".into()));
        }
        let n = m.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = m.get(i, j);
                if v.abs() > zero_tol {
                    edges.push(SignedEdge { i, j, sign: if v > 0.0 { -1 } else { 1 } });
                }
            }
        }
        Ok(Self::build(n, edges))
    }

    fn build(n: usize, edges: Vec<SignedEdge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            adj[e.i].push((e.j, e.sign));
            adj[e.j].push((e.i, e.sign));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Self { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    /// Neighbors of `v` with edge signs, sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, i8)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn sign(&self, i: usize, j: usize) -> Option<i8> {
        self.adj[i].binary_search_by_key(&j, |&(w, _)| w).ok().map(|k| self.adj[i][k].1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.sign(i, j).is_some()
    }

    /// Matrix with `M_ij = -sigma_ij` on edges and zero elsewhere.
    pub fn to_matrix(&self) -> DenseSymmetricMatrix {
        let mut m = DenseSymmetricMatrix::zeros(self.n);
        for e in &self.edges {
            m.set(e.i, e.j, -(e.sign as f64));
        }
        m
    }

    /// Components of `G[subset]`, each sorted, ordered by smallest vertex.
    pub fn connected_components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        self.components_where(subset, |_, _, _| true)
    }

    /// Components of the graph on `subset` using only edges accepted by `keep`.
    pub fn components_where(
        &self,
        subset: &[usize],
        keep: impl Fn(usize, usize, i8) -> bool,
    ) -> Vec<Vec<usize>> {
        let mut member = vec![false; self.n];
        for &v in subset {
            member[v] = true;
        }
        let mut seen = vec![false; self.n];
        let mut order: Vec<usize> = subset.to_vec();
        order.sort_unstable();
        order.dedup();
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for &start in &order {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(w, s) in &self.adj[u] {
                    if member[w] && !seen[w] && keep(u, w, s) {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn invariants(&self) -> GraphInvariants {
        let all: Vec<usize> = (0..self.n).collect();
        let kappa = self.connected_components(&all).len();
        let e_total = self.edges.len();
        let e_pos = self.edges.iter().filter(|e| e.sign > 0).count();
        GraphInvariants { kappa, nu: e_total + kappa - self.n, e_total, e_pos, e_neg: e_total - e_pos }
    }

    pub fn frustrated_edge_count(&self, eps: &StateVector) -> Result<usize> {
        if eps.len() != self.n {
            return Err(NodalError::DimensionMismatch { expected: self.n, got: eps.len() });
        }
        Ok(self.edges.iter().filter(|e| e.sign * eps.get(e.i) * eps.get(e.j) < 0).count())
    }

    /// Switched graph: `sigma'_ij = sigma_ij eps_i eps_j`.
    pub fn switch(&self, eps: &StateVector) -> Result<SignedGraph> {
        if eps.len() != self.n {
            return Err(NodalError::DimensionMismatch { expected: self.n, got: eps.len() });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| SignedEdge { sign: e.sign * eps.get(e.i) * eps.get(e.j), ..*e })
            .collect();
        Ok(Self::build(self.n, edges))
    }

    /// Errors with `Reducible` unless the graph is connected.
    pub fn require_connected(&self) -> Result<()> {
        let kappa = self.invariants().kappa;
        if kappa != 1 {
            return Err(NodalError::Reducible { components: kappa });
        }
        Ok(())
    }
}

/// Free-function form of [`SignedGraph::from_symmetric_matrix`].
pub fn from_symmetric_matrix(m: &DenseSymmetricMatrix, zero_tol: f64) -> Result<SignedGraph> {
    SignedGraph::from_symmetric_matrix(m, zero_tol)
}

/// Free-function form of [`SignedGraph::invariants`].
pub fn graph_invariants(g: &SignedGraph) -> GraphInvariants {
    g.invariants()
}
