//! Exact minimal nodal decomposition.
//!
//! Parts are connected in the good-edge graph and contain no bad edge, so the
//! problem splits over good-components. Within a component, `f(S)` is the
//! minimum over parts `T` containing the smallest vertex of `S` of
//! `1 + f(S \ T)`, memoized on bitmasks.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::heuristic;
use super::{require_nonvanishing, NodalDecomposition, Problem, SignConvention};
use crate::error::{NodalError, Result};
use crate::graph::SignedGraph;
use crate::matrix::DenseSymmetricMatrix;

/// Hard limit imposed by the bitmask representation.
const MASK_BITS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConfig {
    /// Largest analyzed vertex count for the exact search.
    pub cap: usize,
    /// Wall-clock budget; on expiry the heuristic incumbent is returned
    /// with `certified_minimal = false`.
    pub budget: Duration,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { cap: 20, budget: Duration::from_secs(10) }
    }
}

/// Certified minimal decomposition of all vertices with the default config.
pub fn minimal_nodal_decomposition_exact(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
) -> Result<NodalDecomposition> {
    minimal_nodal_decomposition_exact_with(g, m, x, conv, &ExactConfig::default())
}

pub fn minimal_nodal_decomposition_exact_with(
    g: &SignedGraph,
    m: &DenseSymmetricMatrix,
    x: &[f64],
    conv: SignConvention,
    cfg: &ExactConfig,
) -> Result<NodalDecomposition> {
    let all: Vec<usize> = (0..g.n()).collect();
    require_nonvanishing(x, &all)?;
    let cap = cfg.cap.min(MASK_BITS);
    if g.n() > cap {
        return Err(NodalError::ExceedsCap { n: g.n(), cap });
    }
    Ok(solve_problem(&Problem::new(g, m, x, conv, &all, false), cfg))
}

pub(crate) fn solve_problem(p: &Problem, cfg: &ExactConfig) -> NodalDecomposition {
    let n = p.len();
    assert!(n <= MASK_BITS, "exact search limited to {MASK_BITS} vertices");
    let mut solver = Solver {
        good: p.good.iter().map(|nb| to_mask(nb)).collect(),
        bad: p.bad.iter().map(|nb| to_mask(nb)).collect(),
        memo: HashMap::new(),
        deadline: Instant::now() + cfg.budget,
        ticks: 0,
        expired: false,
    };
    let full = if n == MASK_BITS { u32::MAX } else { (1u32 << n) - 1 };
    solver.value(full);
    if solver.expired {
        let mut d = heuristic::greedy(p, 0);
        d.certified_minimal = false;
        return d;
    }
    let mut parts = Vec::new();
    solver.collect(full, &mut parts);
    p.to_global(parts.into_iter().map(from_mask).collect(), true)
}

fn to_mask(vs: &[usize]) -> u32 {
    vs.iter().fold(0, |m, &v| m | 1 << v)
}

fn from_mask(mut m: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[derive(Clone, Copy)]
enum Choice {
    Split,
    Part(u32),
}

struct Solver {
    good: Vec<u32>,
    bad: Vec<u32>,
    memo: HashMap<u32, (u32, Choice)>,
    deadline: Instant,
    ticks: u64,
    expired: bool,
}

impl Solver {
    fn tick(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks % 4096 == 0 && Instant::now() > self.deadline {
            self.expired = true;
        }
        self.expired
    }

    /// Good-components of `s`.
    fn components(&self, s: u32) -> Vec<u32> {
        let mut rest = s;
        let mut out = Vec::new();
        while rest != 0 {
            let mut comp = rest & rest.wrapping_neg();
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.good[v] & s & !comp;
                comp |= fresh;
                frontier |= fresh;
            }
            rest &= !comp;
            out.push(comp);
        }
        out
    }

    fn has_bad_inside(&self, s: u32) -> bool {
        let mut it = s;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            if self.bad[v] & s != 0 {
                return true;
            }
        }
        false
    }

    /// Greedy clique in the bad graph restricted to `s`.
    fn lower_bound(&self, s: u32) -> u32 {
        let mut verts = from_mask(s);
        verts.sort_by_key(|&v| std::cmp::Reverse((self.bad[v] & s).count_ones()));
        let mut clique = 0u32;
        let mut size = 0;
        for v in verts {
            if clique & !self.bad[v] == 0 {
                clique |= 1 << v;
                size += 1;
            }
        }
        size.max(1)
    }

    fn value(&mut self, s: u32) -> u32 {
        if s == 0 {
            return 0;
        }
        if let Some(&(v, _)) = self.memo.get(&s) {
            return v;
        }
        if self.tick() {
            return u32::MAX / 4;
        }
        let comps = self.components(s);
        let (val, choice) = if comps.len() > 1 {
            (comps.iter().map(|&c| self.value(c)).sum(), Choice::Split)
        } else if !self.has_bad_inside(s) {
            (1, Choice::Part(s))
        } else {
            self.best_part(s)
        };
        if !self.expired {
            self.memo.insert(s, (val, choice));
        }
        val
    }

    fn best_part(&mut self, s: u32) -> (u32, Choice) {
        let lb = self.lower_bound(s);
        let v = s.trailing_zeros() as usize;
        let mut parts = Vec::new();
        self.enumerate(s, 1 << v, self.good[v] & s & !self.bad[v], 0, &mut parts);
        // Larger parts first tends to reach the lower bound sooner.
        parts.sort_by_key(|t| std::cmp::Reverse(t.count_ones()));
        let mut best = (u32::MAX, Choice::Part(1 << v));
        for t in parts {
            let val = 1 + self.value(s & !t);
            if self.expired {
                break;
            }
            if val < best.0 {
                best = (val, Choice::Part(t));
                if val <= lb {
                    break;
                }
            }
        }
        best
    }

    /// Enumerates every good-connected, bad-free `T` with `t <= T <= s`
    /// exactly once (candidates `cand`, excluded `banned`).
    fn enumerate(&mut self, s: u32, t: u32, cand: u32, banned: u32, out: &mut Vec<u32>) {
        out.push(t);
        if self.tick() {
            return;
        }
        let mut cand = cand;
        let mut banned = banned;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            let wb = 1u32 << w;
            cand &= !wb;
            if self.bad[w] & t != 0 {
                banned |= wb;
                continue;
            }
            let nt = t | wb;
            let fresh = self.good[w] & s & !nt & !banned & !cand;
            self.enumerate(s, nt, cand | fresh, banned | wb, out);
            banned |= wb;
        }
    }

    fn collect(&self, s: u32, out: &mut Vec<u32>) {
        if s == 0 {
            return;
        }
        match self.memo.get(&s).map(|&(_, c)| c) {
            Some(Choice::Part(t)) => {
                out.push(t);
                self.collect(s & !t, out);
            }
            Some(Choice::Split) | None => {
                for c in self.components(s) {
                    if c == s {
                        out.push(s);
                    } else {
                        self.collect(c, out);
                    }
                }
            }
        }
    }
}
