//! Improvement-path local search.
//!
//! Each round picks the degree class `k` maximizing `2^k |N_k|` and looks
//! for a child `u` of an `N_k` vertex whose low-degree subtree mass `psi_u`
//! is small enough, and from which a `k`-improvement path leaves `T_u`.
//! Rerouting `T_u` along that path removes one child from `Par(u)` and
//! lowers the base-2 potential by at least `2^(k-2) - psi_u`.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::Float;

use crate::certificate::{extract_local_certificate, BlockingCertificate, CertificateError};
use crate::config::{log2n, Config, Profile};
use crate::graph::Digraph;
use crate::report::{Exit, SolveError};
use crate::tree::{AdjustDelta, AdjustError, InTree};

/// A simple path `u = w_1, ..., w_h = w` that leaves `T_u` exactly at `w`,
/// with every vertex but `u` of degree at most `d - 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovementPath {
    pub d: usize,
    pub vertices: Vec<usize>,
}

impl ImprovementPath {
    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("paths are nonempty")
    }
}

/// Shortest `d`-improvement path from `u`, if one exists.
///
/// Breadth-first over vertices of degree at most `d - 2`, expanding only
/// inside `T_u` and stopping at the first vertex reached outside it.
pub fn find_improvement_path(t: &InTree, g: &Digraph, u: usize, d: usize) -> Option<ImprovementPath> {
    if d < 2 || t.parent(u).is_none() {
        return None;
    }
    let limit = d - 2;
    let inside = t.subtree_mask(u);
    let mut prev = vec![usize::MAX; t.n()];
    prev[u] = u;
    let mut queue = VecDeque::from([u]);
    while let Some(y) = queue.pop_front() {
        for &x in g.out_edges(y) {
            if prev[x] != usize::MAX || t.deg(x) > limit {
                continue;
            }
            prev[x] = y;
            if !inside[x] {
                let mut vertices = vec![x];
                let mut cur = x;
                while cur != u {
                    cur = prev[cur];
                    vertices.push(cur);
                }
                vertices.reverse();
                return Some(ImprovementPath { d, vertices });
            }
            queue.push_back(x);
        }
    }
    None
}

/// Re-checks every defining property of `p` against the current tree.
pub fn check_improvement_path(t: &InTree, g: &Digraph, p: &ImprovementPath) -> Result<(), String> {
    let vs = &p.vertices;
    if vs.len() < 2 {
        return Err("path needs at least two vertices".into());
    }
    if p.d < 2 {
        return Err(format!("degree class {} admits no improvement", p.d));
    }
    let u = vs[0];
    let par = t.parent(u).ok_or("path starts at the sink")?;
    if t.deg(par) != p.d {
        return Err(format!("parent {par} of {u} has degree {}, not {}", t.deg(par), p.d));
    }
    let inside = t.subtree_mask(u);
    let mut seen = vec![false; t.n()];
    for (j, &w) in vs.iter().enumerate() {
        if std::mem::replace(&mut seen[w], true) {
            return Err(format!("vertex {w} repeats"));
        }
        if j > 0 && t.deg(w) + 2 > p.d {
            return Err(format!("vertex {w} has degree {}", t.deg(w)));
        }
        let last = j + 1 == vs.len();
        if inside[w] == last {
            return Err(format!("vertex {w} is on the wrong side of T_{u}"));
        }
    }
    if let Some(w) = vs.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
        return Err(format!("{} -> {} is not an edge", w[0], w[1]));
    }
    Ok(())
}

/// Reroutes `T_u` along `p`: each `w_j` (j < h) takes `w_(j+1)` as parent.
///
/// Applied from the far end back to `u`, so the tree stays valid after
/// every single move.
pub fn apply_improvement_path(t: &mut InTree, g: &Digraph, p: &ImprovementPath) -> Result<AdjustDelta, AdjustError> {
    check_improvement_path(t, g, p).map_err(AdjustError::StalePath)?;
    let vs = &p.vertices;
    let touched = vs
        .iter()
        .copied()
        .chain(vs[..vs.len() - 1].iter().filter_map(|&w| t.parent(w)));
    let rec = AdjustDelta::record(t, touched);
    for j in (0..vs.len() - 1).rev() {
        t.cut_and_append(g, vs[j], vs[j + 1])?;
    }
    if cfg!(debug_assertions) {
        let violations = t.validate(g);
        if !violations.is_empty() {
            return Err(AdjustError::Invalid(violations));
        }
    }
    Ok(rec.finish(t))
}

/// `argmax_d base^d |N_d|` over nonempty classes, ties toward larger `d`.
pub fn choose_k(t: &InTree, base: f64) -> usize {
    choose_k_in(&t.histogram(), base)
}

/// [`choose_k`] over a degree histogram (`hist[d] = |N_d|`).
pub fn choose_k_in(hist: &[usize], base: f64) -> usize {
    let lb = base.ln();
    let mut best: Option<(usize, f64)> = None;
    for (d, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let score = d as f64 * lb + (count as f64).ln();
        match best {
            Some((_, s)) if score < s - 1e-12 * s.abs().max(1.0) => {}
            _ => best = Some((d, score)),
        }
    }
    best.map_or(0, |(d, _)| d)
}

/// `sum of 2^deg(v)` over `v` in `T_u` with `deg(v) <= k - 2`.
pub fn psi(t: &InTree, u: usize, k: usize) -> BigUint {
    t.subtree(u)
        .into_iter()
        .map(|v| t.deg(v))
        .filter(|&d| d + 2 <= k)
        .fold(BigUint::default(), |acc, d| acc + (BigUint::from(1u8) << d))
}

/// Exact test of `psi <= factor * 2^k`.
pub fn gate_admits(psi: &BigUint, factor: f64, k: usize) -> bool {
    let (mantissa, exp, sign) = factor.integer_decode();
    if sign < 0 {
        return false;
    }
    let shift = exp as i64 + k as i64;
    let rhs = BigUint::from(mantissa);
    if shift >= 0 {
        psi <= &(rhs << shift as u64)
    } else {
        (psi << (-shift) as u64) <= rhs
    }
}

/// One applied improvement.
#[derive(Debug, Clone)]
pub struct Improvement {
    pub k: usize,
    pub class_size: usize,
    pub psi: BigUint,
    pub path: ImprovementPath,
    pub delta: AdjustDelta,
    pub potential_before: BigUint,
    pub potential_after: BigUint,
}

impl Improvement {
    pub fn drop(&self) -> BigInt {
        BigInt::from(self.potential_before.clone()) - BigInt::from(self.potential_after.clone())
    }
}

#[derive(Debug, Clone)]
pub enum LocalStep {
    Improved(Improvement),
    Stalled { k: usize },
    BelowThreshold,
}

/// Step-wise driver; [`run_local_search`] loops it to completion.
pub struct LocalSearch<'g> {
    g: &'g Digraph,
    tree: InTree,
    cfg: Config,
}

impl<'g> LocalSearch<'g> {
    pub fn new(g: &'g Digraph, cfg: Config) -> Self {
        Self::from_tree(g, InTree::bfs(g), cfg)
    }

    pub fn from_tree(g: &'g Digraph, tree: InTree, cfg: Config) -> Self {
        LocalSearch { g, tree, cfg }
    }

    pub fn tree(&self) -> &InTree {
        &self.tree
    }

    pub fn into_tree(self) -> InTree {
        self.tree
    }

    pub fn step(&mut self) -> Result<LocalStep, AdjustError> {
        let t = &self.tree;
        if t.max_degree() as f64 <= self.cfg.stop_threshold_local {
            return Ok(LocalStep::BelowThreshold);
        }
        let n = t.n();
        debug_assert!(
            self.cfg.profile != Profile::Paper || 34.0 * log2n(n) < n as f64,
            "paper threshold should have stopped the loop"
        );
        let k = choose_k(t, 2.0);
        let mut candidates: Vec<usize> = t
            .class(k)
            .into_iter()
            .flat_map(|p| t.children(p).iter().copied())
            .collect();
        candidates.sort_unstable();

        for u in candidates {
            let psi_u = psi(&self.tree, u, k);
            if !gate_admits(&psi_u, self.cfg.psi_factor, k) {
                continue;
            }
            let Some(path) = find_improvement_path(&self.tree, self.g, u, k) else {
                continue;
            };
            let class_size = self.tree.class_size(k);
            let potential_before = self.tree.potential_pow2();
            let delta = apply_improvement_path(&mut self.tree, self.g, &path)?;
            let potential_after = self.tree.potential_pow2();
            let imp = Improvement {
                k,
                class_size,
                psi: psi_u,
                path,
                delta,
                potential_before,
                potential_after,
            };
            debug_assert!(
                imp.drop() >= (BigInt::from(1) << (k - 2)) - BigInt::from(imp.psi.clone()),
                "potential drop below 2^(k-2) - psi"
            );
            return Ok(LocalStep::Improved(imp));
        }
        Ok(LocalStep::Stalled { k })
    }
}

#[derive(Debug, Clone)]
pub struct LocalTraceEntry {
    pub iteration: usize,
    pub k: usize,
    pub class_size: usize,
    pub potential_before: BigUint,
    pub potential_after: BigUint,
    pub drop: BigInt,
}

#[derive(Debug, Clone)]
pub struct LocalRun {
    pub tree: InTree,
    pub delta_initial: usize,
    pub potential_initial: BigUint,
    pub trace: Vec<LocalTraceEntry>,
    pub exit: Exit,
    pub certificate: Option<BlockingCertificate>,
}

impl LocalRun {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Runs local search from the BFS tree until it stalls or the maximum
/// degree falls to the configured threshold.
///
/// A stall yields a blocking certificate when one exists; a certificate
/// that fails independent verification aborts the run.
pub fn run_local_search(g: &Digraph, cfg: &Config) -> Result<LocalRun, SolveError> {
    let mut search = LocalSearch::new(g, cfg.clone());
    let delta_initial = search.tree().max_degree();
    let potential_initial = search.tree().potential_pow2();
    let mut trace = Vec::new();
    let exit = loop {
        match search.step()? {
            LocalStep::Improved(imp) => trace.push(LocalTraceEntry {
                iteration: trace.len() + 1,
                k: imp.k,
                class_size: imp.class_size,
                drop: imp.drop(),
                potential_before: imp.potential_before,
                potential_after: imp.potential_after,
            }),
            LocalStep::Stalled { k } => break Exit::Stalled { k },
            LocalStep::BelowThreshold => break Exit::Threshold,
        }
    };
    let tree = search.into_tree();
    let certificate = match exit {
        Exit::Stalled { k } => match extract_local_certificate(&tree, g, k) {
            Ok(cert) => Some(cert.verified_against(g)?),
            Err(CertificateError::EmptyWitness) => None,
        },
        Exit::Threshold => None,
    };
    Ok(LocalRun {
        tree,
        delta_initial,
        potential_initial,
        trace,
        exit,
        certificate,
    })
}
