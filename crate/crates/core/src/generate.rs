//! Seeded instance generators. All families use sink 0.
//!
//! Randomness comes from PCG-XSL-RR 128/64 (`Pcg64`) started at
//! `state = PCG_STATE + (seed << 64)`, `stream = PCG_STREAM`. Bounded draws
//! use plain rejection sampling on `next_u64` and shuffles are
//! Fisher-Yates from the back, so any PCG implementation reproduces the
//! same instances.

use std::collections::HashSet;

use rand_core::Rng;
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::graph::Digraph;

pub const PCG_STATE: u128 = 0xcafe_f00d_d15e_a5e5;
pub const PCG_STREAM: u128 = 0x0a02_bdbf_7bb3_c0a7_ac28_fa16_a64a_bf96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("{extra} extra edges requested but only {available} are available on {n} vertices")]
    TooManyEdges { n: usize, extra: usize, available: usize },
    #[error("{0}")]
    Parameter(String),
}

/// Deterministic random source shared by the generators.
pub struct SeededRng(Pcg64);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(Pcg64::new(
            PCG_STATE.wrapping_add(u128::from(seed) << 64),
            PCG_STREAM,
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw from `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "empty range");
        let bound = bound as u64;
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % bound) as usize;
            }
        }
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// `count` distinct elements of `pool`, in draw order.
    pub fn choose<T: Copy>(&mut self, pool: &[T], count: usize) -> Vec<T> {
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        let count = count.min(pool.len());
        for i in 0..count {
            let j = i + self.below(pool.len() - i);
            idx.swap(i, j);
        }
        idx[..count].iter().map(|&i| pool[i]).collect()
    }
}

fn build(n: usize, edges: Vec<(usize, usize)>) -> Digraph {
    Digraph::new(n, 0, edges).expect("generators emit valid graphs")
}

/// Random recursive in-tree toward 0 plus `extra` distinct random edges.
///
/// Vertices join in a shuffled order, each picking a uniformly random
/// parent among those already placed. Extra edges avoid backbone edges,
/// so at most `(n-1)^2` of them fit.
pub fn gen_random(n: usize, extra: usize, seed: u64) -> Result<Digraph, GenError> {
    if n == 0 {
        return Err(GenError::Parameter("n must be at least 1".into()));
    }
    let available = (n - 1) * (n - 1);
    if extra > available {
        return Err(GenError::TooManyEdges { n, extra, available });
    }
    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (1..n).collect();
    rng.shuffle(&mut order);
    order.insert(0, 0);
    let mut parent = vec![0; n];
    for i in 1..n {
        parent[order[i]] = order[rng.below(i)];
    }
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v, parent[v])).collect();
    let backbone: HashSet<(usize, usize)> = edges.iter().copied().collect();

    if extra * 2 > available {
        let mut pool: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !backbone.contains(&(u, v)))
            .collect();
        rng.shuffle(&mut pool);
        edges.extend_from_slice(&pool[..extra]);
    } else {
        let mut taken = backbone;
        while edges.len() < n - 1 + extra {
            let (u, v) = (rng.below(n), rng.below(n));
            if u != v && taken.insert((u, v)) {
                edges.push((u, v));
            }
        }
    }
    Ok(build(n, edges))
}

/// `i -> i-1` for every `i >= 1`.
pub fn gen_path(n: usize) -> Digraph {
    build(n.max(1), (1..n).map(|i| (i, i - 1)).collect())
}

/// `i -> 0` for every `i >= 1`.
pub fn gen_instar(n: usize) -> Digraph {
    build(n.max(1), (1..n).map(|i| (i, 0)).collect())
}

/// Every ordered pair of distinct vertices.
pub fn gen_complete(n: usize) -> Digraph {
    let n = n.max(1);
    build(
        n,
        (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect(),
    )
}

/// A degree-`k` hub whose only escape routes run through degree-`(k-1)`
/// vertices.
///
/// Layout before relabeling (hub = sink):
/// - `k-1` doors, each a leaf child of the hub;
/// - a chain `r1 -> hub`, `r2 -> r1`; `r1` carries `k-2` leaves and `r2`
///   carries `k-1`, so both sit at degree `k-1`;
/// - each door gets `fanout` edges into the chain (at most 2);
/// - each chain leaf gets up to `fanout` edges to other chain leaves whose
///   chain position is not above its own.
///
/// The backward BFS tree is exactly this layout. With base 2 the hub's
/// class ties with the chain and wins, every door sees only degree-`(k-1)`
/// exits, and the chain root's subtree is too heavy for the local gate, so
/// single-path search stalls at degree `k`. A two-segment augmenting path
/// (door into the chain, then a chain leaf into a sibling leaf) lowers the
/// hub's degree. Non-sink labels are shuffled by `seed`.
pub fn gen_blocker(k: usize, fanout: usize, seed: u64) -> Result<Digraph, GenError> {
    if k < 3 {
        return Err(GenError::Parameter(format!("blocker needs k >= 3, got {k}")));
    }
    if fanout == 0 {
        return Err(GenError::Parameter("blocker needs fanout >= 1".into()));
    }
    let mut rng = SeededRng::new(seed);
    // Layout ids: hub 0, doors, r1, r2, leaves of r1, leaves of r2.
    let doors: Vec<usize> = (1..k).collect();
    let (r1, r2) = (k, k + 1);
    let leaves1: Vec<usize> = (k + 2..2 * k).collect();
    let leaves2: Vec<usize> = (2 * k..3 * k - 1).collect();
    let n = 3 * k - 1;

    let mut edges: Vec<(usize, usize)> = doors.iter().map(|&d| (d, 0)).collect();
    edges.push((r1, 0));
    edges.push((r2, r1));
    edges.extend(leaves1.iter().map(|&l| (l, r1)));
    edges.extend(leaves2.iter().map(|&l| (l, r2)));
    for &d in &doors {
        for r in rng.choose(&[r1, r2], fanout) {
            edges.push((d, r));
        }
    }
    let all_leaves: Vec<usize> = leaves1.iter().chain(&leaves2).copied().collect();
    for &l in &all_leaves {
        let pool: Vec<usize> = if leaves1.contains(&l) {
            all_leaves.iter().copied().filter(|&x| x != l).collect()
        } else {
            leaves2.iter().copied().filter(|&x| x != l).collect()
        };
        for x in rng.choose(&pool, fanout) {
            edges.push((l, x));
        }
    }

    let mut label: Vec<usize> = (1..n).collect();
    rng.shuffle(&mut label);
    label.insert(0, 0);
    Ok(build(
        n,
        edges.into_iter().map(|(u, v)| (label[u], label[v])).collect(),
    ))
}
