//! Blocking-set lower bounds on the optimal maximum degree.
//!
//! A pair `(U, B)` blocks when, after deleting `B`, no `u` in `U` can reach
//! the sink and no two members of `U` reach a common vertex. Every spanning
//! in-tree then routes the `|U|` disjoint branches through `B`, so some
//! vertex of `B` has at least `|U| / |B|` children.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{exit_set, LayeredState};
use crate::graph::Digraph;
use crate::local::find_improvement_path;
use crate::report::SolveError;
use crate::tree::InTree;

/// Exact non-negative fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Ratio {
        Ratio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Smallest integer at least this value.
    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }

    /// Whether this value is at most the integer `d`.
    pub fn at_most(self, d: usize) -> bool {
        u128::from(self.num) <= d as u128 * u128::from(self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingCertificate {
    #[serde(rename = "U")]
    pub u: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub k: usize,
    pub bound_num: u64,
    pub bound_den: u64,
    pub verified: bool,
}

impl BlockingCertificate {
    /// Unverified certificate over sorted, deduplicated `u` and `b`.
    pub fn new(mut u: Vec<usize>, mut b: Vec<usize>, k: usize) -> Self {
        u.sort_unstable();
        u.dedup();
        b.sort_unstable();
        b.dedup();
        BlockingCertificate {
            bound_num: u.len() as u64,
            bound_den: b.len() as u64,
            u,
            b,
            k,
            verified: false,
        }
    }

    pub fn bound(&self) -> Ratio {
        Ratio::new(self.bound_num, self.bound_den)
    }

    /// Runs [`verify_blocking`]; a failure is a solver bug and aborts the run.
    pub fn verified_against(mut self, g: &Digraph) -> Result<Self, SolveError> {
        match verify_blocking(g, &self) {
            Ok(()) => {
                self.verified = true;
                Ok(self)
            }
            Err(violation) => {
                log::error!("rejected certificate: {self:?}");
                Err(SolveError::CertificateRejected {
                    violation,
                    certificate: Box::new(self),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockingViolation {
    #[error("EmptyU: the blocked set is empty")]
    EmptyU,
    #[error("EmptyB: the blocking set is empty")]
    EmptyB,
    #[error("OutOfRange: vertex {0} does not exist")]
    OutOfRange(usize),
    #[error("Duplicate: vertex {0} is listed twice")]
    Duplicate(usize),
    #[error("SinkInU: the sink cannot be blocked")]
    SinkInU,
    #[error("Overlap: vertex {0} is in both U and B")]
    Overlap(usize),
    #[error("SinkReachable: {from} reaches the sink avoiding B")]
    SinkReachable { from: usize },
    #[error("SharedReach: {a} and {b} both reach {via} avoiding B")]
    SharedReach { a: usize, b: usize, via: usize },
}

/// Checks both blocking properties in `G - B`, independent of any solver
/// state. Counts in the certificate are not inspected here.
pub fn verify_blocking(g: &Digraph, cert: &BlockingCertificate) -> Result<(), BlockingViolation> {
    check_blocking(g, &cert.u, &cert.b)
}

pub fn check_blocking(g: &Digraph, u: &[usize], b: &[usize]) -> Result<(), BlockingViolation> {
    let n = g.n();
    if u.is_empty() {
        return Err(BlockingViolation::EmptyU);
    }
    if b.is_empty() {
        return Err(BlockingViolation::EmptyB);
    }
    let mut in_b = vec![false; n];
    for &v in b {
        if v >= n {
            return Err(BlockingViolation::OutOfRange(v));
        }
        if std::mem::replace(&mut in_b[v], true) {
            return Err(BlockingViolation::Duplicate(v));
        }
    }
    // owner[v] = index into `u` of the first member reaching v
    let mut owner = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (i, &x) in u.iter().enumerate() {
        if x >= n {
            return Err(BlockingViolation::OutOfRange(x));
        }
        if x == g.sink() {
            return Err(BlockingViolation::SinkInU);
        }
        if in_b[x] {
            return Err(BlockingViolation::Overlap(x));
        }
        if owner[x] != usize::MAX {
            return Err(BlockingViolation::Duplicate(x));
        }
        owner[x] = i;
        queue.push_back(x);
    }
    while let Some(y) = queue.pop_front() {
        let o = owner[y];
        if y == g.sink() {
            return Err(BlockingViolation::SinkReachable { from: u[o] });
        }
        for &x in g.out_edges(y) {
            if in_b[x] {
                continue;
            }
            if owner[x] == usize::MAX {
                owner[x] = o;
                queue.push_back(x);
            } else if owner[x] != o {
                return Err(BlockingViolation::SharedReach {
                    a: u[owner[x].min(o)],
                    b: u[owner[x].max(o)],
                    via: x,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("no vertex qualifies for the blocked set")]
    EmptyWitness,
}

/// Certificate for a stalled local search at class `k`.
///
/// `U` is every member of [`InTree::unrelated_children`] with degree at
/// most `k - 2` that has no `k`-improvement path (retested here without
/// the eligibility gate); `B = S_{k-1}`. Members of degree `k - 1` or more
/// are dropped from `U` because they already sit in `B`.
pub fn extract_local_certificate(
    t: &InTree,
    g: &Digraph,
    k: usize,
) -> Result<BlockingCertificate, CertificateError> {
    if k < 2 {
        return Err(CertificateError::EmptyWitness);
    }
    let w = t
        .unrelated_children(k)
        .map_err(|_| CertificateError::EmptyWitness)?;
    let u: Vec<usize> = w
        .into_iter()
        .filter(|&x| t.deg(x) + 2 <= k && find_improvement_path(t, g, x, k).is_none())
        .collect();
    if u.is_empty() {
        return Err(CertificateError::EmptyWitness);
    }
    let b = t.at_least(k - 1);
    log::debug!(
        "local certificate at k = {k}: |U| = {}, |B| = {}, |N_k| = {}",
        u.len(),
        b.len(),
        t.class_size(k)
    );
    Ok(BlockingCertificate::new(u, b, k))
}

/// Certificate for an augmenting search whose layer growth stopped.
///
/// `U` collects every start vertex of every layer that still has no exit
/// of degree at most `k - 2`; `B` is all layer vertices plus `S_{k+1}`.
pub fn extract_augment_certificate(
    t: &InTree,
    g: &Digraph,
    st: &LayeredState,
) -> Result<BlockingCertificate, CertificateError> {
    let k = st.k;
    let u: Vec<usize> = st
        .levels_u
        .iter()
        .flatten()
        .copied()
        .filter(|&x| {
            exit_set(t, g, x, k)
                .iter()
                .all(|(y, _)| t.deg(*y) + 2 > k)
        })
        .collect();
    if u.is_empty() {
        return Err(CertificateError::EmptyWitness);
    }
    let mut in_u = vec![false; t.n()];
    for &x in &u {
        in_u[x] = true;
    }
    let mut in_layers = vec![false; t.n()];
    for &x in st.levels_v.iter().flatten() {
        in_layers[x] = true;
    }
    let high = t.at_least(k + 1);
    let only_high = high.iter().filter(|&&x| !in_layers[x]).count();
    if only_high > 0 {
        log::debug!("{only_high} blocking vertices come only from S_(k+1)");
    }
    let b: Vec<usize> = st
        .levels_v
        .iter()
        .flatten()
        .copied()
        .chain(high)
        .filter(|&x| !in_u[x])
        .collect();
    Ok(BlockingCertificate::new(u, b, k))
}
