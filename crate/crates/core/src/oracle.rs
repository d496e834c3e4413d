//! Exact answers for small instances: the optimal maximum degree by
//! backtracking, and exhaustive enumeration of spanning in-trees.

use thiserror::Error;

use crate::graph::Digraph;
use crate::tree::InTree;

pub const DEFAULT_EXACT_LIMIT: usize = 12;
pub const ENUMERATION_LIMIT: usize = 9;
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} vertices, oracle limit is {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("more than {cap} spanning in-trees")]
    CapExceeded { cap: usize },
}

/// Whether `v` taking `p` as parent closes a cycle among assigned vertices.
fn closes_cycle(parent: &[Option<usize>], sink: usize, v: usize, p: usize) -> bool {
    let mut cur = p;
    loop {
        if cur == v {
            return true;
        }
        if cur == sink {
            return false;
        }
        match parent[cur] {
            Some(next) => cur = next,
            None => return false,
        }
    }
}

struct Feasibility<'g> {
    g: &'g Digraph,
    bound: usize,
    parent: Vec<Option<usize>>,
    load: Vec<usize>,
}

impl Feasibility<'_> {
    fn options(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.g
            .out_edges(v)
            .iter()
            .copied()
            .filter(move |&p| self.load[p] < self.bound && !closes_cycle(&self.parent, self.g.sink(), v, p))
    }

    fn search(&mut self) -> bool {
        let sink = self.g.sink();
        // most constrained unassigned vertex first
        let mut pick: Option<(usize, usize)> = None;
        for v in 0..self.g.n() {
            if v == sink || self.parent[v].is_some() {
                continue;
            }
            let count = self.options(v).count();
            if count == 0 {
                return false;
            }
            if pick.is_none_or(|(_, best)| count < best) {
                pick = Some((v, count));
            }
        }
        let Some((v, _)) = pick else {
            return true;
        };
        let choices: Vec<usize> = self.options(v).collect();
        for p in choices {
            self.parent[v] = Some(p);
            self.load[p] += 1;
            if self.search() {
                return true;
            }
            self.load[p] -= 1;
            self.parent[v] = None;
        }
        false
    }
}

/// Spanning in-tree with every vertex having at most `bound` children.
pub fn tree_with_max_degree(g: &Digraph, bound: usize) -> Option<Vec<Option<usize>>> {
    let mut f = Feasibility {
        g,
        bound,
        parent: vec![None; g.n()],
        load: vec![0; g.n()],
    };
    f.search().then_some(f.parent)
}

/// Optimal maximum degree and a tree attaining it, for `n <= limit`.
pub fn exact_min_degree(g: &Digraph, limit: usize) -> Result<(usize, InTree), OracleError> {
    let n = g.n();
    if n > limit {
        return Err(OracleError::TooLarge { n, limit });
    }
    if n == 1 {
        return Ok((0, InTree::bfs(g)));
    }
    let (mut lo, mut hi) = (1, n - 1);
    let mut best = tree_with_max_degree(g, hi).expect("any spanning tree has degree <= n - 1");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match tree_with_max_degree(g, mid) {
            Some(parents) => {
                best = parents;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let tree = InTree::from_parents(g, &best).expect("oracle builds valid trees");
    debug_assert_eq!(tree.max_degree(), lo);
    Ok((lo, tree))
}

/// Calls `visit` with the parent array of every spanning in-tree, in
/// lexicographic order of out-edge positions by ascending vertex id.
/// Returns the number of trees.
pub fn for_each_spanning_intree<F>(g: &Digraph, cap: usize, mut visit: F) -> Result<usize, OracleError>
where
    F: FnMut(&[Option<usize>]),
{
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let order: Vec<usize> = (0..n).filter(|&v| v != g.sink()).collect();
    let mut parent = vec![None; n];
    let mut count = 0;
    enumerate(g, &order, 0, &mut parent, &mut count, cap, &mut visit)?;
    Ok(count)
}

fn enumerate<F>(
    g: &Digraph,
    order: &[usize],
    idx: usize,
    parent: &mut [Option<usize>],
    count: &mut usize,
    cap: usize,
    visit: &mut F,
) -> Result<(), OracleError>
where
    F: FnMut(&[Option<usize>]),
{
    let Some(&v) = order.get(idx) else {
        if *count == cap {
            return Err(OracleError::CapExceeded { cap });
        }
        *count += 1;
        visit(parent);
        return Ok(());
    };
    for &p in g.out_edges(v) {
        if closes_cycle(parent, g.sink(), v, p) {
            continue;
        }
        parent[v] = Some(p);
        enumerate(g, order, idx + 1, parent, count, cap, visit)?;
        parent[v] = None;
    }
    Ok(())
}

/// Every spanning in-tree of `g`, for `n <= 9` and at most `cap` trees.
pub fn enumerate_spanning_intrees(g: &Digraph, cap: usize) -> Result<Vec<InTree>, OracleError> {
    let mut out = Vec::new();
    for_each_spanning_intree(g, cap, |parents| {
        out.push(InTree::from_parents(g, parents).expect("enumeration yields valid trees"));
    })?;
    Ok(out)
}
