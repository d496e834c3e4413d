//! The maintained spanning in-tree.
//!
//! Every non-sink vertex has exactly one parent, and tree edges point from
//! child to parent along edges of the underlying [`Digraph`]. Degree here
//! always means tree in-degree, i.e. the number of children. The tree keeps
//! a per-degree membership index so that degree classes, the maximum degree
//! and the potential are available without a full scan.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use crate::graph::Digraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("the sink cannot be cut from a parent")]
    CutSink,
    #[error("{v} -> {parent} is not an edge of the graph")]
    NotAnEdge { v: usize, parent: usize },
    #[error("no vertex has tree in-degree {0}")]
    EmptyDegreeClass(usize),
}

/// Failure to apply a path rewrite to the tree.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdjustError {
    #[error("stale path: {0}")]
    StalePath(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("tree invalid after adjustment: {0:?}")]
    Invalid(Vec<Violation>),
}

/// A broken tree invariant. Displayed names are stable and used by the CLI.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("WrongLength: expected {expected} parent entries, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("SinkHasParent: sink {0} has a parent")]
    SinkHasParent(usize),
    #[error("MissingParent: vertex {0} has no parent")]
    MissingParent(usize),
    #[error("ParentOutOfRange: vertex {v} has parent {parent}")]
    ParentOutOfRange { v: usize, parent: usize },
    #[error("NotAnEdge: {v} -> {parent} is not a graph edge")]
    NotAnEdge { v: usize, parent: usize },
    #[error("CycleDetected: parent pointers from {0} never reach the sink")]
    CycleDetected(usize),
    #[error("DegreeMismatch: bookkeeping for vertex {0} is inconsistent")]
    DegreeMismatch(usize),
    #[error("HistogramMismatch: degree classes do not partition the vertices")]
    HistogramMismatch,
    #[error("MaxDegreeMismatch: cached {cached}, actual {actual}")]
    MaxDegreeMismatch { cached: usize, actual: usize },
}

/// Checks a raw parent array (`None` at the sink) against `g`.
pub fn check_parents(g: &Digraph, parents: &[Option<usize>]) -> Vec<Violation> {
    let n = g.n();
    if parents.len() != n {
        return vec![Violation::WrongLength {
            expected: n,
            found: parents.len(),
        }];
    }
    let mut out = Vec::new();
    for (v, &p) in parents.iter().enumerate() {
        match (v == g.sink(), p) {
            (true, Some(_)) => out.push(Violation::SinkHasParent(v)),
            (false, None) => out.push(Violation::MissingParent(v)),
            (false, Some(p)) if p >= n => out.push(Violation::ParentOutOfRange { v, parent: p }),
            (false, Some(p)) if !g.has_edge(v, p) => {
                out.push(Violation::NotAnEdge { v, parent: p })
            }
            _ => {}
        }
    }
    if !out.is_empty() {
        return out;
    }
    // 0 = unvisited, 1 = on the current walk, 2 = reaches the sink
    let mut state = vec![0u8; n];
    state[g.sink()] = 2;
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = parents[v].expect("checked above");
        }
        if state[v] == 1 {
            out.push(Violation::CycleDetected(v));
            return out;
        }
        for w in walk {
            state[w] = 2;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InTree {
    sink: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    // position of v inside children[parent(v)]
    child_slot: Vec<usize>,
    // members[d] = vertices of degree d; member_slot[v] = index of v there
    members: Vec<Vec<usize>>,
    member_slot: Vec<usize>,
    max_deg: usize,
}

impl InTree {
    /// Breadth-first in-tree from the sink over reversed edges; each vertex
    /// takes its BFS predecessor as parent.
    pub fn bfs(g: &Digraph) -> InTree {
        let n = g.n();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[g.sink()] = true;
        let mut queue = VecDeque::from([g.sink()]);
        while let Some(x) = queue.pop_front() {
            for &u in g.in_edges(x) {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(x);
                    queue.push_back(u);
                }
            }
        }
        Self::from_valid_parents(g.sink(), parent)
    }

    /// Builds a tree from a parent array after checking it against `g`.
    pub fn from_parents(g: &Digraph, parents: &[Option<usize>]) -> Result<InTree, Vec<Violation>> {
        let violations = check_parents(g, parents);
        if violations.is_empty() {
            Ok(Self::from_valid_parents(g.sink(), parents.to_vec()))
        } else {
            Err(violations)
        }
    }

    fn from_valid_parents(sink: usize, parent: Vec<Option<usize>>) -> InTree {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut child_slot = vec![0; n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                child_slot[v] = children[p].len();
                children[p].push(v);
            }
        }
        let mut members = vec![Vec::new(); n.max(1)];
        let mut member_slot = vec![0; n];
        let mut max_deg = 0;
        for v in 0..n {
            let d = children[v].len();
            member_slot[v] = members[d].len();
            members[d].push(v);
            max_deg = max_deg.max(d);
        }
        InTree {
            sink,
            parent,
            children,
            child_slot,
            members,
            member_slot,
            max_deg,
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Parent array with `-1` at the sink, as stored in reports.
    pub fn parent_array(&self) -> Vec<i64> {
        self.parent
            .iter()
            .map(|p| p.map_or(-1, |p| p as i64))
            .collect()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn deg(&self, v: usize) -> usize {
        self.children[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.children.iter().map(Vec::len).collect()
    }

    /// Current maximum degree.
    pub fn max_degree(&self) -> usize {
        self.max_deg
    }

    /// `|N_d|`.
    pub fn class_size(&self, d: usize) -> usize {
        self.members.get(d).map_or(0, Vec::len)
    }

    /// Members of `N_d`, ascending.
    pub fn class(&self, d: usize) -> Vec<usize> {
        let mut v = self.members.get(d).cloned().unwrap_or_default();
        v.sort_unstable();
        v
    }

    /// `|N_d|` for `d = 0..=max_degree`.
    pub fn histogram(&self) -> Vec<usize> {
        (0..=self.max_deg).map(|d| self.class_size(d)).collect()
    }

    /// `S_d`: vertices of degree at least `d`, ascending.
    pub fn at_least(&self, d: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (d..=self.max_deg)
            .flat_map(|e| self.members.get(e).into_iter().flatten().copied())
            .collect();
        v.sort_unstable();
        v
    }

    /// Makes `new_parent` the parent of `v`.
    ///
    /// Acyclicity is not checked: multi-step rewrites may pass through
    /// transient states and are validated once they complete.
    pub fn cut_and_append(&mut self, g: &Digraph, v: usize, new_parent: usize) -> Result<(), TreeError> {
        if v == self.sink {
            return Err(TreeError::CutSink);
        }
        if !g.has_edge(v, new_parent) {
            return Err(TreeError::NotAnEdge { v, parent: new_parent });
        }
        let old = self.parent[v].expect("non-sink vertex has a parent");
        if old == new_parent {
            return Ok(());
        }
        // detach from old parent
        let slot = self.child_slot[v];
        let list = &mut self.children[old];
        list.swap_remove(slot);
        if let Some(&moved) = list.get(slot) {
            self.child_slot[moved] = slot;
        }
        let old_deg = self.children[old].len() + 1;
        self.reclassify(old, old_deg);
        // attach to new parent
        self.child_slot[v] = self.children[new_parent].len();
        self.children[new_parent].push(v);
        let d = self.children[new_parent].len();
        self.reclassify(new_parent, d - 1);
        self.parent[v] = Some(new_parent);
        debug_assert!(self.bookkeeping_violations().is_empty());
        Ok(())
    }

    // Moves v from class `from` to its current degree class.
    fn reclassify(&mut self, v: usize, from: usize) {
        let to = self.children[v].len();
        let slot = self.member_slot[v];
        let list = &mut self.members[from];
        list.swap_remove(slot);
        if let Some(&moved) = list.get(slot) {
            self.member_slot[moved] = slot;
        }
        if to >= self.members.len() {
            self.members.resize(to + 1, Vec::new());
        }
        self.member_slot[v] = self.members[to].len();
        self.members[to].push(v);
        if to > self.max_deg {
            self.max_deg = to;
        }
        while self.max_deg > 0 && self.members[self.max_deg].is_empty() {
            self.max_deg -= 1;
        }
    }

    /// Membership mask of the subtree rooted at `u` (including `u`).
    pub fn subtree_mask(&self, u: usize) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for v in self.subtree(u) {
            mask[v] = true;
        }
        mask
    }

    /// Vertices of the subtree rooted at `u`, in preorder.
    pub fn subtree(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Whether `a` lies on the parent chain of `v` (or equals it).
    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        let mut cur = Some(v);
        let mut steps = 0;
        while let Some(x) = cur {
            if x == a {
                return true;
            }
            steps += 1;
            if steps > self.n() {
                return false;
            }
            cur = self.parent[x];
        }
        false
    }

    /// True iff the subtrees of `u` and `v` are disjoint.
    pub fn unrelated(&self, u: usize, v: usize) -> bool {
        !self.is_ancestor(u, v) && !self.is_ancestor(v, u)
    }

    /// Depth of every vertex (sink at 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.n()];
        let mut queue = VecDeque::from([self.sink]);
        while let Some(v) = queue.pop_front() {
            for &c in &self.children[v] {
                depth[c] = depth[v] + 1;
                queue.push_back(c);
            }
        }
        depth
    }

    /// A set of pairwise-unrelated vertices whose parents have degree `d`,
    /// of size at least `(d-1)|N_d| + 1`, ascending.
    ///
    /// Members of `N_d` are added shallowest first (ties by id). Each new
    /// member has no already-processed member below it, so at most one
    /// collected vertex is related to it (an ancestor, or the member
    /// itself); that one is dropped and the member's children are added.
    pub fn unrelated_children(&self, d: usize) -> Result<Vec<usize>, TreeError> {
        if self.class_size(d) == 0 {
            return Err(TreeError::EmptyDegreeClass(d));
        }
        let depth = self.depths();
        let mut order = self.class(d);
        order.sort_by_key(|&v| (depth[v], v));

        let mut in_set = vec![false; self.n()];
        let mut size = 0usize;
        for &u in &order {
            let mut cur = Some(u);
            let mut removed = 0;
            while let Some(x) = cur {
                if in_set[x] {
                    in_set[x] = false;
                    size -= 1;
                    removed += 1;
                }
                cur = self.parent[x];
            }
            debug_assert!(removed <= 1, "two collected vertices were related");
            for &c in &self.children[u] {
                in_set[c] = true;
                size += 1;
            }
        }
        let set: Vec<usize> = (0..self.n()).filter(|&v| in_set[v]).collect();
        debug_assert_eq!(set.len(), size);
        debug_assert!(d == 0 || set.len() >= (d - 1) * order.len() + 1);
        Ok(set)
    }

    /// `sum_v base^deg(v)`, from the degree histogram.
    pub fn potential(&self, base: f64) -> f64 {
        self.histogram()
            .iter()
            .enumerate()
            .map(|(d, &c)| base.powi(d as i32) * c as f64)
            .sum()
    }

    /// Exact base-2 potential `sum_v 2^deg(v)`.
    pub fn potential_pow2(&self) -> BigUint {
        self.histogram()
            .iter()
            .enumerate()
            .fold(BigUint::default(), |acc, (d, &c)| acc + (BigUint::from(c) << d))
    }

    /// All invariant violations of this tree against `g`; empty iff valid.
    pub fn validate(&self, g: &Digraph) -> Vec<Violation> {
        if self.sink != g.sink() {
            return vec![Violation::SinkHasParent(g.sink())];
        }
        let mut out = check_parents(g, &self.parent);
        out.extend(self.bookkeeping_violations());
        out
    }

    fn bookkeeping_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for v in 0..self.n() {
            let d = self.children[v].len();
            let in_class = self
                .members
                .get(d)
                .and_then(|m| m.get(self.member_slot[v]))
                == Some(&v);
            let slot_ok = match self.parent[v] {
                Some(p) => self.children[p].get(self.child_slot[v]) == Some(&v),
                None => true,
            };
            let children_ok = self.children[v].iter().all(|&c| self.parent[c] == Some(v));
            if !in_class || !slot_ok || !children_ok {
                out.push(Violation::DegreeMismatch(v));
            }
        }
        if self.members.iter().map(Vec::len).sum::<usize>() != self.n() {
            out.push(Violation::HistogramMismatch);
        }
        let actual = self.children.iter().map(Vec::len).max().unwrap_or(0);
        if actual != self.max_deg {
            out.push(Violation::MaxDegreeMismatch {
                cached: self.max_deg,
                actual,
            });
        }
        out
    }
}

/// One vertex whose degree changed during an adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeChange {
    pub vertex: usize,
    pub before: usize,
    pub after: usize,
}

impl DegreeChange {
    pub fn diff(&self) -> i64 {
        self.after as i64 - self.before as i64
    }
}

/// Degree changes caused by one tree adjustment, ascending by vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdjustDelta {
    pub changes: Vec<DegreeChange>,
}

impl AdjustDelta {
    /// Records degrees of `touched` before a rewrite; call
    /// [`DeltaRecorder::finish`] afterwards.
    pub fn record(tree: &InTree, touched: impl IntoIterator<Item = usize>) -> DeltaRecorder {
        let mut vs: Vec<usize> = touched.into_iter().collect();
        vs.sort_unstable();
        vs.dedup();
        let before = vs.iter().map(|&v| tree.deg(v)).collect();
        DeltaRecorder { vertices: vs, before }
    }

    pub fn change_of(&self, v: usize) -> i64 {
        self.changes
            .binary_search_by_key(&v, |c| c.vertex)
            .map_or(0, |i| self.changes[i].diff())
    }

    /// Exact change of the base-2 potential.
    pub fn potential_change_pow2(&self) -> BigInt {
        self.changes.iter().fold(BigInt::default(), |acc, c| {
            acc + (BigInt::from(1) << c.after) - (BigInt::from(1) << c.before)
        })
    }

    pub fn potential_change(&self, base: f64) -> f64 {
        self.changes
            .iter()
            .map(|c| base.powi(c.after as i32) - base.powi(c.before as i32))
            .sum()
    }
}

pub struct DeltaRecorder {
    vertices: Vec<usize>,
    before: Vec<usize>,
}

impl DeltaRecorder {
    pub fn finish(self, tree: &InTree) -> AdjustDelta {
        let changes = self
            .vertices
            .iter()
            .zip(self.before)
            .filter_map(|(&vertex, before)| {
                let after = tree.deg(vertex);
                (after != before).then_some(DegreeChange {
                    vertex,
                    before,
                    after,
                })
            })
            .collect();
        AdjustDelta { changes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_complete, gen_instar, gen_path, gen_random};

    fn path3() -> Digraph {
        Digraph::new(3, 0, [(1, 0), (2, 1), (2, 0)]).unwrap()
    }

    #[test]
    fn bfs_on_path() {
        let g = gen_path(3);
        let t = InTree::bfs(&g);
        assert_eq!(t.parents(), &[None, Some(0), Some(1)]);
        assert_eq!(t.degrees(), vec![1, 1, 0]);
        assert_eq!(t.max_degree(), 1);
        assert!(t.validate(&g).is_empty());
    }

    #[test]
    fn bfs_on_instar_and_complete() {
        let t = InTree::bfs(&gen_instar(6));
        assert_eq!(t.deg(0), 5);
        assert_eq!(t.max_degree(), 5);
        let g = gen_complete(4);
        let t = InTree::bfs(&g);
        assert!(t.max_degree() <= 3);
        assert!(t.validate(&g).is_empty());
    }

    #[test]
    fn cut_and_append_moves_one_child() {
        let g = path3();
        let mut t = InTree::from_parents(&g, &[None, Some(0), Some(1)]).unwrap();
        t.cut_and_append(&g, 2, 0).unwrap();
        assert_eq!(t.parents(), &[None, Some(0), Some(0)]);
        assert_eq!(t.degrees(), vec![2, 0, 0]);
        assert_eq!(t.max_degree(), 2);
        assert_eq!(t.histogram(), vec![2, 0, 1]);
        assert!(t.validate(&g).is_empty());
        assert_eq!(t.cut_and_append(&g, 0, 1), Err(TreeError::CutSink));
        assert_eq!(
            t.cut_and_append(&g, 1, 2),
            Err(TreeError::NotAnEdge { v: 1, parent: 2 })
        );
    }

    #[test]
    fn subtree_queries() {
        let g = gen_path(4);
        let t = InTree::bfs(&g);
        assert_eq!(t.subtree(3), vec![3]);
        let mut all = t.subtree(0);
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(!t.unrelated(2, 2));
        assert!(!t.unrelated(1, 3));
        let star = InTree::bfs(&gen_instar(4));
        assert!(star.unrelated(1, 2));
    }

    #[test]
    fn detects_two_cycle() {
        let g = Digraph::new(3, 0, [(1, 0), (1, 2), (2, 1)]).unwrap();
        let v = check_parents(&g, &[None, Some(2), Some(1)]);
        assert!(matches!(v[..], [Violation::CycleDetected(_)]));
        let v = check_parents(&g, &[None, Some(0), Some(0)]);
        assert_eq!(v, vec![Violation::NotAnEdge { v: 2, parent: 0 }]);
    }

    #[test]
    fn potential_examples() {
        let star = InTree::bfs(&gen_instar(4));
        assert_eq!(star.potential(2.0), 11.0);
        assert_eq!(star.potential_pow2(), BigUint::from(11u32));
        let path = InTree::bfs(&gen_path(3));
        assert_eq!(path.potential(2.0), 5.0);
    }

    #[test]
    fn unrelated_children_basis() {
        // r = 0 with children 1, 2
        let g = Digraph::new(3, 0, [(1, 0), (2, 0)]).unwrap();
        let t = InTree::bfs(&g);
        assert_eq!(t.unrelated_children(2).unwrap(), vec![1, 2]);
        assert_eq!(t.unrelated_children(5), Err(TreeError::EmptyDegreeClass(5)));
    }

    #[test]
    fn unrelated_children_nested() {
        // 0 has children 1, 2; 1 has children 3, 4: both 0 and 1 are in N_2
        let g = Digraph::new(5, 0, [(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap();
        let t = InTree::bfs(&g);
        let w = t.unrelated_children(2).unwrap();
        assert_eq!(w, vec![2, 3, 4]);
        // d = 1 on a path
        let t = InTree::bfs(&gen_path(4));
        assert!(!t.unrelated_children(1).unwrap().is_empty());
    }

    #[test]
    fn random_tree_bookkeeping_survives_moves() {
        let g = gen_random(30, 120, 9).unwrap();
        let mut t = InTree::bfs(&g);
        let mut moves = 0;
        for v in 1..30 {
            for &p in g.out_edges(v) {
                // only moves that keep the tree acyclic
                if !t.is_ancestor(v, p) {
                    t.cut_and_append(&g, v, p).unwrap();
                    moves += 1;
                    assert!(t.validate(&g).is_empty());
                }
            }
        }
        assert!(moves > 0);
    }
}
