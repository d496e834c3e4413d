//! Brute-force reference implementations used by the property tests.
#![allow(dead_code)]

use dmdst_core::{gen_random, Digraph, InTree};

/// Small random corpus: `n` in 4..=9, up to 12 extra edges.
pub fn corpus(count: u64) -> Vec<Digraph> {
    (0..count)
        .map(|seed| {
            let n = 4 + (seed % 6) as usize;
            let extra = ((seed * 7) % 13) as usize;
            gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap()
        })
        .collect()
}

/// `v` is in `T_u` iff walking parents from `v` meets `u`.
pub fn naive_in_subtree(t: &InTree, u: usize, v: usize) -> bool {
    let mut cur = Some(v);
    while let Some(x) = cur {
        if x == u {
            return true;
        }
        cur = t.parent(x);
    }
    false
}

pub fn naive_subtree(t: &InTree, u: usize) -> Vec<usize> {
    (0..t.n()).filter(|&v| naive_in_subtree(t, u, v)).collect()
}

pub fn naive_unrelated(t: &InTree, a: usize, b: usize) -> bool {
    (0..t.n()).all(|v| !(naive_in_subtree(t, a, v) && naive_in_subtree(t, b, v)))
}

/// Hop count of the shortest simple path `u = w_1 .. w_h` with every vertex
/// after `u` of degree at most `d - 2`, interior vertices in `T_u`, and
/// `w_h` the first vertex outside `T_u`. Exhaustive DFS.
pub fn brute_improvement_hops(t: &InTree, g: &Digraph, u: usize, d: usize) -> Option<usize> {
    if d < 2 {
        return None;
    }
    let mut best = None;
    let mut on_path = vec![false; t.n()];
    on_path[u] = true;
    dfs_paths(t, g, u, u, 1, &mut on_path, &mut |x, hops| {
        if t.deg(x) + 2 <= d {
            best = Some(best.map_or(hops, |b: usize| b.min(hops)));
        }
    }, &|x| t.deg(x) + 2 <= d);
    best
}

/// Every vertex outside `T_u` reachable by a simple path whose interior
/// lies in `T_u`, with its fewest hop count. Exhaustive DFS.
pub fn brute_exits(t: &InTree, g: &Digraph, u: usize) -> Vec<(usize, usize)> {
    let mut best = vec![usize::MAX; t.n()];
    let mut on_path = vec![false; t.n()];
    on_path[u] = true;
    dfs_paths(t, g, u, u, 1, &mut on_path, &mut |x, hops| {
        best[x] = best[x].min(hops);
    }, &|_| true);
    let mut out: Vec<_> = best
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != usize::MAX)
        .map(|(x, &h)| (x, h))
        .collect();
    out.sort_unstable();
    out
}

fn dfs_paths(
    t: &InTree,
    g: &Digraph,
    u: usize,
    at: usize,
    hops: usize,
    on_path: &mut [bool],
    exit: &mut dyn FnMut(usize, usize),
    allowed: &dyn Fn(usize) -> bool,
) {
    for &x in g.out_edges(at) {
        if on_path[x] || !allowed(x) {
            continue;
        }
        if !naive_in_subtree(t, u, x) {
            exit(x, hops);
            continue;
        }
        on_path[x] = true;
        dfs_paths(t, g, u, x, hops + 1, on_path, exit, allowed);
        on_path[x] = false;
    }
}

/// Number of spanning in-trees toward the sink by the directed matrix-tree
/// theorem: determinant of the out-degree Laplacian with the sink's row
/// and column removed (fraction-free Gaussian elimination).
pub fn matrix_tree_count(g: &Digraph) -> i128 {
    let verts: Vec<usize> = (0..g.n()).filter(|&v| v != g.sink()).collect();
    let pos = |v: usize| verts.iter().position(|&x| x == v);
    let m = verts.len();
    if m == 0 {
        return 1;
    }
    let mut a = vec![vec![0i128; m]; m];
    for (i, &v) in verts.iter().enumerate() {
        a[i][i] = g.out_edges(v).len() as i128;
        for &w in g.out_edges(v) {
            if let Some(j) = pos(w) {
                a[i][j] -= 1;
            }
        }
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..m {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..m).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..m {
            for j in k + 1..m {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[m - 1][m - 1]
}

/// Degrees of the tree described by a parent array.
pub fn degrees_of(parents: &[Option<usize>]) -> Vec<usize> {
    let mut deg = vec![0; parents.len()];
    for p in parents.iter().flatten() {
        deg[*p] += 1;
    }
    deg
}
