mod common;

use common::{brute_improvement_hops, corpus, degrees_of};
use dmdst_core::config::log2n;
use dmdst_core::local::{apply_improvement_path, choose_k, find_improvement_path, psi};
use dmdst_core::*;
use num_bigint::BigUint;
use proptest::prelude::*;

proptest! {
    #[test]
    fn path_search_agrees_with_enumeration(n in 2usize..10, extra in 0usize..16, seed: u64) {
        let g = gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap();
        let t = InTree::bfs(&g);
        for u in 0..n {
            let Some(p) = t.parent(u) else { continue };
            let d = t.deg(p);
            let found = find_improvement_path(&t, &g, u, d);
            let brute = brute_improvement_hops(&t, &g, u, d);
            prop_assert_eq!(found.as_ref().map(|p| p.vertices.len() - 1), brute);
        }
    }

    #[test]
    fn psi_matches_subtree_sum(n in 2usize..20, extra in 0usize..30, seed: u64, k in 0usize..8) {
        let g = gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap();
        let t = InTree::bfs(&g);
        for u in 0..n {
            let expect: u64 = (0..n)
                .filter(|&v| common::naive_in_subtree(&t, u, v) && t.deg(v) + 2 <= k)
                .map(|v| 1u64 << t.deg(v))
                .sum();
            prop_assert_eq!(psi(&t, u, k), BigUint::from(expect));
        }
    }

    #[test]
    fn chosen_class_is_near_the_top(n in 2usize..80, extra in 0usize..100, seed: u64) {
        let g = gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap();
        let t = InTree::bfs(&g);
        let k = choose_k(&t, 2.0);
        prop_assert!(k as f64 >= t.max_degree() as f64 - log2n(n));
    }
}

#[test]
fn leaf_psi_and_spec_boundary() {
    let t = InTree::bfs(&gen_instar(5));
    assert_eq!(psi(&t, 1, 3), BigUint::from(1u8));
}

#[test]
fn applied_paths_change_degrees_as_audited() {
    let mut applied = 0;
    for g in corpus(200) {
        let mut t = InTree::bfs(&g);
        for _ in 0..20 {
            let cand = (0..g.n()).find_map(|u| {
                let p = t.parent(u)?;
                find_improvement_path(&t, &g, u, t.deg(p))
            });
            let Some(path) = cand else { break };
            let before = t.degrees();
            let phi_before = t.potential_pow2();
            let delta = apply_improvement_path(&mut t, &g, &path).unwrap();
            let after = t.degrees();
            assert!(t.validate(&g).is_empty());
            for v in 0..g.n() {
                assert_eq!(delta.change_of(v), after[v] as i64 - before[v] as i64);
            }
            let recomputed = num_bigint::BigInt::from(t.potential_pow2()) - num_bigint::BigInt::from(phi_before);
            assert_eq!(delta.potential_change_pow2(), recomputed);
            assert_eq!(degrees_of(t.parents()), after);
            applied += 1;
        }
    }
    assert!(applied > 50, "only {applied} paths applied");
}

#[test]
fn instar_with_hamiltonian_chords_improves() {
    // in-star on 0..8 plus the path 7 -> 6 -> ... -> 1
    let n = 8;
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i, 0)).collect();
    edges.extend((2..n).map(|i| (i, i - 1)));
    let g = Digraph::new(n, 0, edges).unwrap();
    let run = run_local_search(&g, &Config::practical(n)).unwrap();
    assert_eq!(run.delta_initial, n - 1);
    assert!(run.tree.max_degree() < n - 1);
    for e in &run.trace {
        assert!(e.drop >= num_bigint::BigInt::from(1) << (e.k - 3));
    }
}

#[test]
fn local_search_respects_the_oracle() {
    for g in corpus(150) {
        let (opt, _) = exact_min_degree(&g, 12).unwrap();
        let run = run_local_search(&g, &Config::practical(g.n())).unwrap();
        assert!(run.tree.max_degree() >= opt);
        if let Some(c) = &run.certificate {
            assert!(c.verified);
            assert!(c.bound().at_most(opt), "bound {} above optimum {opt}", c.bound());
        }
    }
}

#[test]
fn paper_profile_is_vacuous_on_small_graphs() {
    let g = gen_instar(30);
    let cfg = Config::new(30, Profile::Paper, 0.1).unwrap();
    let run = run_local_search(&g, &cfg).unwrap();
    assert_eq!(run.exit, Exit::Threshold);
    assert_eq!(run.iterations(), 0);
}
