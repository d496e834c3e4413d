mod common;

use common::{brute_exits, corpus, naive_in_subtree};
use dmdst_core::augment::*;
use dmdst_core::certificate::{extract_augment_certificate, verify_blocking};
use dmdst_core::*;
use proptest::prelude::*;

/// Hub 0 of degree 3 with doors 1, 2 and the chain 3 -> 0, 4 -> 3; leaf 5
/// under 3, leaves 6, 7 under 4. Doors see only the chain; leaf 5 can
/// escape to 6 and 6 to 7 when `escapes` is set.
fn chain_fixture(escapes: bool) -> Digraph {
    let mut edges = vec![(1, 0), (2, 0), (3, 0), (4, 3), (5, 3), (6, 4), (7, 4), (1, 3), (2, 4)];
    if escapes {
        edges.extend([(5, 6), (6, 7)]);
    }
    Digraph::new(8, 0, edges).unwrap()
}

proptest! {
    #[test]
    fn exit_set_agrees_with_enumeration(n in 2usize..10, extra in 0usize..16, seed: u64) {
        let g = gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap();
        let t = InTree::bfs(&g);
        for u in 0..n {
            let exits = exit_set(&t, &g, u, 100);
            for (x, path) in &exits {
                prop_assert_eq!(path.first(), Some(&u));
                prop_assert_eq!(path.last(), Some(x));
                prop_assert!(path.windows(2).all(|w| g.has_edge(w[0], w[1])));
                prop_assert!(path[..path.len() - 1].iter().all(|&w| naive_in_subtree(&t, u, w)));
            }
            let mut got: Vec<(usize, usize)> = exits.iter().map(|(x, p)| (*x, p.len() - 1)).collect();
            got.sort_unstable();
            prop_assert_eq!(got, brute_exits(&t, &g, u));
        }
    }

    #[test]
    fn eligibility_matches_recomputation(n in 3usize..25, extra in 0usize..40, seed: u64) {
        let g = gen_random(n, extra.min((n - 1) * (n - 1)), seed).unwrap();
        let t = InTree::bfs(&g);
        let cfg = Config::practical(n);
        for k in 1..=t.max_degree() {
            if t.class_size(k) == 0 {
                continue;
            }
            let st = LayeredState::new(&t, k);
            let got = eligible_starts(&t, &st, 1, &cfg);
            let bound = cfg.efficiency_bound(k, 1);
            let expect: Vec<usize> = (0..n)
                .filter(|&u| t.parent(u).is_some_and(|p| t.deg(p) == k))
                .filter(|&u| {
                    let sub: Vec<usize> = (0..n).filter(|&v| naive_in_subtree(&t, u, v)).collect();
                    sub.iter().all(|&v| t.deg(v) + 2 < k)
                        && sub.iter().map(|&v| cfg.base_c.powi(t.deg(v) as i32)).sum::<f64>() <= bound
                })
                .collect();
            prop_assert_eq!(got, expect);
        }
    }
}

#[test]
fn two_segment_fixture() {
    let g = chain_fixture(true);
    let cfg = Config::practical(8);
    let t = InTree::bfs(&g);
    assert_eq!(t.parents(), &[None, Some(0), Some(0), Some(0), Some(3), Some(3), Some(4), Some(4)]);
    let mut search = AugmentingSearch::from_tree(&g, t, cfg.clone());
    let AugmentStep::Augmented(a) = search.step().unwrap() else {
        panic!("expected an augmentation");
    };
    assert_eq!(a.k, 3);
    assert_eq!(a.path.segments, vec![vec![1, 3], vec![5, 6]]);
    assert_eq!(a.histogram_before, vec![5, 0, 2, 1]);
    assert_eq!(a.histogram_after, vec![4, 1, 3]);
    assert_eq!(search.tree().degrees(), vec![2, 0, 0, 2, 2, 0, 1, 0]);
    assert!(audit_class_sizes(&a.histogram_before, &a.histogram_after, 3).is_ok());
    assert!(a.potential_change < 0.0);
}

#[test]
fn reconstructed_fixture_path_validates() {
    let g = chain_fixture(true);
    let cfg = Config::practical(8);
    let t = InTree::bfs(&g);
    let mut st = LayeredState::new(&t, 3);
    let u1 = eligible_starts(&t, &st, 1, &cfg);
    assert_eq!(u1, vec![1, 2]);
    st.levels_u.push(u1);
    assert_eq!(extend_layer(&t, &g, &mut st, 1), LayerOutcome::LayerComplete(vec![3, 4]));
    assert_eq!(st.pred(3), Some(&(1, vec![1, 3])));
    let u2 = eligible_starts(&t, &st, 2, &cfg);
    assert_eq!(u2, vec![5, 6, 7]);
    st.levels_u.push(u2);
    let LayerOutcome::FoundEndpoint { u, x, path } = extend_layer(&t, &g, &mut st, 2) else {
        panic!("expected an endpoint");
    };
    assert_eq!((u, x), (5, 6));
    let p = reconstruct_path(&t, &g, &st, 2, u, path, &cfg).unwrap();
    assert!(check_augmenting_path(&t, &g, &p, &cfg).is_ok());
    // breaking property (i) is caught
    let mut bad = p.clone();
    bad.segments[1] = vec![6, 7];
    assert!(check_augmenting_path(&t, &g, &bad, &cfg).is_err());
}

#[test]
fn blocked_fixture_yields_certificate() {
    let g = chain_fixture(false);
    let cfg = Config::practical(8);
    let mut search = AugmentingSearch::new(&g, cfg);
    let AugmentStep::Stalled { k, state, layers } = search.step().unwrap() else {
        panic!("expected a stall");
    };
    assert_eq!(k, 3);
    assert_eq!(layers.len(), 2);
    let cert = extract_augment_certificate(search.tree(), &g, &state).unwrap();
    assert_eq!(cert.u, vec![1, 2, 5, 6, 7]);
    assert_eq!(cert.b, vec![0, 3, 4]);
    assert_eq!((cert.bound_num, cert.bound_den), (5, 3));
    assert!(verify_blocking(&g, &cert).is_ok());
    // every door choice overloads the hub or a chain vertex
    assert_eq!(exact_min_degree(&g, 12).unwrap().0, 3);
}

#[test]
fn blocker_family_separates_the_solvers() {
    for seed in 0..20 {
        let g = gen_blocker(3, 2, seed).unwrap();
        let cfg = Config::practical(g.n());
        let local = run_local_search(&g, &cfg).unwrap();
        let aug = run_augmenting_search(&g, &cfg).unwrap();
        assert_eq!(local.tree.max_degree(), 3);
        assert_eq!(local.exit, Exit::Stalled { k: 3 });
        assert_eq!(aug.tree.max_degree(), 2);
        assert!(aug.max_layers() >= 2);
        assert_eq!(exact_min_degree(&g, 12).unwrap().0, 2);
    }
}

#[test]
fn augmenting_respects_the_oracle_and_bounds() {
    for g in corpus(150) {
        let (opt, _) = exact_min_degree(&g, 12).unwrap();
        let cfg = Config::practical(g.n());
        let run = run_augmenting_search(&g, &cfg).unwrap();
        assert!(run.tree.max_degree() >= opt);
        assert!(run.tree.max_degree() <= run.delta_initial);
        if let Some(c) = &run.certificate {
            assert!(c.bound().at_most(opt), "bound {} above optimum {opt}", c.bound());
        }
        let limit = 10.0 / cfg.epsilon * dmdst_core::config::log2n(g.n());
        assert!(run.max_layers() as f64 <= limit);
        let mut last = run.potential_initial;
        for e in &run.trace {
            assert!(e.potential_after < last);
            last = e.potential_after;
        }
    }
}
