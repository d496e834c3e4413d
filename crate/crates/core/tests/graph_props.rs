use dmdst_core::graph::unreachable_vertices;
use dmdst_core::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialize_round_trips(n in 1usize..60, extra_frac in 0.0f64..1.0, seed: u64) {
        let extra = ((n - 1) * (n - 1)) as f64 * extra_frac * 0.3;
        let g = gen_random(n, extra as usize, seed).unwrap();
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn generators_are_valid_and_deterministic(n in 1usize..40, extra in 0usize..80, seed: u64) {
        let extra = extra.min((n - 1) * (n - 1));
        let a = gen_random(n, extra, seed).unwrap();
        prop_assert!(a.unreachable_from_sink().is_empty());
        prop_assert_eq!(a.m(), n - 1 + extra);
        prop_assert_eq!(serialize_graph(&a), serialize_graph(&gen_random(n, extra, seed).unwrap()));
    }

    #[test]
    fn blockers_are_valid(k in 3usize..9, fanout in 1usize..4, seed: u64) {
        let g = gen_blocker(k, fanout, seed).unwrap();
        prop_assert_eq!(g.n(), 3 * k - 1);
        prop_assert_eq!(serialize_graph(&g), serialize_graph(&gen_blocker(k, fanout, seed).unwrap()));
        let t = InTree::bfs(&g);
        prop_assert_eq!(t.max_degree(), k);
        prop_assert_eq!(t.class_size(k), 1);
        prop_assert_eq!(t.class_size(k - 1), 2);
    }
}

#[test]
fn seed_42_round_trip() {
    let g = gen_random(50, 100, 42).unwrap();
    assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
}

#[test]
fn isolated_vertex_is_reported() {
    assert_eq!(unreachable_vertices(3, 0, &[(1, 0)]), vec![2]);
    assert!(unreachable_vertices(3, 0, &[(1, 0), (2, 1)]).is_empty());
}

#[test]
fn error_lines_are_named() {
    let err = parse_graph("dmdst 1\n3 2 0\n1 0\n2 2\n").unwrap_err();
    assert_eq!(err.to_string(), "self-loop on vertex 2 (line 4)");
    let err = parse_graph("dmdst 1\n3 2 0\n1 0\n1 0\n").unwrap_err();
    assert_eq!(err.to_string(), "duplicate edge 1 -> 0 (line 4)");
    let err = parse_graph("dmdst 1\n3 1 0\n1 0\n").unwrap_err();
    assert_eq!(err, GraphError::SinkUnreachableFrom(2));
}
