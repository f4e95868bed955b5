//! Randomized invariants of both constructions.

use proptest::prelude::*;

use streamspan::graph_io::EdgeStream;
use streamspan::incremental::SpannerState;
use streamspan::model::{Edge, SamplingHierarchy};
use streamspan::streamsort::spanner::{run, RunOptions};
use streamspan::verifier::{check_cluster_radius, check_property_p, check_removed_edges, check_stretch};

/// Small multigraphs with possible duplicates, in arbitrary order.
fn arb_graph() -> impl Strategy<Value = EdgeStream> {
    (2usize..24).prop_flat_map(|n| {
        let edge = (1..=n as u32, 1..=n as u32, 1u32..20)
            .prop_filter("no self-loops", |(u, v, _)| u != v)
            .prop_map(|(u, v, w)| Edge::new(u, v, w as f64));
        prop::collection::vec(edge, 0..120).prop_map(move |edges| EdgeStream::new(n, true, edges))
    })
}

fn unit(g: &EdgeStream) -> EdgeStream {
    EdgeStream::new(g.n, false, g.iter().map(|e| Edge::unit(e.u, e.v)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn single_pass_is_a_spanner_at_every_step(g in arb_graph(), k in 1u32..5, seed in any::<u64>()) {
        let g = unit(&g);
        let h = SamplingHierarchy::build(g.n, k, seed).unwrap();
        let mut s = SpannerState::new(h).with_invariant_checks(true);
        for (i, e) in g.iter().enumerate() {
            s.process_edge(e).unwrap();
            if i % 10 == 9 {
                let r = check_stretch(g.n, &g.edges[..=i], &s.spanner_edges(), (2 * k - 1) as f64).unwrap();
                prop_assert!(r.passed(), "{r:?}");
            }
        }
        s.check().unwrap();
        prop_assert!(check_cluster_radius(&s).passed());
        prop_assert!(s.hook_edge_count() <= g.n * (k as usize - 1));
        let r = check_stretch(g.n, &g.edges, &s.spanner_edges(), (2 * k - 1) as f64).unwrap();
        prop_assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sorted_weighted_stretch(g in arb_graph(), k in 1u32..5, seed in any::<u64>()) {
        let mut edges = g.edges.clone();
        edges.sort_by(|a, b| a.w.total_cmp(&b.w));
        let h = SamplingHierarchy::build(g.n, k, seed).unwrap();
        let mut s = SpannerState::new(h).with_invariant_checks(true);
        s.process_sorted(edges.iter().copied()).unwrap();
        let r = check_stretch(g.n, &edges, &s.spanner_edges(), (2 * k - 1) as f64).unwrap();
        prop_assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn streamsort_stretch_passes_and_removals(g in arb_graph(), k in 1u32..5, seed in any::<u64>()) {
        let out = run(k, seed, &g, &RunOptions { snapshots: true, ..Default::default() }).unwrap();
        let r = check_stretch(g.n, &g.edges, &out.spanner, (2 * k - 1) as f64).unwrap();
        prop_assert!(r.passed(), "{r:?}");
        prop_assert_eq!(out.accounting.total_passes(), 10 * k as usize - 3);
        prop_assert!(out.accounting.max_state_records <= 4);
        prop_assert!(check_property_p(g.n, &out.snapshots, &out.emitted).passed());
        prop_assert!(check_removed_edges(g.n, &out.removed, &out.spanner).unwrap().passed());
        let distinct = g.distinct_edges();
        prop_assert!(out.spanner.iter().all(|e| distinct.contains(e)));
    }

    #[test]
    fn k1_is_identity_on_distinct_edges(g in arb_graph(), seed in any::<u64>()) {
        let h = SamplingHierarchy::build(g.n, 1, seed).unwrap();
        let mut s = SpannerState::new(h);
        for e in g.iter() {
            s.process_edge(e).unwrap();
        }
        // unweighted algorithm: same vertex pairs
        let keys = |v: Vec<Edge>| v.iter().map(Edge::key).collect::<Vec<_>>();
        prop_assert_eq!(keys(s.spanner_edges()), keys(g.distinct_edges()));
        prop_assert_eq!(run(1, seed, &g, &RunOptions::default()).unwrap().spanner, g.distinct_edges());
    }
}

#[test]
fn out_of_order_weight_is_rejected_mid_stream() {
    let h = SamplingHierarchy::build(4, 2, 0).unwrap();
    let mut s = SpannerState::new(h);
    let err = s.process_sorted([Edge::new(1, 2, 1.0), Edge::new(2, 3, 2.0), Edge::new(3, 4, 1.5)]).unwrap_err();
    assert!(matches!(err, streamspan::Error::WeightOrder { position: 3, .. }), "{err}");
}
