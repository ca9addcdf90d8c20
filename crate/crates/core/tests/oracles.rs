//! Library results against brute-force recomputation.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use engagemap_core::analysis::{category_shares, cluster, mixing_matrix, modularity, Dimension};
use engagemap_core::{build_graph, interaction_community, symmetrize, SymmetrizationMode};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn community_and_graph_match_oracles(seed in any::<u64>(), n in 0usize..120) {
        let a = random_archive(seed, n);
        let c = interaction_community(&a);
        let expected: BTreeSet<_> = oracle_community(&a).into_iter().collect();
        prop_assert_eq!(&c.members, &expected);
        let g = build_graph(&a);
        prop_assert_eq!(&g.nodes, &expected);
        let edges: BTreeSet<_> = oracle_edges(&a).into_iter().collect();
        prop_assert_eq!(&g.edges, &edges);
        prop_assert!(!g.nodes.contains(&a.ego.id));
    }

    #[test]
    fn reported_modularity_matches_double_sum(seed in any::<u64>(), n in 1usize..40, p in 0.0f64..0.4, gamma in 0.5f64..2.0) {
        let ag = random_attributed(seed, n, p);
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let c = cluster(&u, gamma, seed);
        let brute = oracle_modularity(&u, &c.assignment, gamma);
        prop_assert!((c.modularity - brute).abs() < 1e-9, "{} vs {}", c.modularity, brute);
        prop_assert!((modularity(&u, &c.assignment, gamma) - brute).abs() < 1e-9);
    }

    #[test]
    fn shares_and_mixing_are_distributions(seed in any::<u64>(), n in 1usize..40, p in 0.01f64..0.5) {
        let ag = random_attributed(seed, n, p);
        for dim in Dimension::ALL {
            let s = category_shares(&ag, dim);
            let total: f64 = s.entries.iter().map(|e| e.share).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert_eq!(s.entries.iter().map(|e| e.count).sum::<usize>(), n);
            if let Ok(m) = mixing_matrix(&ag, dim) {
                let sum: f64 = m.m.iter().flatten().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&m.assortativity));
            } else {
                prop_assert!(ag.graph.edges.is_empty());
            }
        }
    }
}

#[test]
fn mutual_mode_keeps_only_reciprocated_pairs() {
    for seed in 0..30 {
        let ag = random_attributed(seed, 25, 0.3);
        let mutual = symmetrize(&ag.graph, SymmetrizationMode::Mutual);
        let any = symmetrize(&ag.graph, SymmetrizationMode::Any);
        for (a, b) in &any.edges {
            let both = ag.graph.edges.contains(&(a.clone(), b.clone())) && ag.graph.edges.contains(&(b.clone(), a.clone()));
            assert_eq!(mutual.edges.contains(&(a.clone(), b.clone())), both);
        }
        assert!(mutual.edges.is_subset(&any.edges));
    }
}
