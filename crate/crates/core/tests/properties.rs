//! Structural invariants of clustering and layout.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::*;
use engagemap_core::analysis::{cluster, modularity};
use engagemap_core::layout::layout;
use engagemap_core::{symmetrize, SymmetrizationMode};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clustering_is_canonical_and_no_worse_than_lumping(seed in any::<u64>(), n in 1usize..50, p in 0.0f64..0.4) {
        let ag = random_attributed(seed, n, p);
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let c = cluster(&u, 1.0, seed);
        prop_assert_eq!(c.assignment.len(), n);
        let sizes = c.sizes();
        prop_assert!(sizes.iter().all(|&s| s > 0));
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
        // equal-size clusters ordered by smallest member
        let mut first: BTreeMap<usize, &engagemap_core::AccountId> = BTreeMap::new();
        for (id, &l) in &c.assignment {
            first.entry(l).or_insert(id);
        }
        for l in 1..sizes.len() {
            if sizes[l] == sizes[l - 1] {
                prop_assert!(first[&(l - 1)] < first[&l]);
            }
        }
        let touched: BTreeSet<_> = u.edges.iter().flat_map(|(a, b)| [a, b]).collect();
        let lumped: BTreeMap<_, _> = u.nodes.iter().enumerate().map(|(i, id)| {
            (id.clone(), if touched.contains(id) { 0 } else { i + 1 })
        }).collect();
        prop_assert!(c.modularity >= modularity(&u, &lumped, 1.0) - 1e-12);
        prop_assert_eq!(&cluster(&u, 1.0, seed), &c);
    }

    #[test]
    fn layout_is_finite_distinct_and_normalized(seed in any::<u64>(), n in 1usize..40, p in 0.0f64..0.3) {
        let ag = random_attributed(seed, n, p);
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let l = layout(&u, seed, 40);
        prop_assert_eq!(l.positions.len(), n);
        let mut seen = BTreeSet::new();
        for &(x, y) in l.positions.values() {
            prop_assert!(x.is_finite() && y.is_finite());
            prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
            prop_assert!(seen.insert((x.to_bits(), y.to_bits())));
        }
        prop_assert_eq!(&layout(&u, seed, 40), &l);
    }
}

#[test]
fn connected_pairs_are_closer_on_average() {
    for seed in 0..10 {
        let ag = random_attributed(seed, 40, 0.06);
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let l = layout(&u, seed, 300);
        let ids: Vec<_> = u.nodes.iter().collect();
        let (mut on, mut non, mut off, mut noff) = (0.0, 0, 0.0, 0);
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let (p, q) = (l.positions[*a], l.positions[*b]);
                let d = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
                if u.edges.contains(&((*a).clone(), (*b).clone())) {
                    on += d;
                    non += 1;
                } else {
                    off += d;
                    noff += 1;
                }
            }
        }
        assert!(on / (non as f64) < off / (noff as f64), "seed {seed}");
    }
}
