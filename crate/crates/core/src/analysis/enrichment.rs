use serde::Serialize;

use super::cluster::Clustering;
use super::shares::Dimension;
use crate::attributes::{AttributedGraph, Coding};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentEntry {
    pub category: &'static str,
    pub count: usize,
    /// Within-cluster share.
    pub share: f64,
    /// Within-cluster share over graph-wide share; `None` when the category is absent graph-wide.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterEnrichment {
    pub cluster: usize,
    pub size: usize,
    pub entries: Vec<EnrichmentEntry>,
}

impl ClusterEnrichment {
    pub fn entry(&self, category: &str) -> Option<&EnrichmentEntry> {
        self.entries.iter().find(|e| e.category == category)
    }

    /// Category with the highest over-representation ratio (ties: canonical order).
    pub fn most_enriched(&self) -> Option<&EnrichmentEntry> {
        self.entries
            .iter()
            .filter(|e| e.count > 0)
            .filter_map(|e| e.ratio.map(|r| (r, e)))
            .fold(None, |best: Option<(f64, &EnrichmentEntry)>, (r, e)| match best {
                Some((br, _)) if br >= r => best,
                _ => Some((r, e)),
            })
            .map(|(_, e)| e)
    }
}

/// Per-cluster counts against a boolean category (e.g. "non-academic").
fn enrichment_by(
    c: &Clustering,
    ag: &AttributedGraph,
    categories: &[&'static str],
    index_of: impl Fn(Coding) -> Option<usize>,
) -> Vec<ClusterEnrichment> {
    let k = c.cluster_count();
    let cats = categories.len();
    let mut counts = vec![vec![0usize; cats]; k];
    let mut global = vec![0usize; cats];
    let mut sizes = vec![0usize; k];
    for (id, &label) in &c.assignment {
        sizes[label] += 1;
        if let Some(i) = index_of(ag.coding_of(id)) {
            counts[label][i] += 1;
            global[i] += 1;
        }
    }
    let n = c.assignment.len() as f64;
    (0..k)
        .map(|label| ClusterEnrichment {
            cluster: label,
            size: sizes[label],
            entries: (0..cats)
                .map(|i| {
                    let share = counts[label][i] as f64 / sizes[label] as f64;
                    let global_share = global[i] as f64 / n;
                    EnrichmentEntry {
                        category: categories[i],
                        count: counts[label][i],
                        share,
                        ratio: (global[i] > 0).then(|| share / global_share),
                    }
                })
                .collect(),
        })
        .collect()
}

pub fn cluster_enrichment(
    c: &Clustering,
    ag: &AttributedGraph,
    dimension: Dimension,
) -> Vec<ClusterEnrichment> {
    enrichment_by(c, ag, &dimension.categories(), |coding| {
        Some(dimension.index_of(coding))
    })
}

/// Enrichment of the pooled non-academic affiliations (unknowns count toward size only).
pub fn non_academic_enrichment(c: &Clustering, ag: &AttributedGraph) -> Vec<ClusterEnrichment> {
    enrichment_by(c, ag, &["non_academic"], |coding| {
        coding.affiliation.is_non_academic().then_some(0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{annotate, Affiliation, CodingMap, Geography};
    use crate::egonet::DirectedFollowGraph;
    use crate::ingest::AccountId;
    use std::collections::BTreeMap;

    fn setup(labels: &[usize], affs: &[Affiliation]) -> (Clustering, AttributedGraph) {
        let id = |i: usize| AccountId::from(format!("n{i:02}").as_str());
        let n = labels.len();
        let graph = DirectedFollowGraph {
            ego: "e".into(),
            nodes: (0..n).map(id).collect(),
            edges: Default::default(),
        };
        let coding: CodingMap = (0..n)
            .map(|i| {
                (
                    id(i),
                    Coding {
                        geography: Geography::Local,
                        affiliation: affs[i],
                    },
                )
            })
            .collect();
        let assignment: BTreeMap<AccountId, usize> = (0..n).map(|i| (id(i), labels[i])).collect();
        (
            Clustering {
                assignment,
                modularity: 0.0,
                resolution: 1.0,
                seed: 0,
            },
            annotate(graph, coding, "NL").unwrap(),
        )
    }

    #[test]
    fn single_cluster_has_unit_ratios() {
        use Affiliation::*;
        let (c, ag) = setup(&[0; 5], &[Academic, Academic, Ngo, Unknown, PublicSector]);
        let e = &cluster_enrichment(&c, &ag, Dimension::Affiliation)[0];
        for entry in &e.entries {
            match entry.count {
                0 => assert_eq!(entry.ratio, None),
                _ => assert!((entry.ratio.unwrap() - 1.0).abs() < 1e-12),
            }
        }
        assert_eq!(e.entry("politician").unwrap().ratio, None);
    }

    #[test]
    fn two_clusters_hand_computed() {
        use Affiliation::*;
        // cluster 0: A A A N ; cluster 1: N N A P
        let (c, ag) = setup(
            &[0, 0, 0, 0, 1, 1, 1, 1],
            &[Academic, Academic, Academic, Ngo, Ngo, Ngo, Academic, PublicSector],
        );
        let e = cluster_enrichment(&c, &ag, Dimension::Affiliation);
        // academic: global 4/8; cluster0 3/4 → 1.5; cluster1 1/4 → 0.5
        assert!((e[0].entry("academic").unwrap().ratio.unwrap() - 1.5).abs() < 1e-12);
        assert!((e[1].entry("academic").unwrap().ratio.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(e[1].most_enriched().unwrap().category, "public_sector");
        let na = non_academic_enrichment(&c, &ag);
        // non-academic: global 4/8; cluster1 3/4 → 1.5
        assert!((na[1].entries[0].ratio.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(na[0].entries[0].count, 1);
    }

    #[test]
    fn all_academic_has_no_non_academic_ratio() {
        let (c, ag) = setup(&[0, 1], &[Affiliation::Academic, Affiliation::Academic]);
        let na = non_academic_enrichment(&c, &ag);
        assert!(na.iter().all(|e| e.entries[0].ratio.is_none()));
    }
}
