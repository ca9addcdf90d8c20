use serde::Serialize;

use crate::attributes::{Affiliation, AttributedGraph, Coding, Geography};
use crate::egonet::interaction_community;
use crate::ingest::EgoArchive;

/// The two coded attribute dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Geography,
    Affiliation,
}

impl Dimension {
    pub const ALL: [Dimension; 2] = [Dimension::Geography, Dimension::Affiliation];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Geography => "geography",
            Dimension::Affiliation => "affiliation",
        }
    }

    /// Category tokens in canonical order, `unknown` last.
    pub fn categories(self) -> Vec<&'static str> {
        match self {
            Dimension::Geography => Geography::ALL.iter().map(|g| g.token()).collect(),
            Dimension::Affiliation => Affiliation::ALL.iter().map(|a| a.token()).collect(),
        }
    }

    /// Index of the coding's category within [`Dimension::categories`].
    pub fn index_of(self, coding: Coding) -> usize {
        match self {
            Dimension::Geography => coding.geography as usize,
            Dimension::Affiliation => coding.affiliation as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelationsSummary {
    pub followers: usize,
    pub followees: usize,
    pub community: usize,
}

pub fn relations_summary(archive: &EgoArchive) -> RelationsSummary {
    RelationsSummary {
        followers: archive.followers.len(),
        followees: archive.followees.len(),
        community: interaction_community(archive).members.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryCount {
    pub category: &'static str,
    pub count: usize,
    pub share: f64,
}

/// Node counts per category over all nodes, `unknown` included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryShares {
    pub dimension: Dimension,
    pub entries: Vec<CategoryCount>,
    pub total: usize,
}

impl CategoryShares {
    pub fn count(&self, category: &str) -> usize {
        self.entries
            .iter()
            .find(|e| e.category == category)
            .map_or(0, |e| e.count)
    }

    pub fn share(&self, category: &str) -> f64 {
        self.entries
            .iter()
            .find(|e| e.category == category)
            .map_or(0.0, |e| e.share)
    }
}

pub fn category_shares(ag: &AttributedGraph, dimension: Dimension) -> CategoryShares {
    let categories = dimension.categories();
    let mut counts = vec![0usize; categories.len()];
    for node in &ag.graph.nodes {
        counts[dimension.index_of(ag.coding_of(node))] += 1;
    }
    let total = ag.graph.nodes.len();
    let entries = categories
        .into_iter()
        .zip(counts)
        .map(|(category, count)| CategoryCount {
            category,
            count,
            share: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        })
        .collect();
    CategoryShares {
        dimension,
        entries,
        total,
    }
}

/// Share of nodes coded with a non-academic affiliation (unknowns in the denominator).
pub fn non_academic_share(ag: &AttributedGraph) -> f64 {
    fraction(ag, |c| c.affiliation.is_non_academic())
}

pub fn local_share(ag: &AttributedGraph) -> f64 {
    fraction(ag, |c| c.geography == Geography::Local)
}

pub(crate) fn fraction(ag: &AttributedGraph, pred: impl Fn(Coding) -> bool) -> f64 {
    let n = ag.graph.nodes.len();
    if n == 0 {
        return 0.0;
    }
    let hits = ag.graph.nodes.iter().filter(|id| pred(ag.coding_of(id))).count();
    hits as f64 / n as f64
}

/// Whole-percent rounding, half away from zero (shares are nonnegative, so half-up).
pub fn round_percent(share: f64) -> u32 {
    // nudge absorbs representation error at exact halves such as 0.125 * 100
    (share * 100.0 + 1e-9).round() as u32
}
