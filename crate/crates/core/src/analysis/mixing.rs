use serde::Serialize;

use super::shares::Dimension;
use crate::attributes::AttributedGraph;

/// Edge-fraction matrix over category pairs of a directed graph.
///
/// `m[i][j]` is the fraction of edges running from a node in category `i` to a
/// node in category `j`. Assortativity is `(tr m − Σ aᵢbᵢ) / (1 − Σ aᵢbᵢ)` with
/// `a`, `b` the row and column marginals; it is 0 when every edge sits in one
/// row/column pair and the denominator vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingMatrix {
    pub dimension: Dimension,
    pub categories: Vec<&'static str>,
    pub m: Vec<Vec<f64>>,
    pub edge_count: usize,
    pub assortativity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mixing matrix undefined: graph has no edges")]
pub struct EmptyGraph;

pub fn mixing_matrix(ag: &AttributedGraph, dimension: Dimension) -> Result<MixingMatrix, EmptyGraph> {
    let categories = dimension.categories();
    let k = categories.len();
    let edges = ag.graph.edges.len();
    if edges == 0 {
        return Err(EmptyGraph);
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (u, v) in &ag.graph.edges {
        let i = dimension.index_of(ag.coding_of(u));
        let j = dimension.index_of(ag.coding_of(v));
        counts[i][j] += 1;
    }
    let total = edges as f64;
    let m: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / total).collect())
        .collect();

    // Work in integer counts where possible so that degenerate cases are exact.
    let trace: usize = (0..k).map(|i| counts[i][i]).sum();
    let row: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..k).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    let ab: u128 = (0..k).map(|i| row[i] as u128 * col[i] as u128).sum();
    let e2 = edges as u128 * edges as u128;
    let assortativity = if ab == e2 {
        0.0
    } else {
        let tr = trace as f64 / total;
        let sab = ab as f64 / e2 as f64;
        ((tr - sab) / (1.0 - sab)).clamp(-1.0, 1.0)
    };

    Ok(MixingMatrix {
        dimension,
        categories,
        m,
        edge_count: edges,
        assortativity,
    })
}
