//! Workloads shared by the benchmarks.

use engagemap_core::ingest::{synth_generate, SyntheticProfileSpec};
use engagemap_core::{annotate, build_graph, symmetrize, AttributedGraph, EgoArchive, SymmetrizationMode, UndirectedFollowGraph};

pub struct Workload {
    pub archive: EgoArchive,
    pub attributed: AttributedGraph,
    pub undirected: UndirectedFollowGraph,
}

/// Two-pole synthetic community of `size` members with known codes.
pub fn two_pole(size: usize, seed: u64) -> Workload {
    let base = SyntheticProfileSpec::one_pole(size, 0.3, 1.0, seed);
    let mut spec = SyntheticProfileSpec {
        pole_count: 2,
        inter_pole_edge_prob: 0.02,
        local_fraction_per_pole: vec![0.2, 0.9],
        ..base
    };
    let mix = spec.category_mix_per_pole[0].clone();
    spec.category_mix_per_pole = vec![mix.clone(), mix];
    let (archive, truth) = synth_generate(&spec).expect("valid spec");
    let coding = truth.iter().map(|(id, t)| (id.clone(), t.coding())).collect();
    let attributed = annotate(build_graph(&archive), coding, &spec.home_country).expect("codes cover members");
    let undirected = symmetrize(&attributed.graph, SymmetrizationMode::Any);
    Workload {
        archive,
        attributed,
        undirected,
    }
}
