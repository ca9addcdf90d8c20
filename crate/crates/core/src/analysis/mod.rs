//! Summary, structural and classification statistics over attributed graphs.

pub mod cluster;
pub mod enrichment;
pub mod mixing;
pub mod profile;
pub mod shares;

pub use cluster::{cluster, modularity, Clustering};
pub use enrichment::{cluster_enrichment, non_academic_enrichment, ClusterEnrichment, EnrichmentEntry};
pub use mixing::{mixing_matrix, EmptyGraph, MixingMatrix};
pub use profile::{classify_profile, EngagementProfile, ProfileEvidence, ProfileLabel, ProfileThresholds};
pub use shares::{
    category_shares, local_share, non_academic_share, relations_summary, round_percent,
    CategoryCount, CategoryShares, Dimension, RelationsSummary,
};
