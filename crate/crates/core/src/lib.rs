//! Reciprocal-interaction community mapping for researchers on follow-based
//! social platforms.
//!
//! The pipeline: take an ego archive (followers, followees, and the followee
//! lists of accounts that are both), build the directed follow graph among
//! those accounts with the ego removed, attach analyst codes for geography and
//! affiliation, then compute shares, mixing, modularity clusters and a layout.

pub mod analysis;
pub mod attributes;
pub mod egonet;
pub mod fixtures;
pub mod ingest;
pub mod layout;
pub mod pipeline;

pub use attributes::{
    annotate, generate_coding_template, load_coding_sheet, Affiliation, AttributedGraph, Coding,
    CodingMap, CodingSheet, Geography, KeyMismatch, SheetError,
};
pub use egonet::{
    build_graph, degree_summary, interaction_community, symmetrize, DegreeSummary,
    DirectedFollowGraph, InteractionCommunity, SymmetrizationMode, UndirectedFollowGraph,
};
pub use ingest::{AccountId, AccountProfile, EgoArchive};
