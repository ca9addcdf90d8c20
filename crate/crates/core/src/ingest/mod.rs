//! Acquisition and persistence of follower/followee data.

pub mod archive;
pub mod client;
pub mod fetch;
pub mod http;
pub mod synth;

pub use archive::{load_archive, save_archive, AccountId, AccountProfile, ArchiveError, EgoArchive};
pub use client::{ClientError, FixtureClient, ListKind, ListProvider, Page};
pub use fetch::{fetch_ego, resume_fetch, FetchBudget, FetchCursor, FetchError, ListProgress};
#[cfg(feature = "http")]
pub use http::HttpClient;
pub use http::{EndpointDescription, EndpointError, HttpEndpoint, ResponseShape};
pub use synth::{ground_truth_csv, synth_generate, GroundTruth, InvalidSpec, SyntheticProfileSpec};
