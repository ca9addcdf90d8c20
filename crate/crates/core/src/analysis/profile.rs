//! Threshold rule turning shares and cluster enrichment into an engagement label.
//!
//! Rule, evaluated in order:
//! 1. fewer than `min_coded_share` of nodes carry a known affiliation → `mixed`;
//! 2. non-academic share below `academic_max_non_academic` and local share below
//!    `academic_max_local` → `globally_academic`;
//! 3. non-academic share at least `engaged_min_non_academic` and some cluster holding
//!    at least `min_cluster_share` of the nodes has a non-academic enrichment ratio of
//!    at least `engaged_min_enrichment` → `locally_engaged`;
//! 4. otherwise `mixed`.
//!
//! The default constants are this crate's operational choice, not measured values.

use serde::{Deserialize, Serialize};

use super::cluster::Clustering;
use super::enrichment::non_academic_enrichment;
use super::shares::{fraction, local_share, non_academic_share};
use crate::attributes::{Affiliation, AttributedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileThresholds {
    pub academic_max_non_academic: f64,
    pub academic_max_local: f64,
    pub engaged_min_non_academic: f64,
    pub engaged_min_enrichment: f64,
    pub min_cluster_share: f64,
    pub min_coded_share: f64,
}

impl Default for ProfileThresholds {
    fn default() -> Self {
        ProfileThresholds {
            academic_max_non_academic: 0.15,
            academic_max_local: 0.50,
            engaged_min_non_academic: 0.30,
            engaged_min_enrichment: 1.5,
            min_cluster_share: 0.10,
            min_coded_share: 0.50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileLabel {
    GloballyAcademic,
    LocallyEngaged,
    Mixed,
}

impl ProfileLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileLabel::GloballyAcademic => "globally_academic",
            ProfileLabel::LocallyEngaged => "locally_engaged",
            ProfileLabel::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEvidence {
    pub non_academic_share: f64,
    pub local_share: f64,
    pub coded_share: f64,
    /// Largest non-academic enrichment ratio among clusters large enough to count.
    pub max_non_academic_enrichment: Option<f64>,
    /// Size of the cluster carrying that ratio.
    pub enriched_cluster_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngagementProfile {
    pub label: ProfileLabel,
    pub evidence: ProfileEvidence,
}

pub fn classify_profile(
    ag: &AttributedGraph,
    c: &Clustering,
    thresholds: &ProfileThresholds,
) -> EngagementProfile {
    let n = ag.graph.nodes.len();
    let non_academic = non_academic_share(ag);
    let local = local_share(ag);
    let coded = fraction(ag, |code| code.affiliation != Affiliation::Unknown);

    let min_size = thresholds.min_cluster_share * n as f64;
    let mut best: Option<(f64, usize)> = None;
    for e in non_academic_enrichment(c, ag) {
        if (e.size as f64) < min_size {
            continue;
        }
        if let Some(r) = e.entries[0].ratio {
            // order-independent: larger ratio wins, then larger cluster
            let better = match best {
                None => true,
                Some((br, bs)) => r > br || (r == br && e.size > bs),
            };
            if better {
                best = Some((r, e.size));
            }
        }
    }

    let label = if n == 0 || coded < thresholds.min_coded_share {
        ProfileLabel::Mixed
    } else if non_academic < thresholds.academic_max_non_academic
        && local < thresholds.academic_max_local
    {
        ProfileLabel::GloballyAcademic
    } else if non_academic >= thresholds.engaged_min_non_academic
        && best.is_some_and(|(r, _)| r >= thresholds.engaged_min_enrichment)
    {
        ProfileLabel::LocallyEngaged
    } else {
        ProfileLabel::Mixed
    };

    EngagementProfile {
        label,
        evidence: ProfileEvidence {
            non_academic_share: non_academic,
            local_share: local,
            coded_share: coded,
            max_non_academic_enrichment: best.map(|b| b.0),
            enriched_cluster_size: best.map(|b| b.1),
        },
    }
}
