//! Seeded generator of ego archives with planted pole structure and known codes.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::archive::{AccountId, AccountProfile, EgoArchive};
use crate::attributes::{Affiliation, Coding, Geography};

/// Probability that a member follows any given non-member followee of the ego.
pub const DEFAULT_OUTSIDE_FOLLOW_PROB: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticProfileSpec {
    pub community_size: usize,
    pub pole_count: usize,
    pub intra_pole_edge_prob: f64,
    #[serde(default)]
    pub inter_pole_edge_prob: f64,
    /// One affiliation distribution per pole.
    pub category_mix_per_pole: Vec<BTreeMap<Affiliation, f64>>,
    /// Probability a member of each pole is coded local.
    pub local_fraction_per_pole: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub extra_followers: usize,
    #[serde(default)]
    pub extra_followees: usize,
    #[serde(default = "default_outside")]
    pub outside_follow_prob: f64,
    #[serde(default = "default_home")]
    pub home_country: String,
    #[serde(default = "default_fetched_at")]
    pub fetched_at: DateTime<Utc>,
}

fn default_outside() -> f64 {
    DEFAULT_OUTSIDE_FOLLOW_PROB
}
fn default_home() -> String {
    "Netherlands".into()
}
fn default_fetched_at() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid synthetic spec: {0}")]
pub struct InvalidSpec(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub pole: usize,
    pub geography: Geography,
    pub affiliation: Affiliation,
}

impl GroundTruth {
    pub fn coding(&self) -> Coding {
        Coding {
            geography: self.geography,
            affiliation: self.affiliation,
        }
    }
}

impl SyntheticProfileSpec {
    /// Single-pole spec with uniform-probability edges; handy for tests.
    pub fn one_pole(community_size: usize, edge_prob: f64, academic_share: f64, seed: u64) -> Self {
        let mut mix = BTreeMap::new();
        mix.insert(Affiliation::Academic, academic_share);
        mix.insert(Affiliation::PublicSector, 1.0 - academic_share);
        SyntheticProfileSpec {
            community_size,
            pole_count: 1,
            intra_pole_edge_prob: edge_prob,
            inter_pole_edge_prob: 0.0,
            category_mix_per_pole: vec![mix],
            local_fraction_per_pole: vec![0.2],
            seed,
            extra_followers: 0,
            extra_followees: 0,
            outside_follow_prob: DEFAULT_OUTSIDE_FOLLOW_PROB,
            home_country: default_home(),
            fetched_at: default_fetched_at(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, InvalidSpec> {
        let spec: SyntheticProfileSpec = toml::from_str(text).map_err(|e| InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), InvalidSpec> {
        let err = |m: String| Err(InvalidSpec(m));
        if !(1..=2).contains(&self.pole_count) {
            return err(format!("pole_count must be 1 or 2, got {}", self.pole_count));
        }
        for (name, p) in [
            ("intra_pole_edge_prob", self.intra_pole_edge_prob),
            ("inter_pole_edge_prob", self.inter_pole_edge_prob),
            ("outside_follow_prob", self.outside_follow_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.inter_pole_edge_prob > self.intra_pole_edge_prob {
            return err("inter_pole_edge_prob must not exceed intra_pole_edge_prob".into());
        }
        if self.category_mix_per_pole.len() != self.pole_count {
            return err("category_mix_per_pole needs one entry per pole".into());
        }
        if self.local_fraction_per_pole.len() != self.pole_count {
            return err("local_fraction_per_pole needs one entry per pole".into());
        }
        for (pole, mix) in self.category_mix_per_pole.iter().enumerate() {
            if mix.values().any(|p| !(0.0..=1.0).contains(p)) {
                return err(format!("pole {pole}: category probabilities must lie in [0, 1]"));
            }
            let total: f64 = mix.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return err(format!("pole {pole}: category mix sums to {total}, not 1"));
            }
        }
        for (pole, p) in self.local_fraction_per_pole.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return err(format!("pole {pole}: local fraction must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Pole of the `i`-th generated member; the first pole takes the larger half.
    pub fn pole_of(&self, i: usize) -> usize {
        if self.pole_count == 1 || i < self.community_size.div_ceil(2) {
            0
        } else {
            1
        }
    }
}

pub(crate) const FOREIGN: [&str; 8] = [
    "London, UK",
    "Boston, MA",
    "Madrid, Spain",
    "Berlin, Germany",
    "Toronto, Canada",
    "Paris, France",
    "Melbourne, Australia",
    "Valencia, Spain",
];

pub(crate) fn bio_for(affiliation: Affiliation) -> &'static str {
    match affiliation {
        Affiliation::Academic => "Researcher at a university. Views my own.",
        Affiliation::PrivateSector => "Consultant in research and innovation strategy.",
        Affiliation::PublicSector => "Policy officer at a national science agency.",
        Affiliation::Politician => "Member of parliament. Science and education.",
        Affiliation::Ngo => "Working for an open-knowledge foundation.",
        Affiliation::Unknown => "Coffee, cycling, and books.",
    }
}

fn sample_affiliation(mix: &BTreeMap<Affiliation, f64>, u: f64) -> Affiliation {
    let mut acc = 0.0;
    let mut last = Affiliation::Unknown;
    for a in Affiliation::ALL {
        let p = mix.get(&a).copied().unwrap_or(0.0);
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = a;
        if u < acc {
            return a;
        }
    }
    last
}

fn fresh_id(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<AccountId>) -> AccountId {
    loop {
        let n: u64 = rng.random_range(1_000_000_000..10_000_000_000);
        let id = AccountId::from(n.to_string().as_str());
        if taken.insert(id.clone()) {
            return id;
        }
    }
}

pub const GROUND_TRUTH_HEADER: &str = "id,pole,geography,affiliation";

/// Planted truth as CSV, one row per member in id order.
pub fn ground_truth_csv(truth: &BTreeMap<AccountId, GroundTruth>) -> String {
    let mut s = format!("{GROUND_TRUTH_HEADER}\n");
    for (id, t) in truth {
        s.push_str(&format!("{id},{},{},{}\n", t.pole, t.geography, t.affiliation));
    }
    s
}

/// Generate an archive and the planted truth for every community member.
///
/// Pure in `spec`: identical specs give identical archives.
pub fn synth_generate(
    spec: &SyntheticProfileSpec,
) -> Result<(EgoArchive, BTreeMap<AccountId, GroundTruth>), InvalidSpec> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut taken = BTreeSet::new();

    let ego_id = fresh_id(&mut rng, &mut taken);
    let members: Vec<AccountId> = (0..spec.community_size)
        .map(|_| fresh_id(&mut rng, &mut taken))
        .collect();
    let extra_followers: Vec<AccountId> = (0..spec.extra_followers)
        .map(|_| fresh_id(&mut rng, &mut taken))
        .collect();
    let extra_followees: Vec<AccountId> = (0..spec.extra_followees)
        .map(|_| fresh_id(&mut rng, &mut taken))
        .collect();

    let mut truth = BTreeMap::new();
    let mut profiles = BTreeMap::new();
    for (i, id) in members.iter().enumerate() {
        let pole = spec.pole_of(i);
        let affiliation = sample_affiliation(&spec.category_mix_per_pole[pole], rng.random::<f64>());
        let geography = if rng.random::<f64>() < spec.local_fraction_per_pole[pole] {
            Geography::Local
        } else {
            Geography::Global
        };
        let location = match geography {
            Geography::Local => spec.home_country.clone(),
            _ => FOREIGN[rng.random_range(0..FOREIGN.len())].to_string(),
        };
        truth.insert(
            id.clone(),
            GroundTruth {
                pole,
                geography,
                affiliation,
            },
        );
        profiles.insert(
            id.clone(),
            AccountProfile {
                id: id.clone(),
                handle: format!("member_{i:03}"),
                bio: bio_for(affiliation).to_string(),
                declared_location: location,
                url: String::new(),
                protected: false,
            },
        );
    }
    for (i, id) in extra_followers.iter().enumerate() {
        let mut p = AccountProfile::stub(id.clone());
        p.handle = format!("follower_{i:03}");
        profiles.insert(id.clone(), p);
    }
    for (i, id) in extra_followees.iter().enumerate() {
        let mut p = AccountProfile::stub(id.clone());
        p.handle = format!("followee_{i:03}");
        p.bio = "News and commentary.".into();
        profiles.insert(id.clone(), p);
    }

    let mut member_followees: BTreeMap<AccountId, BTreeSet<AccountId>> = BTreeMap::new();
    for (i, u) in members.iter().enumerate() {
        let mut list = BTreeSet::new();
        list.insert(ego_id.clone());
        for (j, v) in members.iter().enumerate() {
            if i == j {
                continue;
            }
            let p = if spec.pole_of(i) == spec.pole_of(j) {
                spec.intra_pole_edge_prob
            } else {
                spec.inter_pole_edge_prob
            };
            if rng.random::<f64>() < p {
                list.insert(v.clone());
            }
        }
        for v in &extra_followees {
            if rng.random::<f64>() < spec.outside_follow_prob {
                list.insert(v.clone());
            }
        }
        member_followees.insert(u.clone(), list);
    }

    let ego = AccountProfile {
        id: ego_id.clone(),
        handle: "researcher".into(),
        bio: "Researcher in science and technology studies.".into(),
        declared_location: spec.home_country.clone(),
        url: String::new(),
        protected: false,
    };
    profiles.insert(ego_id, ego.clone());

    let archive = EgoArchive {
        ego,
        fetched_at: spec.fetched_at,
        followers: members.iter().chain(&extra_followers).cloned().collect(),
        followees: members.iter().chain(&extra_followees).cloned().collect(),
        member_followees,
        profiles,
    };
    debug_assert!(archive.validate().is_ok());
    Ok((archive, truth))
}
