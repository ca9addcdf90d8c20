//! Bundled case-study fixtures.
//!
//! Two researchers are built deterministically from the synthetic generator:
//! structure comes from a planted-pole spec, and the codes are then laid over
//! the members as exact per-pole quotas (shuffled with a fixed seed), so every
//! count in the reports is fixed rather than sampled. Profiles are rewritten
//! to agree with the codes.
//!
//! | fixture      | followers | followees | community | coding                                  |
//! |--------------|-----------|-----------|-----------|-----------------------------------------|
//! | researcher-1 | 251       | 81        | 44        | 42 academic, 1 public sector, 1 unknown |
//! | researcher-2 | 221       | 232       | 110       | 54 academic, 50 non-academic, 6 unknown |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attributes::{generate_coding_template, Affiliation, Coding, CodingMap, CodingSheet, Geography};
use crate::egonet::interaction_community;
use crate::ingest::synth::{bio_for, FOREIGN};
use crate::ingest::{synth_generate, EgoArchive, FetchBudget, GroundTruth, SyntheticProfileSpec};
use crate::pipeline::{RunConfig, RunPaths};

pub const HOME_COUNTRY: &str = "Netherlands";
pub const ARCHIVE_FILE: &str = "archive.json";
pub const CODING_FILE: &str = "coding.csv";
pub const CONFIG_FILE: &str = "pipeline.toml";
pub const ENDPOINT_FILE: &str = "endpoint.toml";

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub archive: EgoArchive,
    pub truth: BTreeMap<crate::ingest::AccountId, GroundTruth>,
    pub coding: CodingMap,
    pub sheet: CodingSheet,
    /// Config with paths relative to the fixture directory.
    pub config: RunConfig,
}

/// `(count, geography, affiliation)` quotas for one pole.
type Quota = &'static [(usize, Geography, Affiliation)];

const R1_POLE: Quota = &[
    (32, Geography::Global, Affiliation::Academic),
    (10, Geography::Local, Affiliation::Academic),
    (1, Geography::Global, Affiliation::PublicSector),
    (1, Geography::Unknown, Affiliation::Unknown),
];

const R2_ACADEMIC_POLE: Quota = &[
    (40, Geography::Global, Affiliation::Academic),
    (10, Geography::Local, Affiliation::Academic),
    (1, Geography::Local, Affiliation::Ngo),
    (1, Geography::Local, Affiliation::PublicSector),
    (3, Geography::Unknown, Affiliation::Unknown),
];

const R2_STAKEHOLDER_POLE: Quota = &[
    (2, Geography::Global, Affiliation::Academic),
    (2, Geography::Local, Affiliation::Academic),
    (19, Geography::Local, Affiliation::PublicSector),
    (1, Geography::Global, Affiliation::PublicSector),
    (16, Geography::Local, Affiliation::PrivateSector),
    (2, Geography::Global, Affiliation::PrivateSector),
    (5, Geography::Local, Affiliation::Politician),
    (3, Geography::Local, Affiliation::Ngo),
    (2, Geography::Global, Affiliation::Ngo),
    (3, Geography::Unknown, Affiliation::Unknown),
];

fn expand(quota: Quota, rng: &mut ChaCha8Rng) -> Vec<Coding> {
    let mut codes: Vec<Coding> = quota
        .iter()
        .flat_map(|&(n, geography, affiliation)| {
            std::iter::repeat_n(
                Coding {
                    geography,
                    affiliation,
                },
                n,
            )
        })
        .collect();
    codes.shuffle(rng);
    codes
}

fn build(name: &'static str, handle: &str, spec: SyntheticProfileSpec, poles: &[Quota]) -> Fixture {
    let (mut archive, mut truth) = synth_generate(&spec).expect("fixture spec is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let mut codes: Vec<std::vec::IntoIter<Coding>> = poles.iter().map(|q| expand(q, &mut rng).into_iter()).collect();

    // Member handles are `member_NNN` in generation order, which fixes the pole.
    let mut members: Vec<_> = truth.keys().cloned().collect();
    members.sort_by_key(|id| archive.profiles[id].handle.clone());
    let mut coding = CodingMap::new();
    for (i, id) in members.iter().enumerate() {
        let t = truth.get_mut(id).unwrap();
        debug_assert_eq!(t.pole, spec.pole_of(i));
        let code = codes[t.pole].next().expect("quota matches pole size");
        t.geography = code.geography;
        t.affiliation = code.affiliation;
        coding.insert(id.clone(), code);
        let p = archive.profiles.get_mut(id).unwrap();
        p.bio = bio_for(code.affiliation).to_string();
        p.declared_location = match code.geography {
            Geography::Local => HOME_COUNTRY.to_string(),
            Geography::Global => FOREIGN[i % FOREIGN.len()].to_string(),
            Geography::Unknown => String::new(),
        };
    }
    assert!(codes.iter_mut().all(|c| c.next().is_none()), "quota exceeds pole size");

    archive.ego.handle = handle.to_string();
    archive.profiles.insert(archive.ego.id.clone(), archive.ego.clone());
    archive.validate().expect("fixture archive is valid");

    let community = interaction_community(&archive);
    let mut sheet = generate_coding_template(&community, &archive);
    for row in &mut sheet.rows {
        let code = coding[&row.id];
        row.geography = code.geography;
        row.affiliation = code.affiliation;
        row.evidence = match code.affiliation {
            Affiliation::Unknown => "profile gives no affiliation".into(),
            _ => "bio".into(),
        };
    }

    let mut config = RunConfig::new(
        HOME_COUNTRY,
        RunPaths {
            archive: ARCHIVE_FILE.into(),
            coding: CODING_FILE.into(),
            out_dir: "out".into(),
            endpoint: Some(ENDPOINT_FILE.into()),
        },
    );
    config.handle = Some(handle.to_string());
    config.cluster_seed = 42;
    config.layout_seed = 7;
    // fixture replay is local, so the window is short
    config.budget = FetchBudget {
        max_requests_per_window: 1000,
        window: 1,
        max_pages_per_list: 500,
    };

    Fixture {
        name,
        archive,
        truth,
        coding,
        sheet,
        config,
    }
}

pub fn researcher_1() -> Fixture {
    let mut spec = SyntheticProfileSpec::one_pole(44, 0.25, 1.0, 1044);
    spec.extra_followers = 207;
    spec.extra_followees = 37;
    spec.home_country = HOME_COUNTRY.into();
    build("researcher-1", "researcher_1", spec, &[R1_POLE])
}

pub fn researcher_2() -> Fixture {
    let uniform = |a: Affiliation| BTreeMap::from([(a, 1.0)]);
    let spec = SyntheticProfileSpec {
        community_size: 110,
        pole_count: 2,
        intra_pole_edge_prob: 0.3,
        inter_pole_edge_prob: 0.02,
        category_mix_per_pole: vec![uniform(Affiliation::Academic), uniform(Affiliation::PublicSector)],
        local_fraction_per_pole: vec![0.2, 0.9],
        seed: 2110,
        extra_followers: 111,
        extra_followees: 122,
        outside_follow_prob: crate::ingest::synth::DEFAULT_OUTSIDE_FOLLOW_PROB,
        home_country: HOME_COUNTRY.into(),
        fetched_at: SyntheticProfileSpec::one_pole(1, 0.0, 1.0, 0).fetched_at,
    };
    build(
        "researcher-2",
        "researcher_2",
        spec,
        &[R2_ACADEMIC_POLE, R2_STAKEHOLDER_POLE],
    )
}

pub fn all() -> Vec<Fixture> {
    vec![researcher_1(), researcher_2()]
}

impl Fixture {
    /// File name to contents for the bundled fixture directory.
    pub fn files(&self) -> BTreeMap<&'static str, String> {
        let endpoint = format!("kind = \"fixture\"\narchive = \"{ARCHIVE_FILE}\"\npage_size = 50\n");
        BTreeMap::from([
            (ARCHIVE_FILE, self.archive.to_canonical_string()),
            (CODING_FILE, self.sheet.to_csv()),
            (CONFIG_FILE, self.config.to_toml()),
            (ENDPOINT_FILE, endpoint),
        ])
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, text) in self.files() {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}
