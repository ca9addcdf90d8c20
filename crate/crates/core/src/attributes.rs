//! Analyst coding sheets and node attributes.
//!
//! Each community member is coded on two closed vocabularies: geography
//! relative to the researcher's home country, and institutional affiliation.
//! `unknown` is a legal code on both.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::egonet::{DirectedFollowGraph, InteractionCommunity};
use crate::ingest::{AccountId, EgoArchive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geography {
    Local,
    Global,
    Unknown,
}

impl Geography {
    pub const ALL: [Geography; 3] = [Geography::Local, Geography::Global, Geography::Unknown];

    pub fn token(self) -> &'static str {
        match self {
            Geography::Local => "local",
            Geography::Global => "global",
            Geography::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affiliation {
    Academic,
    PrivateSector,
    PublicSector,
    Politician,
    Ngo,
    Unknown,
}

impl Affiliation {
    pub const ALL: [Affiliation; 6] = [
        Affiliation::Academic,
        Affiliation::PrivateSector,
        Affiliation::PublicSector,
        Affiliation::Politician,
        Affiliation::Ngo,
        Affiliation::Unknown,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Affiliation::Academic => "academic",
            Affiliation::PrivateSector => "private_sector",
            Affiliation::PublicSector => "public_sector",
            Affiliation::Politician => "politician",
            Affiliation::Ngo => "ngo",
            Affiliation::Unknown => "unknown",
        }
    }

    /// Coded, and coded as something other than academic.
    pub fn is_non_academic(self) -> bool {
        !matches!(self, Affiliation::Academic | Affiliation::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownToken(pub String);

impl FromStr for Geography {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Geography::ALL
            .into_iter()
            .find(|g| g.token() == s)
            .ok_or_else(|| UnknownToken(s.to_string()))
    }
}

impl FromStr for Affiliation {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Affiliation::ALL
            .into_iter()
            .find(|a| a.token() == s)
            .ok_or_else(|| UnknownToken(s.to_string()))
    }
}

impl fmt::Display for Geography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl fmt::Display for Affiliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coding {
    pub geography: Geography,
    pub affiliation: Affiliation,
}

impl Coding {
    pub const UNKNOWN: Coding = Coding {
        geography: Geography::Unknown,
        affiliation: Affiliation::Unknown,
    };
}

pub type CodingMap = BTreeMap<AccountId, Coding>;

pub const SHEET_HEADER: [&str; 8] = [
    "id",
    "handle",
    "bio",
    "location",
    "url",
    "geography",
    "affiliation",
    "evidence",
];

/// Bios are cut to this many characters in the sheet.
pub const BIO_EXCERPT_CHARS: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetRow {
    pub id: AccountId,
    pub handle: String,
    pub bio: String,
    pub location: String,
    pub url: String,
    pub geography: Geography,
    pub affiliation: Affiliation,
    pub evidence: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodingSheet {
    pub rows: Vec<SheetRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCode {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub column: &'static str,
    pub token: String,
}

impl fmt::Display for BadCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {} column {}: {:?}", self.row, self.column, self.token)
    }
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, thiserror::Error)]
pub enum SheetError {
    #[error("coding sheet header must be `{}`, found `{found}`", SHEET_HEADER.join(","))]
    BadHeader { found: String },
    #[error("coding sheet row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("illegal codes: {}", list(.0))]
    BadCode(Vec<BadCode>),
    #[error("duplicate rows for ids: {}", list(.0))]
    DuplicateRows(Vec<AccountId>),
    #[error("rows for accounts outside the interaction community: {}", list(.0))]
    UnknownRows(Vec<AccountId>),
    #[error("community members missing from the sheet: {}", list(.0))]
    MissingMembers(Vec<AccountId>),
    #[error("coding sheet i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, thiserror::Error)]
#[error("coding keys do not match graph nodes (uncoded: [{}], unexpected: [{}])", list(.uncoded), list(.unexpected))]
pub struct KeyMismatch {
    pub uncoded: Vec<AccountId>,
    pub unexpected: Vec<AccountId>,
}

fn excerpt(text: &str) -> String {
    text.chars().take(BIO_EXCERPT_CHARS).collect()
}

/// One all-unknown row per member, pre-filled from the profile, sorted by handle then id.
pub fn generate_coding_template(
    community: &InteractionCommunity,
    archive: &EgoArchive,
) -> CodingSheet {
    let mut rows: Vec<SheetRow> = community
        .members
        .iter()
        .map(|id| template_row(id, archive))
        .collect();
    rows.sort_by(|a, b| {
        a.handle
            .to_lowercase()
            .cmp(&b.handle.to_lowercase())
            .then_with(|| a.id.cmp(&b.id))
    });
    CodingSheet { rows }
}

fn template_row(id: &AccountId, archive: &EgoArchive) -> SheetRow {
    let profile = archive.profiles.get(id);
    let field = |f: fn(&crate::ingest::AccountProfile) -> &String| {
        profile.map(|p| f(p).clone()).unwrap_or_default()
    };
    SheetRow {
        id: id.clone(),
        handle: field(|p| &p.handle),
        bio: excerpt(&field(|p| &p.bio)),
        location: field(|p| &p.declared_location),
        url: field(|p| &p.url),
        geography: Geography::Unknown,
        affiliation: Affiliation::Unknown,
        evidence: String::new(),
    }
}

impl CodingSheet {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(SHEET_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.id.as_str(),
                &r.handle,
                &r.bio,
                &r.location,
                &r.url,
                r.geography.token(),
                r.affiliation.token(),
                &r.evidence,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SheetError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses rows and their codes. Membership is not checked here.
    pub fn parse(text: &str) -> Result<Self, SheetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = match records.next() {
            None => {
                return Err(SheetError::BadHeader {
                    found: String::new(),
                })
            }
            Some(r) => r.map_err(|e| SheetError::Malformed {
                row: 0,
                message: e.to_string(),
            })?,
        };
        let found: Vec<&str> = header.iter().collect();
        if found != SHEET_HEADER {
            return Err(SheetError::BadHeader {
                found: found.join(","),
            });
        }

        let mut rows = Vec::new();
        let mut bad = Vec::new();
        for (i, record) in records.enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| SheetError::Malformed {
                row,
                message: e.to_string(),
            })?;
            if record.len() != SHEET_HEADER.len() {
                return Err(SheetError::Malformed {
                    row,
                    message: format!("expected {} fields, found {}", SHEET_HEADER.len(), record.len()),
                });
            }
            let id = AccountId::new(&record[0]).map_err(|_| SheetError::Malformed {
                row,
                message: "empty id".into(),
            })?;
            let geography = record[5].parse::<Geography>().unwrap_or_else(|UnknownToken(t)| {
                bad.push(BadCode {
                    row,
                    column: "geography",
                    token: t,
                });
                Geography::Unknown
            });
            let affiliation = record[6]
                .parse::<Affiliation>()
                .unwrap_or_else(|UnknownToken(t)| {
                    bad.push(BadCode {
                        row,
                        column: "affiliation",
                        token: t,
                    });
                    Affiliation::Unknown
                });
            rows.push(SheetRow {
                id,
                handle: record[1].to_string(),
                bio: record[2].to_string(),
                location: record[3].to_string(),
                url: record[4].to_string(),
                geography,
                affiliation,
                evidence: record[7].to_string(),
            });
        }
        if !bad.is_empty() {
            return Err(SheetError::BadCode(bad));
        }
        Ok(CodingSheet { rows })
    }

    /// Checks the sheet covers the community exactly once and returns its codes.
    pub fn validate(&self, community: &InteractionCommunity) -> Result<CodingMap, SheetError> {
        let mut coding = CodingMap::new();
        let mut duplicates = BTreeSet::new();
        let mut unknown = Vec::new();
        for r in &self.rows {
            if !community.members.contains(&r.id) {
                unknown.push(r.id.clone());
            } else if coding
                .insert(
                    r.id.clone(),
                    Coding {
                        geography: r.geography,
                        affiliation: r.affiliation,
                    },
                )
                .is_some()
            {
                duplicates.insert(r.id.clone());
            }
        }
        if !duplicates.is_empty() {
            return Err(SheetError::DuplicateRows(duplicates.into_iter().collect()));
        }
        if !unknown.is_empty() {
            return Err(SheetError::UnknownRows(unknown));
        }
        let missing: Vec<AccountId> = community
            .members
            .iter()
            .filter(|m| !coding.contains_key(*m))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(SheetError::MissingMembers(missing));
        }
        Ok(coding)
    }

    /// Keeps existing rows that are still members (codes and edits intact, original order),
    /// then appends template rows for members the existing sheet lacks.
    /// Returns the merged sheet and the ids of dropped rows.
    pub fn merge_into(
        existing: &CodingSheet,
        template: &CodingSheet,
        community: &InteractionCommunity,
    ) -> (CodingSheet, Vec<AccountId>) {
        let mut seen = BTreeSet::new();
        let mut rows = Vec::new();
        let mut dropped = Vec::new();
        for r in &existing.rows {
            if community.members.contains(&r.id) && seen.insert(r.id.clone()) {
                rows.push(r.clone());
            } else if !community.members.contains(&r.id) {
                dropped.push(r.id.clone());
            }
        }
        rows.extend(template.rows.iter().filter(|r| !seen.contains(&r.id)).cloned());
        (CodingSheet { rows }, dropped)
    }
}

pub fn load_coding_sheet(
    path: impl AsRef<Path>,
    community: &InteractionCommunity,
) -> Result<CodingMap, SheetError> {
    let text = std::fs::read_to_string(path)?;
    CodingSheet::parse(&text)?.validate(community)
}

/// Directed follow graph with per-node codes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    pub graph: DirectedFollowGraph,
    pub coding: CodingMap,
    pub home_country: String,
}

pub fn annotate(
    graph: DirectedFollowGraph,
    coding: CodingMap,
    home_country: &str,
) -> Result<AttributedGraph, KeyMismatch> {
    let uncoded: Vec<AccountId> = graph
        .nodes
        .iter()
        .filter(|n| !coding.contains_key(*n))
        .cloned()
        .collect();
    let unexpected: Vec<AccountId> = coding
        .keys()
        .filter(|k| !graph.nodes.contains(*k))
        .cloned()
        .collect();
    if !uncoded.is_empty() || !unexpected.is_empty() {
        return Err(KeyMismatch {
            uncoded,
            unexpected,
        });
    }
    Ok(AttributedGraph {
        graph,
        coding,
        home_country: home_country.to_string(),
    })
}

impl AttributedGraph {
    pub fn coding_of(&self, id: &AccountId) -> Coding {
        self.coding.get(id).copied().unwrap_or(Coding::UNKNOWN)
    }
}
