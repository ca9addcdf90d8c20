//! Ego archive: one researcher's follower/followee snapshot and its canonical file form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Platform account identity. Opaque, non-empty, ordered by its string form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AccountId(String);

impl AccountId {
    pub fn new(id: impl Into<String>) -> Result<Self, ArchiveError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ArchiveError::SchemaViolation {
                invariant: "account id must be non-empty",
                id: String::new(),
            });
        }
        Ok(AccountId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AccountId {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        if value.is_empty() {
            Err("account id must be non-empty".to_string())
        } else {
            Ok(AccountId(value))
        }
    }
}

impl From<AccountId> for String {
    fn from(id: AccountId) -> String {
        id.0
    }
}

impl From<&str> for AccountId {
    /// Panics on an empty string; intended for literals and tests.
    fn from(s: &str) -> Self {
        assert!(!s.is_empty(), "account id must be non-empty");
        AccountId(s.to_string())
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Self-description metadata of an account, as shown on its public profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountProfile {
    pub id: AccountId,
    #[serde(default)]
    pub handle: String,
    #[serde(default)]
    pub bio: String,
    #[serde(default)]
    pub declared_location: String,
    #[serde(default)]
    pub url: String,
    /// Set when the account's followee list could not be read (protected or suspended).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub protected: bool,
}

impl AccountProfile {
    /// A profile carrying only the id; every other field empty.
    pub fn stub(id: AccountId) -> Self {
        AccountProfile {
            id,
            handle: String::new(),
            bio: String::new(),
            declared_location: String::new(),
            url: String::new(),
            protected: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("schema violation: {invariant} (offending id: {id:?})")]
    SchemaViolation { invariant: &'static str, id: String },
    #[error("malformed archive file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("archive i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Snapshot of one researcher's follow relations.
///
/// `member_followees` holds the raw followee list of every interaction-community
/// member (accounts that both follow and are followed by the ego); its key set is
/// exactly `followers ∩ followees`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoArchive {
    pub ego: AccountProfile,
    pub fetched_at: DateTime<Utc>,
    pub followers: BTreeSet<AccountId>,
    pub followees: BTreeSet<AccountId>,
    pub member_followees: BTreeMap<AccountId, BTreeSet<AccountId>>,
    pub profiles: BTreeMap<AccountId, AccountProfile>,
}

impl EgoArchive {
    /// Checks every archive invariant; the first violation is reported with the offending id.
    pub fn validate(&self) -> Result<(), ArchiveError> {
        let ego = &self.ego.id;
        let violation = |invariant: &'static str, id: &AccountId| ArchiveError::SchemaViolation {
            invariant,
            id: id.to_string(),
        };

        if self.followers.contains(ego) {
            return Err(violation("ego must not appear among its own followers", ego));
        }
        if self.followees.contains(ego) {
            return Err(violation("ego must not appear among its own followees", ego));
        }
        if self.member_followees.contains_key(ego) {
            return Err(violation("ego must not be a key of member_followees", ego));
        }

        let community: BTreeSet<&AccountId> =
            self.followers.intersection(&self.followees).collect();
        for key in self.member_followees.keys() {
            if !community.contains(key) {
                return Err(violation(
                    "member_followees key outside followers ∩ followees",
                    key,
                ));
            }
        }
        for member in &community {
            if !self.member_followees.contains_key(*member) {
                return Err(violation(
                    "interaction-community member missing from member_followees",
                    member,
                ));
            }
        }

        for (id, profile) in &self.profiles {
            if &profile.id != id {
                return Err(violation("profile keyed under a different id", id));
            }
        }
        if !self.profiles.contains_key(ego) {
            return Err(violation("missing profile entry", ego));
        }
        for id in self.referenced_ids() {
            if !self.profiles.contains_key(id) {
                return Err(violation("missing profile entry", id));
            }
        }
        Ok(())
    }

    /// Every account id mentioned in the follow lists, excluding the ego itself.
    pub fn referenced_ids(&self) -> BTreeSet<&AccountId> {
        let mut ids: BTreeSet<&AccountId> = self.followers.iter().collect();
        ids.extend(self.followees.iter());
        for (member, list) in &self.member_followees {
            ids.insert(member);
            ids.extend(list.iter());
        }
        ids
    }

    /// Canonical serialization: pretty JSON, sets and maps sorted by id, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    pub fn from_str_validated(text: &str) -> Result<Self, ArchiveError> {
        let archive: EgoArchive = serde_json::from_str(text)?;
        archive.validate()?;
        Ok(archive)
    }
}

pub fn save_archive(archive: &EgoArchive, path: impl AsRef<Path>) -> Result<(), ArchiveError> {
    archive.validate()?;
    std::fs::write(path, archive.to_canonical_string())?;
    Ok(())
}

pub fn load_archive(path: impl AsRef<Path>) -> Result<EgoArchive, ArchiveError> {
    let text = std::fs::read_to_string(path)?;
    EgoArchive::from_str_validated(&text)
}
