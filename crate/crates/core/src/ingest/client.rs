//! Remote list providers: the abstract interface and the fixture-replay implementation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};

use super::archive::{AccountId, AccountProfile, EgoArchive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListKind {
    Followers,
    Followees,
}

impl ListKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ListKind::Followers => "followers",
            ListKind::Followees => "followees",
        }
    }
}

/// One page of a paginated id list. `next` is `None` on the last page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub ids: Vec<AccountId>,
    pub next: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("account {0} is protected")]
    Protected(AccountId),
    /// Retryable failure, including a page that arrived incomplete.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

/// Source of follower/followee lists. Every method call counts as one request.
pub trait ListProvider {
    fn resolve(&self, handle: &str) -> Result<AccountProfile, ClientError>;

    fn list_page(
        &self,
        account: &AccountId,
        kind: ListKind,
        cursor: Option<&str>,
    ) -> Result<Page, ClientError>;

    fn lookup_profiles(&self, ids: &[AccountId]) -> Result<Vec<AccountProfile>, ClientError>;

    /// Maximum ids per `lookup_profiles` call.
    fn lookup_batch_size(&self) -> usize {
        100
    }

    /// Timestamp recorded as the archive's `fetched_at` when a fetch starts.
    fn snapshot_time(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Replays a stored archive as if it were the remote platform.
///
/// Followee lists of non-members are unknown to the fixture and answer `NotFound`.
#[derive(Debug)]
pub struct FixtureClient {
    ego: AccountProfile,
    fetched_at: DateTime<Utc>,
    followers: Vec<AccountId>,
    followees: Vec<AccountId>,
    member_followees: BTreeMap<AccountId, Vec<AccountId>>,
    profiles: BTreeMap<AccountId, AccountProfile>,
    protected: BTreeSet<AccountId>,
    page_size: usize,
    lookup_batch: usize,
    fail_every: Option<usize>,
    calls: AtomicUsize,
}

impl FixtureClient {
    pub fn from_archive(archive: &EgoArchive) -> Self {
        let protected: BTreeSet<AccountId> = archive
            .profiles
            .values()
            .filter(|p| p.protected)
            .map(|p| p.id.clone())
            .collect();
        let profiles = archive
            .profiles
            .iter()
            .map(|(id, p)| {
                let mut p = p.clone();
                p.protected = false;
                (id.clone(), p)
            })
            .collect();
        let mut ego = archive.ego.clone();
        ego.protected = false;
        FixtureClient {
            ego,
            fetched_at: archive.fetched_at,
            followers: archive.followers.iter().cloned().collect(),
            followees: archive.followees.iter().cloned().collect(),
            member_followees: archive
                .member_followees
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            profiles,
            protected,
            page_size: 50,
            lookup_batch: 100,
            fail_every: None,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_page_size(mut self, page_size: usize) -> Self {
        assert!(page_size > 0);
        self.page_size = page_size;
        self
    }

    pub fn with_lookup_batch(mut self, batch: usize) -> Self {
        assert!(batch > 0);
        self.lookup_batch = batch;
        self
    }

    /// Every `n`-th call fails with a transient error (deterministic fault injection).
    pub fn failing_every(mut self, n: usize) -> Self {
        assert!(n > 1);
        self.fail_every = Some(n);
        self
    }

    /// Total calls served so far, failed ones included.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn tick(&self) -> Result<(), ClientError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        match self.fail_every {
            Some(k) if n % k == 0 => Err(ClientError::Transient(format!("injected failure on call {n}"))),
            _ => Ok(()),
        }
    }

    fn paginate(&self, list: &[AccountId], cursor: Option<&str>) -> Result<Page, ClientError> {
        let start = match cursor {
            None => 0,
            Some(c) => c
                .parse::<usize>()
                .map_err(|_| ClientError::Fatal(format!("bad cursor {c:?}")))?,
        };
        let end = (start + self.page_size).min(list.len());
        let ids = list.get(start..end).unwrap_or_default().to_vec();
        let next = (end < list.len()).then(|| end.to_string());
        Ok(Page { ids, next })
    }
}

impl ListProvider for FixtureClient {
    fn resolve(&self, handle: &str) -> Result<AccountProfile, ClientError> {
        self.tick()?;
        let bare = handle.trim_start_matches('@');
        if bare == self.ego.handle.trim_start_matches('@') || bare == self.ego.id.as_str() {
            Ok(self.ego.clone())
        } else {
            Err(ClientError::NotFound(handle.to_string()))
        }
    }

    fn list_page(
        &self,
        account: &AccountId,
        kind: ListKind,
        cursor: Option<&str>,
    ) -> Result<Page, ClientError> {
        self.tick()?;
        if account == &self.ego.id {
            return match kind {
                ListKind::Followers => self.paginate(&self.followers, cursor),
                ListKind::Followees => self.paginate(&self.followees, cursor),
            };
        }
        if self.protected.contains(account) {
            return Err(ClientError::Protected(account.clone()));
        }
        match (kind, self.member_followees.get(account)) {
            (ListKind::Followees, Some(list)) => self.paginate(list, cursor),
            _ => Err(ClientError::NotFound(format!("{} of {account}", kind.as_str()))),
        }
    }

    fn lookup_profiles(&self, ids: &[AccountId]) -> Result<Vec<AccountProfile>, ClientError> {
        self.tick()?;
        Ok(ids.iter().filter_map(|id| self.profiles.get(id).cloned()).collect())
    }

    fn lookup_batch_size(&self) -> usize {
        self.lookup_batch
    }

    fn snapshot_time(&self) -> DateTime<Utc> {
        self.fetched_at
    }
}
