//! Two-phase, budgeted, resumable retrieval of an ego archive.
//!
//! Phase one reads the ego's follower and followee lists; phase two reads the
//! followee list of every interaction-community member, then profile metadata
//! for the ego's direct contacts. A single call spends at most one window's worth
//! of requests. When the budget runs out the accumulated state is returned as a
//! [`FetchCursor`] that a later call resumes from.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::archive::{AccountId, AccountProfile, ArchiveError, EgoArchive};
use super::client::{ClientError, ListKind, ListProvider};

/// Attempts per request before a transient failure becomes fatal.
pub const MAX_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FetchBudget {
    pub max_requests_per_window: usize,
    /// Window length in seconds.
    pub window: u64,
    pub max_pages_per_list: usize,
}

impl Default for FetchBudget {
    fn default() -> Self {
        FetchBudget {
            max_requests_per_window: 15,
            window: 900,
            max_pages_per_list: 500,
        }
    }
}

impl FetchBudget {
    pub fn unlimited() -> Self {
        FetchBudget {
            max_requests_per_window: usize::MAX,
            window: 1,
            max_pages_per_list: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<(), FetchError> {
        if self.max_requests_per_window == 0 {
            return Err(FetchError::InvalidBudget("max_requests_per_window must be positive"));
        }
        if self.window == 0 {
            return Err(FetchError::InvalidBudget("window must be positive"));
        }
        if self.max_pages_per_list == 0 {
            return Err(FetchError::InvalidBudget("max_pages_per_list must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid fetch budget: {0}")]
    InvalidBudget(&'static str),
    #[error("unknown handle {0:?}")]
    UnknownHandle(String),
    #[error("request budget exhausted after {requests_used} requests; resume from the saved cursor")]
    BudgetExhausted {
        cursor: Box<FetchCursor>,
        requests_used: usize,
    },
    #[error("{list} list of {account} exceeds {max_pages} pages")]
    PageLimit {
        account: AccountId,
        list: &'static str,
        max_pages: usize,
    },
    #[error("transport failure: {0}")]
    Transport(String),
}

/// Progress through one paginated list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListProgress {
    pub ids: BTreeSet<AccountId>,
    pub next: Option<String>,
    pub pages: usize,
    pub done: bool,
}

/// Resumable fetch state; also the partial archive handed back on budget exhaustion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FetchCursor {
    pub handle: String,
    pub started_at: DateTime<Utc>,
    pub ego: Option<AccountProfile>,
    pub followers: ListProgress,
    pub followees: ListProgress,
    pub member_lists: BTreeMap<AccountId, ListProgress>,
    pub protected: BTreeSet<AccountId>,
    pub profiles: BTreeMap<AccountId, AccountProfile>,
}

impl FetchCursor {
    pub fn new(handle: &str, started_at: DateTime<Utc>) -> Self {
        FetchCursor {
            handle: handle.to_string(),
            started_at,
            ego: None,
            followers: ListProgress::default(),
            followees: ListProgress::default(),
            member_lists: BTreeMap::new(),
            protected: BTreeSet::new(),
            profiles: BTreeMap::new(),
        }
    }

    /// Members known so far; complete once both ego lists are done.
    pub fn community(&self) -> BTreeSet<AccountId> {
        self.followers.ids.intersection(&self.followees.ids).cloned().collect()
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("cursor serializes");
        text.push('\n');
        std::fs::write(path, text)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ArchiveError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn is_complete(&self) -> bool {
        self.ego.is_some()
            && self.followers.done
            && self.followees.done
            && self
                .community()
                .iter()
                .all(|m| self.member_lists.get(m).is_some_and(|p| p.done))
            && self.pending_profiles().is_empty()
    }

    fn pending_profiles(&self) -> Vec<AccountId> {
        if !(self.followers.done && self.followees.done) {
            return Vec::new();
        }
        self.followers
            .ids
            .union(&self.followees.ids)
            .filter(|id| !self.profiles.contains_key(*id))
            .cloned()
            .collect()
    }
}

enum Step {
    Resolve,
    EgoList(ListKind),
    MemberList(AccountId),
    Profiles(Vec<AccountId>),
    Done,
}

struct Requests {
    used: usize,
    limit: usize,
}

impl Requests {
    fn take(&mut self) -> bool {
        if self.used < self.limit {
            self.used += 1;
            true
        } else {
            false
        }
    }
}

/// Fetch a complete archive for `handle`, spending at most one window of budget.
pub fn fetch_ego<C: ListProvider + ?Sized>(
    handle: &str,
    client: &C,
    budget: &FetchBudget,
) -> Result<EgoArchive, FetchError> {
    budget.validate()?;
    let cursor = FetchCursor::new(handle, client.snapshot_time());
    resume_fetch(cursor, client, budget)
}

/// Continue a fetch from `cursor`. Converges to the same archive as an uninterrupted fetch.
pub fn resume_fetch<C: ListProvider + ?Sized>(
    mut cursor: FetchCursor,
    client: &C,
    budget: &FetchBudget,
) -> Result<EgoArchive, FetchError> {
    budget.validate()?;
    let mut requests = Requests {
        used: 0,
        limit: budget.max_requests_per_window,
    };

    loop {
        let step = next_step(&cursor, client.lookup_batch_size());
        if let Step::Done = step {
            return Ok(assemble(cursor));
        }
        let outcome = perform(&step, &cursor, client, &mut requests);
        let result = match outcome {
            Some(r) => r,
            None => {
                return Err(FetchError::BudgetExhausted {
                    cursor: Box::new(cursor),
                    requests_used: requests.used,
                })
            }
        };
        apply(&mut cursor, step, result, budget)?;
    }
}

fn next_step(cursor: &FetchCursor, lookup_batch: usize) -> Step {
    if cursor.ego.is_none() {
        return Step::Resolve;
    }
    if !cursor.followers.done {
        return Step::EgoList(ListKind::Followers);
    }
    if !cursor.followees.done {
        return Step::EgoList(ListKind::Followees);
    }
    for member in cursor.community() {
        if !cursor.member_lists.get(&member).is_some_and(|p| p.done) {
            return Step::MemberList(member);
        }
    }
    let pending = cursor.pending_profiles();
    if !pending.is_empty() {
        return Step::Profiles(pending.into_iter().take(lookup_batch.max(1)).collect());
    }
    Step::Done
}

enum Outcome {
    Profile(AccountProfile),
    Page(super::client::Page),
    Profiles(Vec<AccountProfile>),
    Unreadable,
}

/// Issues the request for `step`, retrying transient failures. `None` means the budget ran out.
fn perform<C: ListProvider + ?Sized>(
    step: &Step,
    cursor: &FetchCursor,
    client: &C,
    requests: &mut Requests,
) -> Option<Result<Outcome, FetchError>> {
    let mut last_error = String::new();
    for _ in 0..MAX_ATTEMPTS {
        if !requests.take() {
            return None;
        }
        let ego_id = cursor.ego.as_ref().map(|e| e.id.clone());
        let result = match step {
            Step::Resolve => client.resolve(&cursor.handle).map(Outcome::Profile),
            Step::EgoList(kind) => {
                let progress = match kind {
                    ListKind::Followers => &cursor.followers,
                    ListKind::Followees => &cursor.followees,
                };
                let ego = ego_id.expect("ego resolved before its lists");
                client
                    .list_page(&ego, *kind, progress.next.as_deref())
                    .map(Outcome::Page)
            }
            Step::MemberList(member) => {
                let next = cursor.member_lists.get(member).and_then(|p| p.next.as_deref());
                match client.list_page(member, ListKind::Followees, next) {
                    Ok(page) => Ok(Outcome::Page(page)),
                    Err(ClientError::Protected(_)) | Err(ClientError::NotFound(_)) => {
                        Ok(Outcome::Unreadable)
                    }
                    Err(e) => Err(e),
                }
            }
            Step::Profiles(ids) => client.lookup_profiles(ids).map(Outcome::Profiles),
            Step::Done => unreachable!(),
        };
        match result {
            Ok(outcome) => return Some(Ok(outcome)),
            Err(ClientError::Transient(msg)) => last_error = msg,
            Err(ClientError::NotFound(_)) if matches!(step, Step::Resolve) => {
                return Some(Err(FetchError::UnknownHandle(cursor.handle.clone())))
            }
            Err(e) => return Some(Err(FetchError::Transport(e.to_string()))),
        }
    }
    Some(Err(FetchError::Transport(format!(
        "gave up after {MAX_ATTEMPTS} attempts: {last_error}"
    ))))
}

fn apply(
    cursor: &mut FetchCursor,
    step: Step,
    outcome: Result<Outcome, FetchError>,
    budget: &FetchBudget,
) -> Result<(), FetchError> {
    let outcome = outcome?;
    let ego_id = cursor.ego.as_ref().map(|e| e.id.clone());
    match (step, outcome) {
        (Step::Resolve, Outcome::Profile(p)) => cursor.ego = Some(p),
        (Step::EgoList(kind), Outcome::Page(page)) => {
            let ego = ego_id.expect("ego resolved");
            let (progress, list) = match kind {
                ListKind::Followers => (&mut cursor.followers, "followers"),
                ListKind::Followees => (&mut cursor.followees, "followees"),
            };
            absorb_page(progress, page, Some(&ego), &ego, list, budget)?;
        }
        (Step::MemberList(member), Outcome::Page(page)) => {
            let progress = cursor.member_lists.entry(member.clone()).or_default();
            absorb_page(progress, page, None, &member, "followees", budget)?;
        }
        (Step::MemberList(member), Outcome::Unreadable) => {
            cursor.member_lists.insert(
                member.clone(),
                ListProgress {
                    done: true,
                    ..ListProgress::default()
                },
            );
            cursor.protected.insert(member);
        }
        (Step::Profiles(requested), Outcome::Profiles(found)) => {
            let requested: BTreeSet<AccountId> = requested.into_iter().collect();
            for mut p in found {
                if requested.contains(&p.id) {
                    p.protected = false;
                    cursor.profiles.insert(p.id.clone(), p);
                }
            }
            // Accounts the platform no longer returns keep an id-only profile.
            for id in requested {
                cursor
                    .profiles
                    .entry(id.clone())
                    .or_insert_with(|| AccountProfile::stub(id));
            }
        }
        _ => return Err(FetchError::Transport("response did not match request".into())),
    }
    Ok(())
}

fn absorb_page(
    progress: &mut ListProgress,
    page: super::client::Page,
    exclude: Option<&AccountId>,
    account: &AccountId,
    list: &'static str,
    budget: &FetchBudget,
) -> Result<(), FetchError> {
    progress.pages += 1;
    progress
        .ids
        .extend(page.ids.into_iter().filter(|id| Some(id) != exclude));
    progress.done = page.next.is_none();
    progress.next = page.next;
    if !progress.done && progress.pages >= budget.max_pages_per_list {
        return Err(FetchError::PageLimit {
            account: account.clone(),
            list,
            max_pages: budget.max_pages_per_list,
        });
    }
    Ok(())
}

fn assemble(cursor: FetchCursor) -> EgoArchive {
    let community = cursor.community();
    let mut ego = cursor.ego.expect("complete cursor has an ego");
    ego.protected = false;
    let mut member_lists = cursor.member_lists;
    let member_followees: BTreeMap<AccountId, BTreeSet<AccountId>> = community
        .iter()
        .map(|m| {
            let ids = member_lists.remove(m).map(|p| p.ids).unwrap_or_default();
            (m.clone(), ids)
        })
        .collect();

    let mut archive = EgoArchive {
        ego: ego.clone(),
        fetched_at: cursor.started_at,
        followers: cursor.followers.ids,
        followees: cursor.followees.ids,
        member_followees,
        profiles: BTreeMap::new(),
    };
    let mut fetched = cursor.profiles;
    let mut profiles = BTreeMap::new();
    profiles.insert(ego.id.clone(), ego);
    for id in archive.referenced_ids() {
        if *id == archive.ego.id {
            continue;
        }
        let mut p = fetched
            .remove(id)
            .unwrap_or_else(|| AccountProfile::stub(id.clone()));
        p.protected = cursor.protected.contains(id);
        profiles.insert(id.clone(), p);
    }
    archive.profiles = profiles;
    archive
}
