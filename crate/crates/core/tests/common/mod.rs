//! Random instance generators and brute-force oracles shared by integration
//! and acceptance tests. Oracles use plain vectors and linear scans so they
//! share no code path with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use engagemap_core::analysis::Clustering;
use engagemap_core::{
    annotate, AccountId, AccountProfile, Affiliation, AttributedGraph, Coding, CodingMap, DirectedFollowGraph,
    EgoArchive, Geography, UndirectedFollowGraph,
};

pub fn id(s: impl AsRef<str>) -> AccountId {
    AccountId::new(s.as_ref()).unwrap()
}

/// Archive over `n` non-ego accounts with independent follow probabilities.
pub fn random_archive(seed: u64, n: usize) -> EgoArchive {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ego = id("ego");
    let accounts: Vec<AccountId> = (0..n).map(|i| id(format!("u{i}"))).collect();
    let p_follower = rng.random_range(0.2..0.9);
    let p_followee = rng.random_range(0.2..0.9);
    let p_edge = rng.random_range(0.0..0.5);
    let followers: BTreeSet<AccountId> = accounts.iter().filter(|_| rng.random_bool(p_follower)).cloned().collect();
    let followees: BTreeSet<AccountId> = accounts.iter().filter(|_| rng.random_bool(p_followee)).cloned().collect();
    let members: Vec<AccountId> = followers.intersection(&followees).cloned().collect();
    let mut member_followees = BTreeMap::new();
    for m in &members {
        let mut list: BTreeSet<AccountId> = accounts
            .iter()
            .filter(|a| *a != m && rng.random_bool(p_edge))
            .cloned()
            .collect();
        if rng.random_bool(0.7) {
            list.insert(ego.clone());
        }
        member_followees.insert(m.clone(), list);
    }
    let mut profiles = BTreeMap::new();
    profiles.insert(ego.clone(), AccountProfile::stub(ego.clone()));
    for a in &accounts {
        let mut p = AccountProfile::stub(a.clone());
        p.handle = format!("h_{a}");
        p.bio = if rng.random_bool(0.5) { "bio, with \"quotes\"".into() } else { String::new() };
        p.protected = rng.random_bool(0.05);
        profiles.insert(a.clone(), p);
    }
    let archive = EgoArchive {
        ego: profiles[&ego].clone(),
        fetched_at: Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds((seed % 100_000_000) as i64),
        followers,
        followees,
        member_followees,
        profiles,
    };
    archive.validate().unwrap();
    archive
}

pub fn random_coding(rng: &mut ChaCha8Rng, nodes: &BTreeSet<AccountId>) -> CodingMap {
    nodes
        .iter()
        .map(|n| {
            (
                n.clone(),
                Coding {
                    geography: Geography::ALL[rng.random_range(0..Geography::ALL.len())],
                    affiliation: Affiliation::ALL[rng.random_range(0..Affiliation::ALL.len())],
                },
            )
        })
        .collect()
}

/// Directed graph on `n` nodes with edge probability `p`, randomly coded.
pub fn random_attributed(seed: u64, n: usize, p: f64) -> AttributedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: BTreeSet<AccountId> = (0..n).map(|i| id(format!("v{i:03}"))).collect();
    let list: Vec<&AccountId> = nodes.iter().collect();
    let mut edges = BTreeSet::new();
    for u in &list {
        for v in &list {
            if u != v && rng.random_bool(p) {
                edges.insert(((*u).clone(), (*v).clone()));
            }
        }
    }
    let coding = random_coding(&mut rng, &nodes);
    annotate(
        DirectedFollowGraph {
            ego: id("ego"),
            nodes,
            edges,
        },
        coding,
        "Netherlands",
    )
    .unwrap()
}

/// Members by definition: followers that are also followees, minus the ego.
pub fn oracle_community(a: &EgoArchive) -> Vec<AccountId> {
    let followers: Vec<&AccountId> = a.followers.iter().collect();
    let followees: Vec<&AccountId> = a.followees.iter().collect();
    let mut out = Vec::new();
    for f in &followers {
        if **f == a.ego.id {
            continue;
        }
        if followees.iter().any(|g| g == f) {
            out.push((*f).clone());
        }
    }
    out
}

/// All ordered member pairs `(u, v)`, `u ≠ v`, with `v` on `u`'s followee list.
pub fn oracle_edges(a: &EgoArchive) -> Vec<(AccountId, AccountId)> {
    let members = oracle_community(a);
    let mut out = Vec::new();
    for u in &members {
        let list: Vec<&AccountId> = a.member_followees.get(u).map(|l| l.iter().collect()).unwrap_or_default();
        for v in &members {
            if u != v && list.iter().any(|x| *x == v) {
                out.push((u.clone(), v.clone()));
            }
        }
    }
    out
}

/// Newman modularity by the full double sum over node pairs.
pub fn oracle_modularity(g: &UndirectedFollowGraph, assignment: &BTreeMap<AccountId, usize>, gamma: f64) -> f64 {
    let nodes: Vec<&AccountId> = g.nodes.iter().collect();
    let m = g.edges.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let adj = |a: &AccountId, b: &AccountId| {
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if g.edges.contains(&key) {
            1.0
        } else {
            0.0
        }
    };
    let deg: Vec<f64> = nodes
        .iter()
        .map(|u| g.edges.iter().filter(|(a, b)| a == *u || b == *u).count() as f64)
        .collect();
    let mut q = 0.0;
    for (i, u) in nodes.iter().enumerate() {
        for (j, v) in nodes.iter().enumerate() {
            if assignment[*u] == assignment[*v] {
                let a = if i == j { 0.0 } else { adj(u, v) };
                q += a - gamma * deg[i] * deg[j] / (2.0 * m);
            }
        }
    }
    q / (2.0 * m)
}

/// Largest fraction of nodes on which `found` agrees with `truth` under some label bijection.
/// Exact for up to 8 found labels; extra labels are treated as unmatched.
pub fn best_permutation_agreement(truth: &[usize], found: &[usize]) -> f64 {
    assert_eq!(truth.len(), found.len());
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let kf = found.iter().max().map_or(0, |m| m + 1).min(8);
    let mut counts = vec![vec![0usize; kt]; kf];
    for (&t, &f) in truth.iter().zip(found) {
        if f < kf {
            counts[f][t] += 1;
        }
    }
    // depth-first over injective maps found-label → truth-label (or unmatched)
    fn go(f: usize, used: &mut Vec<bool>, counts: &[Vec<usize>]) -> usize {
        if f == counts.len() {
            return 0;
        }
        let mut best = go(f + 1, used, counts);
        for t in 0..used.len() {
            if !used[t] {
                used[t] = true;
                best = best.max(counts[f][t] + go(f + 1, used, counts));
                used[t] = false;
            }
        }
        best
    }
    go(0, &mut vec![false; kt], &counts) as f64 / truth.len().max(1) as f64
}

pub fn clustering_labels(c: &Clustering, order: &[AccountId]) -> Vec<usize> {
    order.iter().map(|id| c.assignment[id]).collect()
}
