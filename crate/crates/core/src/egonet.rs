//! Interaction community and the within-community follow graph.
//!
//! The graph is built only from members' own followee lists: an edge `(u, v)`
//! exists when `v` appears in the list of `u` and both are members. The ego is
//! recorded but never becomes a node, since it is tied to every member.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{AccountId, EgoArchive};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionCommunity {
    pub ego: AccountId,
    pub members: BTreeSet<AccountId>,
}

/// `(u, v)` means `u` follows `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedFollowGraph {
    pub ego: AccountId,
    pub nodes: BTreeSet<AccountId>,
    pub edges: BTreeSet<(AccountId, AccountId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrizationMode {
    /// Keep a pair if either direction exists.
    #[default]
    Any,
    /// Keep a pair only if both directions exist.
    Mutual,
}

impl SymmetrizationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetrizationMode::Any => "any",
            SymmetrizationMode::Mutual => "mutual",
        }
    }
}

/// Undirected graph; each edge is stored once as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedFollowGraph {
    pub nodes: BTreeSet<AccountId>,
    pub edges: BTreeSet<(AccountId, AccountId)>,
    pub mode: SymmetrizationMode,
}

pub fn interaction_community(archive: &EgoArchive) -> InteractionCommunity {
    let members = archive
        .followers
        .intersection(&archive.followees)
        .filter(|id| **id != archive.ego.id)
        .cloned()
        .collect();
    InteractionCommunity {
        ego: archive.ego.id.clone(),
        members,
    }
}

pub fn build_graph(archive: &EgoArchive) -> DirectedFollowGraph {
    let community = interaction_community(archive);
    let mut edges = BTreeSet::new();
    for u in &community.members {
        let Some(list) = archive.member_followees.get(u) else {
            continue;
        };
        for v in list {
            if v != u && community.members.contains(v) {
                edges.insert((u.clone(), v.clone()));
            }
        }
    }
    DirectedFollowGraph {
        ego: community.ego,
        nodes: community.members,
        edges,
    }
}

pub fn symmetrize(g: &DirectedFollowGraph, mode: SymmetrizationMode) -> UndirectedFollowGraph {
    let edges = g
        .edges
        .iter()
        .filter(|(u, v)| match mode {
            SymmetrizationMode::Any => true,
            SymmetrizationMode::Mutual => g.edges.contains(&(v.clone(), u.clone())),
        })
        .map(|(u, v)| if u < v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) })
        .collect();
    UndirectedFollowGraph {
        nodes: g.nodes.clone(),
        edges,
        mode,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NodeDegree {
    pub in_degree: usize,
    pub out_degree: usize,
    /// Neighbours linked in both directions.
    pub mutual_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub degrees: BTreeMap<AccountId, NodeDegree>,
    pub density: f64,
}

pub fn degree_summary(g: &DirectedFollowGraph) -> DegreeSummary {
    let mut degrees: BTreeMap<AccountId, NodeDegree> =
        g.nodes.iter().map(|n| (n.clone(), NodeDegree::default())).collect();
    for (u, v) in &g.edges {
        degrees.get_mut(u).expect("edge endpoint is a node").out_degree += 1;
        degrees.get_mut(v).expect("edge endpoint is a node").in_degree += 1;
        if g.edges.contains(&(v.clone(), u.clone())) {
            degrees.get_mut(u).expect("edge endpoint is a node").mutual_degree += 1;
        }
    }
    let n = g.nodes.len();
    let density = if n <= 1 {
        0.0
    } else {
        g.edges.len() as f64 / (n * (n - 1)) as f64
    };
    DegreeSummary { degrees, density }
}

impl UndirectedFollowGraph {
    /// Dense index view: node ids in sorted order and adjacency lists of indices.
    pub fn indexed(&self) -> (Vec<AccountId>, Vec<Vec<usize>>) {
        let ids: Vec<AccountId> = self.nodes.iter().cloned().collect();
        let index: BTreeMap<&AccountId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (u, v) in &self.edges {
            let (a, b) = (index[u], index[v]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        (ids, adj)
    }
}
