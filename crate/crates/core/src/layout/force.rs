//! Seeded Fruchterman–Reingold spring embedder.
//!
//! Ideal edge length is 1 in an area of `n`. Forces accumulate pair by pair in
//! sorted node order, and a weak pull toward the origin keeps disconnected
//! components in frame. Temperature cools linearly to a floor. After the last
//! iteration positions are fitted into the unit square (aspect preserved,
//! centred) and any coincident nodes are separated by a seeded 1e-6 jitter.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::egonet::UndirectedFollowGraph;
use crate::ingest::AccountId;

pub const JITTER: f64 = 1e-6;
const GRAVITY: f64 = 0.05;
const MIN_DIST: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub positions: BTreeMap<AccountId, (f64, f64)>,
    pub seed: u64,
    pub iterations: usize,
}

pub fn layout(g: &UndirectedFollowGraph, seed: u64, iterations: usize) -> LayoutResult {
    assert!(iterations >= 1, "at least one iteration");
    let (ids, adj) = g.indexed();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if n <= 1 {
        return LayoutResult {
            positions: ids.into_iter().map(|id| (id, (0.5, 0.5))).collect(),
            seed,
            iterations,
        };
    }

    let side = (n as f64).sqrt();
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                (rng.random::<f64>() - 0.5) * side,
                (rng.random::<f64>() - 0.5) * side,
            )
        })
        .collect();
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
        .collect();

    let t0 = side / 10.0;
    let t_min = t0 / 100.0;
    let mut disp = vec![(0.0f64, 0.0f64); n];
    for it in 0..iterations {
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = separation(pos[i], pos[j], i, j);
                let d2 = dx * dx + dy * dy;
                // k² / d along the unit vector: (dx, dy) / d²
                let f = 1.0 / d2;
                disp[i].0 += dx * f;
                disp[i].1 += dy * f;
                disp[j].0 -= dx * f;
                disp[j].1 -= dy * f;
            }
        }
        for &(i, j) in &edges {
            let (dx, dy) = separation(pos[i], pos[j], i, j);
            let d = (dx * dx + dy * dy).sqrt();
            // d² / k along the unit vector: (dx, dy) · d
            disp[i].0 -= dx * d;
            disp[i].1 -= dy * d;
            disp[j].0 += dx * d;
            disp[j].1 += dy * d;
        }
        let t = (t0 * (1.0 - it as f64 / iterations as f64)).max(t_min);
        for i in 0..n {
            disp[i].0 -= GRAVITY * pos[i].0;
            disp[i].1 -= GRAVITY * pos[i].1;
            let len = (disp[i].0 * disp[i].0 + disp[i].1 * disp[i].1).sqrt();
            if len > 0.0 {
                let step = len.min(t) / len;
                pos[i].0 += disp[i].0 * step;
                pos[i].1 += disp[i].1 * step;
            }
        }
    }

    normalize(&mut pos);
    separate_coincident(&mut pos, &mut rng);
    LayoutResult {
        positions: ids.into_iter().zip(pos).collect(),
        seed,
        iterations,
    }
}

/// Vector from `b` to `a`, replaced by a fixed tiny offset when the two coincide.
fn separation(a: (f64, f64), b: (f64, f64), i: usize, j: usize) -> (f64, f64) {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    if dx * dx + dy * dy < MIN_DIST * MIN_DIST {
        let angle = (i * 31 + j * 17) as f64;
        (MIN_DIST * angle.cos(), MIN_DIST * angle.sin())
    } else {
        (dx, dy)
    }
}

fn normalize(pos: &mut [(f64, f64)]) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pos.iter() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let scale = (x1 - x0).max(y1 - y0);
    if !(scale > 0.0) || !scale.is_finite() {
        pos.iter_mut().for_each(|p| *p = (0.5, 0.5));
        return;
    }
    let ox = (1.0 - (x1 - x0) / scale) / 2.0;
    let oy = (1.0 - (y1 - y0) / scale) / 2.0;
    for p in pos.iter_mut() {
        p.0 = ((p.0 - x0) / scale + ox).clamp(0.0, 1.0);
        p.1 = ((p.1 - y0) / scale + oy).clamp(0.0, 1.0);
    }
}

fn separate_coincident(pos: &mut [(f64, f64)], rng: &mut ChaCha8Rng) {
    let key = |p: (f64, f64)| (p.0.to_bits(), p.1.to_bits());
    let mut seen: BTreeSet<(u64, u64)> = BTreeSet::new();
    for p in pos.iter_mut() {
        while !seen.insert(key(*p)) {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let mut q = (p.0 + JITTER * angle.cos(), p.1 + JITTER * angle.sin());
            // reflect back inside the unit square
            if !(0.0..=1.0).contains(&q.0) {
                q.0 = p.0 - JITTER * angle.cos();
            }
            if !(0.0..=1.0).contains(&q.1) {
                q.1 = p.1 - JITTER * angle.sin();
            }
            *p = q;
        }
    }
}
