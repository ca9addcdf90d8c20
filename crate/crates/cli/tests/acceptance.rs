//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use engagemap_core::analysis::{
    category_shares, classify_profile, cluster, mixing_matrix, modularity, non_academic_share, relations_summary,
    round_percent, Clustering, Dimension, ProfileLabel, ProfileThresholds, RelationsSummary,
};
use engagemap_core::ingest::{load_archive, save_archive, synth_generate, SyntheticProfileSpec};
use engagemap_core::layout::{layout, ExportFormat, ExportedGraph};
use engagemap_core::pipeline::{analyze, render_report, report_value, RunConfig};
use engagemap_core::{
    annotate, build_graph, interaction_community, symmetrize, Affiliation, AttributedGraph, SymmetrizationMode,
    UndirectedFollowGraph,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_config(name: &str) -> PathBuf {
    fixtures_root().join(name).join("pipeline.toml")
}

const FIXTURES: [&str; 2] = ["researcher-1", "researcher-2"];

fn relations() -> Outcome {
    let expected = [("researcher-1", (251, 81, 44)), ("researcher-2", (221, 232, 110))];
    for (name, (fr, fe, c)) in expected {
        let a = load_archive(fixtures_root().join(name).join("archive.json")).map_err(|e| e.to_string())?;
        let got = relations_summary(&a);
        let want = RelationsSummary {
            followers: fr,
            followees: fe,
            community: c,
        };
        ensure!(got == want, "{name}: {got:?} != {want:?}");
    }
    Ok("(251, 81, 44) and (221, 232, 110)".into())
}

fn shares() -> Outcome {
    let a1 = analyze(&RunConfig::load(fixture_config("researcher-1")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let academic = category_shares(&a1.attributed, Dimension::Affiliation).share("academic") * 100.0;
    ensure!((academic - 96.0).abs() <= 1.0, "researcher-1 academic {academic:.3}%");

    let a2 = analyze(&RunConfig::load(fixture_config("researcher-2")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let non_academic = non_academic_share(&a2.attributed) * 100.0;
    ensure!((non_academic - 45.0).abs() <= 1.0, "researcher-2 non-academic {non_academic:.3}%");
    let unknown = category_shares(&a2.attributed, Dimension::Affiliation).count("unknown");
    ensure!(unknown == 6, "researcher-2 has {unknown} unknown affiliations");
    Ok(format!(
        "academic {academic:.2}% -> {}%, non-academic {non_academic:.2}% -> {}%, unknown {unknown}",
        round_percent(academic / 100.0),
        round_percent(non_academic / 100.0)
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut largest = 0;
    for i in 0..200 {
        let n = if i == 0 { 200 } else { rng.random_range(0..=200) };
        let a = random_archive(rng.random(), n);
        let members: BTreeSet<_> = oracle_community(&a).into_iter().collect();
        ensure!(interaction_community(&a).members == members, "archive {i}: community differs");
        let g = build_graph(&a);
        ensure!(g.nodes == members, "archive {i}: graph nodes differ");
        let edges: BTreeSet<_> = oracle_edges(&a).into_iter().collect();
        ensure!(g.edges == edges, "archive {i}: graph edges differ");
        largest = largest.max(members.len());
    }
    Ok(format!("200 archives, largest community {largest}"))
}

/// Two poles of 55: academic and global against stakeholder and local.
fn two_pole_spec(seed: u64) -> SyntheticProfileSpec {
    let academic = BTreeMap::from([
        (Affiliation::Academic, 0.90),
        (Affiliation::Ngo, 0.03),
        (Affiliation::PublicSector, 0.02),
        (Affiliation::Unknown, 0.05),
    ]);
    let stakeholder = BTreeMap::from([
        (Affiliation::Academic, 0.08),
        (Affiliation::PublicSector, 0.37),
        (Affiliation::PrivateSector, 0.30),
        (Affiliation::Politician, 0.10),
        (Affiliation::Ngo, 0.10),
        (Affiliation::Unknown, 0.05),
    ]);
    let base = SyntheticProfileSpec::one_pole(110, 0.3, 1.0, seed);
    SyntheticProfileSpec {
        pole_count: 2,
        inter_pole_edge_prob: 0.02,
        category_mix_per_pole: vec![academic, stakeholder],
        local_fraction_per_pole: vec![0.2, 0.85],
        extra_followers: 111,
        extra_followees: 122,
        ..base
    }
}

fn synth_attributed(spec: &SyntheticProfileSpec) -> (AttributedGraph, BTreeMap<engagemap_core::AccountId, usize>) {
    let (archive, truth) = synth_generate(spec).expect("valid spec");
    let coding = truth.iter().map(|(id, t)| (id.clone(), t.coding())).collect();
    let ag = annotate(build_graph(&archive), coding, &spec.home_country).expect("codes cover members");
    let poles = truth.iter().map(|(id, t)| (id.clone(), t.pole)).collect();
    (ag, poles)
}

fn two_pole_recovery() -> Outcome {
    let thresholds = ProfileThresholds::default();
    let (mut recovered, mut engaged, mut academic) = (0, 0, 0);
    let mut worst = 1.0f64;
    for seed in 0..20u64 {
        let spec = two_pole_spec(1000 + seed);
        ensure!(spec.intra_pole_edge_prob / spec.inter_pole_edge_prob >= 10.0, "ratio below 10");
        let (ag, poles) = synth_attributed(&spec);
        ensure!(ag.graph.nodes.len() == 110, "community size {}", ag.graph.nodes.len());
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let c = cluster(&u, 1.0, seed);
        let order: Vec<_> = poles.keys().cloned().collect();
        let truth: Vec<usize> = order.iter().map(|id| poles[id]).collect();
        let agreement = best_permutation_agreement(&truth, &clustering_labels(&c, &order));
        worst = worst.min(agreement);
        if agreement >= 0.9 {
            recovered += 1;
        }
        if classify_profile(&ag, &c, &thresholds).label == ProfileLabel::LocallyEngaged {
            engaged += 1;
        }

        let one = SyntheticProfileSpec::one_pole(44, 0.25, 0.95, 2000 + seed);
        let (ag1, _) = synth_attributed(&one);
        let c1 = cluster(&symmetrize(&ag1.graph, SymmetrizationMode::Any), 1.0, seed);
        if classify_profile(&ag1, &c1, &thresholds).label == ProfileLabel::GloballyAcademic {
            academic += 1;
        }
    }
    let detail = format!(
        "recovered {recovered}/20 (worst agreement {worst:.3}), locally_engaged {engaged}/20, globally_academic {academic}/20"
    );
    ensure!(recovered >= 18 && engaged >= 18 && academic >= 18, "{detail}");
    Ok(detail)
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).expect("output dir") {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            out.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap());
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut total = 0;
    for name in FIXTURES {
        let mut trees = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(name).join(run);
            let o = Command::new(env!("CARGO_BIN_EXE_engagemap"))
                .arg("pipeline")
                .arg("--config")
                .arg(fixture_config(name))
                .arg("--out-dir")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
            trees.push(tree(&out));
        }
        for f in ["map.svg", "graph.graphml", "report.txt"] {
            ensure!(trees[0].contains_key(f), "{name}: no {f}");
        }
        let (a, b) = (&trees[0], &trees[1]);
        ensure!(a.keys().eq(b.keys()), "{name}: file sets differ");
        for (f, bytes) in a {
            ensure!(b[f] == *bytes, "{name}: {f} differs between runs");
        }
        total += a.len();
    }
    Ok(format!("{total} files identical across runs"))
}

fn check_invariants(label: &str, ag: &AttributedGraph, u: &UndirectedFollowGraph, c: &Clustering, gamma: f64) -> Result<(), String> {
    for dim in Dimension::ALL {
        let s = category_shares(ag, dim);
        let total: f64 = s.entries.iter().map(|e| e.share).sum();
        ensure!(ag.graph.nodes.is_empty() || (total - 1.0).abs() <= 1e-9, "{label}: {} shares sum {total}", dim.as_str());
        if let Ok(m) = mixing_matrix(ag, dim) {
            let sum: f64 = m.m.iter().flatten().sum();
            ensure!((sum - 1.0).abs() <= 1e-9, "{label}: {} mixing sums {sum}", dim.as_str());
            ensure!(
                (-1.0..=1.0).contains(&m.assortativity),
                "{label}: assortativity {}",
                m.assortativity
            );
        }
    }
    let brute = oracle_modularity(u, &c.assignment, gamma);
    ensure!((c.modularity - brute).abs() <= 1e-9, "{label}: modularity {} vs {brute}", c.modularity);
    ensure!((modularity(u, &c.assignment, gamma) - brute).abs() <= 1e-9, "{label}: modularity() vs oracle");
    Ok(())
}

fn numerical_invariants() -> Outcome {
    for name in FIXTURES {
        let cfg = RunConfig::load(fixture_config(name)).map_err(|e| e.to_string())?;
        let a = analyze(&cfg).map_err(|e| e.to_string())?;
        let u = symmetrize(&a.attributed.graph, a.symmetrization);
        check_invariants(name, &a.attributed, &u, &a.clustering, cfg.resolution)?;
        let report = render_report(&a);
        let reported: f64 = report_value(&report, "clusters.modularity")
            .and_then(|v| v.parse().ok())
            .ok_or("report lacks clusters.modularity")?;
        let brute = oracle_modularity(&u, &a.clustering.assignment, cfg.resolution);
        ensure!((reported - brute).abs() <= 1e-9, "{name}: reported modularity {reported} vs {brute}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let n = rng.random_range(1..80);
        let p = rng.random_range(0.01..0.4);
        let gamma = rng.random_range(0.5..2.0);
        let ag = random_attributed(rng.random(), n, p);
        let mode = if i % 2 == 0 { SymmetrizationMode::Any } else { SymmetrizationMode::Mutual };
        let u = symmetrize(&ag.graph, mode);
        let c = cluster(&u, gamma, i);
        check_invariants(&format!("random graph {i}"), &ag, &u, &c, gamma)?;
    }
    Ok("2 fixtures + 50 random graphs".into())
}

fn round_trips() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..50 {
        let a = random_archive(rng.random(), rng.random_range(0..120));
        let path = tmp.path().join(format!("a{i}.json"));
        save_archive(&a, &path).map_err(|e| e.to_string())?;
        let back = load_archive(&path).map_err(|e| e.to_string())?;
        ensure!(back == a, "instance {i}: archive changed through save/load");

        let ag = random_attributed(rng.random(), rng.random_range(0..60), rng.random_range(0.0..0.3));
        let u = symmetrize(&ag.graph, SymmetrizationMode::Any);
        let c = cluster(&u, 1.0, i);
        let l = layout(&u, i, 30);
        let g = ExportedGraph::assemble(&ag, &c, &l).map_err(|e| e.to_string())?;
        for f in ExportFormat::ALL {
            let parsed = ExportedGraph::parse(f, &g.render(f)).map_err(|e| e.to_string())?;
            ensure!(parsed == g, "instance {i}: {} export does not reparse to the same graph", f.extension());
        }
    }
    Ok("50 archives, 150 exports".into())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 7] = [
        ("1 relations", Duration::from_secs(1), relations),
        ("2 shares", Duration::from_secs(1), shares),
        ("3 oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("4 two-pole recovery", Duration::from_secs(120), two_pole_recovery),
        ("5 determinism", Duration::from_secs(60), determinism),
        ("6 numerical invariants", Duration::from_secs(60), numerical_invariants),
        ("7 round trips", Duration::from_secs(30), round_trips),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(d) => println!("PASS {name} ({elapsed:.2?}): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({elapsed:.2?}): {d}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
