//! End-to-end run: archive and coding sheet in, report, map and exports out.
//!
//! Every artifact is built in memory before anything touches the output
//! directory, so a failing run leaves no partial files behind. Output bytes
//! depend only on the config and input files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    category_shares, classify_profile, cluster, cluster_enrichment, mixing_matrix, non_academic_enrichment,
    relations_summary, round_percent, Clustering, Dimension, EngagementProfile, ProfileThresholds,
    RelationsSummary,
};
use crate::attributes::{annotate, load_coding_sheet, Affiliation, AttributedGraph, KeyMismatch, SheetError};
use crate::egonet::{build_graph, degree_summary, interaction_community, symmetrize, SymmetrizationMode};
use crate::ingest::{load_archive, ArchiveError, EgoArchive, EndpointError, FetchBudget, FetchError, InvalidSpec};
use crate::layout::{
    export_graph, layout, render_svg, ExportFormat, InconsistentInputs, LayoutResult, UnencodableCategory,
    VisualEncoding,
};

pub const REPORT_FILE: &str = "report.txt";
pub const MAP_FILE: &str = "map.svg";

fn default_resolution() -> f64 {
    1.0
}
fn default_iterations() -> usize {
    300
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPaths {
    pub archive: PathBuf,
    pub coding: PathBuf,
    pub out_dir: PathBuf,
    /// Endpoint description used by `fetch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<PathBuf>,
}

/// Run configuration. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub home_country: String,
    /// Handle to fetch; only `fetch` reads it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handle: Option<String>,
    #[serde(default)]
    pub symmetrization: SymmetrizationMode,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    pub cluster_seed: u64,
    pub layout_seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub budget: FetchBudget,
    #[serde(default)]
    pub thresholds: ProfileThresholds,
    #[serde(default)]
    pub encoding: VisualEncoding,
    pub paths: RunPaths,
}

impl RunConfig {
    pub fn new(home_country: &str, paths: RunPaths) -> Self {
        RunConfig {
            home_country: home_country.to_string(),
            handle: None,
            symmetrization: SymmetrizationMode::Any,
            resolution: default_resolution(),
            cluster_seed: 1,
            layout_seed: 1,
            iterations: default_iterations(),
            budget: FetchBudget::default(),
            thresholds: ProfileThresholds::default(),
            encoding: VisualEncoding::default(),
            paths,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.archive);
        fix(&mut self.paths.coding);
        fix(&mut self.paths.out_dir);
        if let Some(e) = self.paths.endpoint.as_mut() {
            fix(e);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(PipelineError::Config("resolution must be positive and finite".into()));
        }
        if self.iterations == 0 {
            return Err(PipelineError::Config("iterations must be at least 1".into()));
        }
        self.budget
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Archive { path: PathBuf, source: ArchiveError },
    #[error("{}: {source}", path.display())]
    Sheet { path: PathBuf, source: SheetError },
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error(transparent)]
    KeyMismatch(#[from] KeyMismatch),
    #[error(transparent)]
    Inconsistent(#[from] InconsistentInputs),
    #[error(transparent)]
    Unencodable(#[from] UnencodableCategory),
    #[error(transparent)]
    Synth(#[from] InvalidSpec),
}

/// Process exit codes, one per failure class.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const UNKNOWN_HANDLE: i32 = 3;
    pub const BUDGET_EXHAUSTED: i32 = 4;
    pub const ARCHIVE_INVALID: i32 = 5;
    pub const MISSING_MEMBERS: i32 = 6;
    pub const UNKNOWN_ROWS: i32 = 7;
    pub const BAD_CODE: i32 = 8;
    pub const SHEET_INVALID: i32 = 9;
    pub const PAGE_LIMIT: i32 = 10;
    pub const TRANSPORT: i32 = 11;
    pub const IO: i32 = 12;
    pub const UNENCODABLE: i32 = 13;
    pub const INCONSISTENT: i32 = 14;
    pub const SYNTH_SPEC: i32 = 15;
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use exit_code::*;
        match self {
            PipelineError::Config(_) => USAGE,
            PipelineError::Io { .. } => IO,
            PipelineError::Archive {
                source: ArchiveError::Io(_),
                ..
            } => IO,
            PipelineError::Archive { .. } => ARCHIVE_INVALID,
            PipelineError::Sheet { source, .. } => match source {
                SheetError::MissingMembers(_) => MISSING_MEMBERS,
                SheetError::UnknownRows(_) => UNKNOWN_ROWS,
                SheetError::BadCode(_) => BAD_CODE,
                SheetError::Io(_) => IO,
                SheetError::BadHeader { .. } | SheetError::Malformed { .. } | SheetError::DuplicateRows(_) => {
                    SHEET_INVALID
                }
            },
            PipelineError::Fetch(e) => match e {
                FetchError::InvalidBudget(_) => USAGE,
                FetchError::UnknownHandle(_) => UNKNOWN_HANDLE,
                FetchError::BudgetExhausted { .. } => BUDGET_EXHAUSTED,
                FetchError::PageLimit { .. } => PAGE_LIMIT,
                FetchError::Transport(_) => TRANSPORT,
            },
            PipelineError::Endpoint(e) => match e {
                EndpointError::Io(_) => IO,
                EndpointError::Fixture(ArchiveError::Io(_)) => IO,
                EndpointError::Fixture(_) => ARCHIVE_INVALID,
                EndpointError::Parse(_) | EndpointError::MissingToken(_) | EndpointError::HttpDisabled => USAGE,
            },
            PipelineError::KeyMismatch(_) | PipelineError::Inconsistent(_) => INCONSISTENT,
            PipelineError::Unencodable(_) => UNENCODABLE,
            PipelineError::Synth(_) => SYNTH_SPEC,
        }
    }
}

/// Everything computed from one archive plus coding sheet.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub archive: EgoArchive,
    pub summary: RelationsSummary,
    pub attributed: AttributedGraph,
    pub symmetrization: SymmetrizationMode,
    pub clustering: Clustering,
    pub profile: EngagementProfile,
    pub layout: LayoutResult,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<(EgoArchive, AttributedGraph), PipelineError> {
    let archive = load_archive(&cfg.paths.archive).map_err(|source| PipelineError::Archive {
        path: cfg.paths.archive.clone(),
        source,
    })?;
    let community = interaction_community(&archive);
    let coding = load_coding_sheet(&cfg.paths.coding, &community).map_err(|source| PipelineError::Sheet {
        path: cfg.paths.coding.clone(),
        source,
    })?;
    let attributed = annotate(build_graph(&archive), coding, &cfg.home_country)?;
    Ok((archive, attributed))
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis, PipelineError> {
    cfg.check()?;
    let (archive, attributed) = load_inputs(cfg)?;
    Ok(analyze_graph(cfg, archive, attributed))
}

pub fn analyze_graph(cfg: &RunConfig, archive: EgoArchive, attributed: AttributedGraph) -> Analysis {
    let undirected = symmetrize(&attributed.graph, cfg.symmetrization);
    let clustering = cluster(&undirected, cfg.resolution, cfg.cluster_seed);
    let profile = classify_profile(&attributed, &clustering, &cfg.thresholds);
    let layout = layout(&undirected, cfg.layout_seed, cfg.iterations);
    Analysis {
        summary: relations_summary(&archive),
        archive,
        attributed,
        symmetrization: cfg.symmetrization,
        clustering,
        profile,
        layout,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"))
}

/// Line-oriented `key=value` statistics report with stable key names.
pub fn render_report(a: &Analysis) -> String {
    let ag = &a.attributed;
    let mut s = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("ego", &a.archive.ego.id);
    kv("ego_handle", &a.archive.ego.handle);
    kv("fetched_at", &a.archive.fetched_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    kv("home_country", &ag.home_country);
    kv("followers", &a.summary.followers);
    kv("followees", &a.summary.followees);
    kv("community", &a.summary.community);
    kv("graph.nodes", &ag.graph.nodes.len());
    kv("graph.edges", &ag.graph.edges.len());
    kv("graph.density", &format!("{:.6}", degree_summary(&ag.graph).density));
    kv("graph.symmetrization", &a.symmetrization.as_str());

    for dim in Dimension::ALL {
        let shares = category_shares(ag, dim);
        for e in &shares.entries {
            let key = format!("shares.{}.{}", dim.as_str(), e.category);
            kv(&format!("{key}.count"), &e.count);
            kv(&format!("{key}.share"), &format!("{:.6}", e.share));
            kv(&format!("{key}.percent"), &format!("{}%", round_percent(e.share)));
        }
    }
    let aff = category_shares(ag, Dimension::Affiliation);
    let geo = category_shares(ag, Dimension::Geography);
    kv("academic_share", &format!("{}%", round_percent(aff.share(Affiliation::Academic.token()))));
    kv("non_academic_share", &format!("{}%", round_percent(a.profile.evidence.non_academic_share)));
    kv("local_share", &format!("{}%", round_percent(geo.share("local"))));
    kv("unknown_affiliation_count", &aff.count("unknown"));

    for dim in Dimension::ALL {
        let prefix = format!("mixing.{}", dim.as_str());
        match mixing_matrix(ag, dim) {
            Ok(m) => {
                kv(&format!("{prefix}.edges"), &m.edge_count);
                for (i, ci) in m.categories.iter().enumerate() {
                    for (j, cj) in m.categories.iter().enumerate() {
                        kv(&format!("{prefix}.{ci}.{cj}"), &format!("{:.6}", m.m[i][j]));
                    }
                }
                kv(&format!("{prefix}.assortativity"), &format!("{:.6}", m.assortativity));
            }
            Err(_) => {
                kv(&format!("{prefix}.edges"), &0);
                kv(&format!("{prefix}.assortativity"), &"undefined");
            }
        }
    }

    let c = &a.clustering;
    kv("clusters.count", &c.cluster_count());
    kv("clusters.modularity", &format!("{:.9}", c.modularity));
    kv("clusters.resolution", &c.resolution);
    kv("clusters.seed", &c.seed);
    let na = non_academic_enrichment(c, ag);
    let by_aff = cluster_enrichment(c, ag, Dimension::Affiliation);
    let by_geo = cluster_enrichment(c, ag, Dimension::Geography);
    for ((n, af), ge) in na.iter().zip(&by_aff).zip(&by_geo) {
        let key = format!("cluster.{}", n.cluster);
        kv(&format!("{key}.size"), &n.size);
        kv(&format!("{key}.non_academic.count"), &n.entries[0].count);
        kv(&format!("{key}.non_academic.share"), &format!("{:.6}", n.entries[0].share));
        kv(&format!("{key}.non_academic.ratio"), &opt(n.entries[0].ratio));
        for (dim, e) in [("affiliation", af), ("geography", ge)] {
            for entry in &e.entries {
                kv(&format!("{key}.{dim}.{}.ratio", entry.category), &opt(entry.ratio));
            }
            kv(
                &format!("{key}.{dim}.most_enriched"),
                &e.most_enriched().map_or("none", |m| m.category),
            );
        }
    }

    let ev = &a.profile.evidence;
    kv("profile", &a.profile.label.as_str());
    kv("profile.non_academic_share", &format!("{:.6}", ev.non_academic_share));
    kv("profile.local_share", &format!("{:.6}", ev.local_share));
    kv("profile.coded_share", &format!("{:.6}", ev.coded_share));
    kv("profile.max_non_academic_enrichment", &opt(ev.max_non_academic_enrichment));
    kv(
        "profile.enriched_cluster_size",
        &ev.enriched_cluster_size.map_or_else(|| "none".to_string(), |n| n.to_string()),
    );
    s
}

/// Map plus the three interchange exports, keyed by file name.
pub fn render_map(a: &Analysis, encoding: &VisualEncoding) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    out.insert(
        MAP_FILE.to_string(),
        render_svg(&a.layout, &a.attributed, &a.clustering, encoding)?,
    );
    for f in ExportFormat::ALL {
        out.insert(
            format!("graph.{}", f.extension()),
            export_graph(&a.attributed, &a.clustering, &a.layout, f)?,
        );
    }
    Ok(out)
}

/// Writes `files` into `dir`; on any failure removes whatever this call created.
pub fn write_outputs(dir: &Path, files: &BTreeMap<String, String>) -> Result<(), PipelineError> {
    let created_dir = !dir.exists();
    let mut written = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        for (name, content) in files {
            let tmp = dir.join(format!(".{name}.partial"));
            written.push(tmp.clone());
            fs::write(&tmp, content).map_err(|e| PipelineError::io(&tmp, e))?;
        }
        for name in files.keys() {
            let tmp = dir.join(format!(".{name}.partial"));
            let path = dir.join(name);
            fs::rename(&tmp, &path).map_err(|e| PipelineError::io(&path, e))?;
            written.push(path);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}

/// Full run: report, map and exports written into `paths.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Analysis, PipelineError> {
    let a = analyze(cfg)?;
    let mut files = render_map(&a, &cfg.encoding)?;
    files.insert(REPORT_FILE.to_string(), render_report(&a));
    write_outputs(&cfg.paths.out_dir, &files)?;
    Ok(a)
}

/// Value of `key` in a `key=value` report.
pub fn report_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
}
