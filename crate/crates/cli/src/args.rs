use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use engagemap_core::layout::{EncodedDimension, SizeRule};
use engagemap_core::pipeline::{PipelineError, RunConfig, RunPaths};
use engagemap_core::SymmetrizationMode;

/// Map a researcher's reciprocal-follow community on a social platform.
#[derive(Debug, Parser)]
#[command(name = "engagemap", version)]
pub struct Cli {
    /// Run configuration (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download an ego archive through an endpoint description.
    Fetch(FetchArgs),
    /// Write a coding-sheet template for the interaction community.
    Code(CodeArgs),
    /// Full run: report, map and graph exports.
    Pipeline(RunFlags),
    /// Print the statistics report without writing files.
    Stats(RunFlags),
    /// Write the map and graph exports only.
    Map(RunFlags),
    /// Generate a synthetic archive with a pre-filled coding sheet.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SymArg {
    Any,
    Mutual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DimArg {
    Geography,
    Affiliation,
    Cluster,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    None,
    Geography,
    Affiliation,
    Cluster,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SizeArg {
    Uniform,
    Degree,
}

impl From<DimArg> for EncodedDimension {
    fn from(d: DimArg) -> Self {
        match d {
            DimArg::Geography => EncodedDimension::Geography,
            DimArg::Affiliation => EncodedDimension::Affiliation,
            DimArg::Cluster => EncodedDimension::Cluster,
        }
    }
}

/// Mirrors of the config keys shared by `pipeline`, `stats` and `map`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    #[arg(long)]
    pub home_country: Option<String>,
    /// Archive file (JSON).
    #[arg(long)]
    pub archive: Option<PathBuf>,
    /// Completed coding sheet (CSV).
    #[arg(long)]
    pub coding: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub symmetrization: Option<SymArg>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub cluster_seed: Option<u64>,
    #[arg(long)]
    pub layout_seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub color_by: Option<DimArg>,
    #[arg(long, value_enum)]
    pub shape_by: Option<ShapeArg>,
    #[arg(long, value_enum)]
    pub size: Option<SizeArg>,
}

#[derive(Debug, Clone, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub handle: Option<String>,
    /// Endpoint description (TOML).
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    /// Where to write the archive.
    #[arg(long)]
    pub archive: Option<PathBuf>,
    #[arg(long)]
    pub max_requests: Option<usize>,
    /// Rate-limit window in seconds.
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long)]
    pub max_pages: Option<usize>,
    /// Continue from `<archive>.resume.json` if present.
    #[arg(long)]
    pub resume: bool,
    /// Sleep out each exhausted window instead of stopping.
    #[arg(long)]
    pub wait: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    #[arg(long)]
    pub archive: Option<PathBuf>,
    /// Sheet to write; defaults to the config's coding path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep rows of an existing sheet at `--out` and append new members.
    #[arg(long)]
    pub merge: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Synthetic profile spec (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed replacing the one in the synthetic profile file.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn missing(flag: &str) -> PipelineError {
    PipelineError::Config(format!("--{flag} is required without --config"))
}

/// Config from the file (if any) with flags applied on top.
pub fn run_config(config: Option<&PathBuf>, flags: &RunFlags) -> Result<RunConfig, PipelineError> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let mut cfg = RunConfig::new(
                flags.home_country.as_deref().ok_or_else(|| missing("home-country"))?,
                RunPaths {
                    archive: flags.archive.clone().ok_or_else(|| missing("archive"))?,
                    coding: flags.coding.clone().ok_or_else(|| missing("coding"))?,
                    out_dir: flags.out_dir.clone().unwrap_or_else(|| "out".into()),
                    endpoint: None,
                },
            );
            cfg.cluster_seed = flags.cluster_seed.ok_or_else(|| missing("cluster-seed"))?;
            cfg.layout_seed = flags.layout_seed.ok_or_else(|| missing("layout-seed"))?;
            cfg
        }
    };
    if let Some(v) = &flags.home_country {
        cfg.home_country = v.clone();
    }
    if let Some(v) = &flags.archive {
        cfg.paths.archive = v.clone();
    }
    if let Some(v) = &flags.coding {
        cfg.paths.coding = v.clone();
    }
    if let Some(v) = &flags.out_dir {
        cfg.paths.out_dir = v.clone();
    }
    if let Some(v) = flags.symmetrization {
        cfg.symmetrization = match v {
            SymArg::Any => SymmetrizationMode::Any,
            SymArg::Mutual => SymmetrizationMode::Mutual,
        };
    }
    if let Some(v) = flags.resolution {
        cfg.resolution = v;
    }
    if let Some(v) = flags.cluster_seed {
        cfg.cluster_seed = v;
    }
    if let Some(v) = flags.layout_seed {
        cfg.layout_seed = v;
    }
    if let Some(v) = flags.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = flags.color_by {
        cfg.encoding.color_by = v.into();
    }
    if let Some(v) = flags.shape_by {
        cfg.encoding.shape_by = match v {
            ShapeArg::None => None,
            ShapeArg::Geography => Some(EncodedDimension::Geography),
            ShapeArg::Affiliation => Some(EncodedDimension::Affiliation),
            ShapeArg::Cluster => Some(EncodedDimension::Cluster),
        };
    }
    if let Some(v) = flags.size {
        cfg.encoding.size = match v {
            SizeArg::Uniform => SizeRule::Uniform,
            SizeArg::Degree => SizeRule::Degree,
        };
    }
    cfg.check()?;
    Ok(cfg)
}

pub fn optional_config(config: Option<&PathBuf>) -> Result<Option<RunConfig>, PipelineError> {
    config.map(RunConfig::load).transpose()
}
