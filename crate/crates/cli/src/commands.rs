use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use engagemap_core::analysis::relations_summary;
use engagemap_core::ingest::{
    fetch_ego, ground_truth_csv, load_archive, resume_fetch, save_archive, synth_generate, EndpointDescription,
    FetchBudget, FetchCursor, FetchError, SyntheticProfileSpec,
};
use engagemap_core::pipeline::{
    analyze, render_map, render_report, report_value, run_pipeline, write_outputs, PipelineError, RunConfig,
    RunPaths, REPORT_FILE,
};
use engagemap_core::{generate_coding_template, interaction_community, CodingSheet};

use crate::args::{optional_config, run_config, CodeArgs, FetchArgs, RunFlags, SynthArgs};

type Result<T> = std::result::Result<T, PipelineError>;

const SUMMARY_KEYS: [&str; 6] = [
    "followers",
    "followees",
    "community",
    "academic_share",
    "non_academic_share",
    "profile",
];

/// Cursor file written beside an archive whose fetch ran out of budget.
pub fn resume_path(archive: &Path) -> PathBuf {
    let mut name = archive.as_os_str().to_owned();
    name.push(".resume.json");
    PathBuf::from(name)
}

fn required<T: Clone>(flag: Option<&T>, from_cfg: Option<T>, name: &str) -> Result<T> {
    flag.cloned()
        .or(from_cfg)
        .ok_or_else(|| PipelineError::Config(format!("--{name} is required (or set it in --config)")))
}

pub fn fetch(config: Option<&PathBuf>, args: &FetchArgs) -> Result<()> {
    let cfg = optional_config(config)?;
    let handle = required(args.handle.as_ref(), cfg.as_ref().and_then(|c| c.handle.clone()), "handle")?;
    let endpoint = required(
        args.endpoint.as_ref(),
        cfg.as_ref().and_then(|c| c.paths.endpoint.clone()),
        "endpoint",
    )?;
    let archive_path = required(args.archive.as_ref(), cfg.as_ref().map(|c| c.paths.archive.clone()), "archive")?;
    let mut budget = cfg.as_ref().map_or_else(FetchBudget::default, |c| c.budget);
    if let Some(v) = args.max_requests {
        budget.max_requests_per_window = v;
    }
    if let Some(v) = args.window {
        budget.window = v;
    }
    if let Some(v) = args.max_pages {
        budget.max_pages_per_list = v;
    }
    budget.validate()?;

    let (desc, base) = EndpointDescription::load(&endpoint)?;
    let client = desc.connect(&base)?;
    let cursor_path = resume_path(&archive_path);
    let mut result = if args.resume && cursor_path.exists() {
        let cursor = FetchCursor::load(&cursor_path).map_err(|source| PipelineError::Archive {
            path: cursor_path.clone(),
            source,
        })?;
        resume_fetch(cursor, client.as_ref(), &budget)
    } else {
        fetch_ego(&handle, client.as_ref(), &budget)
    };
    let archive = loop {
        match result {
            Ok(a) => break a,
            Err(FetchError::BudgetExhausted { cursor, requests_used }) if args.wait => {
                eprintln!("budget window spent ({requests_used} requests); waiting {} s", budget.window);
                std::thread::sleep(Duration::from_secs(budget.window));
                result = resume_fetch(*cursor, client.as_ref(), &budget);
            }
            Err(FetchError::BudgetExhausted { cursor, requests_used }) => {
                cursor
                    .save(&cursor_path)
                    .map_err(|e| PipelineError::io(&cursor_path, e))?;
                eprintln!("resume cursor written to {}", cursor_path.display());
                return Err(FetchError::BudgetExhausted { cursor, requests_used }.into());
            }
            Err(e) => return Err(e.into()),
        }
    };
    save_archive(&archive, &archive_path).map_err(|source| PipelineError::Archive {
        path: archive_path.clone(),
        source,
    })?;
    if cursor_path.exists() {
        fs::remove_file(&cursor_path).map_err(|e| PipelineError::io(&cursor_path, e))?;
    }
    let s = relations_summary(&archive);
    println!("followers={} followees={} community={}", s.followers, s.followees, s.community);
    Ok(())
}

pub fn code(config: Option<&PathBuf>, args: &CodeArgs) -> Result<()> {
    let cfg = optional_config(config)?;
    let archive_path = required(args.archive.as_ref(), cfg.as_ref().map(|c| c.paths.archive.clone()), "archive")?;
    let out = required(args.out.as_ref(), cfg.as_ref().map(|c| c.paths.coding.clone()), "out")?;
    let archive = load_archive(&archive_path).map_err(|source| PipelineError::Archive {
        path: archive_path.clone(),
        source,
    })?;
    let community = interaction_community(&archive);
    let template = generate_coding_template(&community, &archive);
    let sheet = if args.merge && out.exists() {
        let text = fs::read_to_string(&out).map_err(|e| PipelineError::io(&out, e))?;
        let existing = CodingSheet::parse(&text).map_err(|source| PipelineError::Sheet {
            path: out.clone(),
            source,
        })?;
        let (merged, dropped) = CodingSheet::merge_into(&existing, &template, &community);
        for id in dropped {
            eprintln!("dropped row for non-member {id}");
        }
        merged
    } else {
        template
    };
    sheet.write(&out).map_err(|source| PipelineError::Sheet {
        path: out.clone(),
        source,
    })?;
    println!("rows={}", sheet.rows.len());
    Ok(())
}

fn print_summary(report: &str) {
    for key in SUMMARY_KEYS {
        if let Some(v) = report_value(report, key) {
            println!("{key}={v}");
        }
    }
}

pub fn pipeline(config: Option<&PathBuf>, flags: &RunFlags) -> Result<()> {
    let cfg = run_config(config, flags)?;
    run_pipeline(&cfg)?;
    let out = &cfg.paths.out_dir;
    let report = fs::read_to_string(out.join(REPORT_FILE)).map_err(|e| PipelineError::io(out, e))?;
    print_summary(&report);
    println!("outputs={}", out.display());
    Ok(())
}

pub fn stats(config: Option<&PathBuf>, flags: &RunFlags) -> Result<()> {
    let cfg = run_config(config, flags)?;
    print!("{}", render_report(&analyze(&cfg)?));
    Ok(())
}

pub fn map(config: Option<&PathBuf>, flags: &RunFlags) -> Result<()> {
    let cfg = run_config(config, flags)?;
    let a = analyze(&cfg)?;
    let files = render_map(&a, &cfg.encoding)?;
    write_outputs(&cfg.paths.out_dir, &files)?;
    for name in files.keys() {
        println!("{}", cfg.paths.out_dir.join(name).display());
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec).map_err(|e| PipelineError::io(&args.spec, e))?;
    let mut spec = SyntheticProfileSpec::from_toml(&text)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (archive, truth) = synth_generate(&spec)?;
    let community = interaction_community(&archive);
    let mut sheet = generate_coding_template(&community, &archive);
    for row in &mut sheet.rows {
        let t = &truth[&row.id];
        row.geography = t.geography;
        row.affiliation = t.affiliation;
        row.evidence = "synthetic ground truth".into();
    }
    let mut cfg = RunConfig::new(
        &spec.home_country,
        RunPaths {
            archive: "archive.json".into(),
            coding: "coding.csv".into(),
            out_dir: "out".into(),
            endpoint: None,
        },
    );
    cfg.cluster_seed = spec.seed;
    cfg.layout_seed = spec.seed;

    let files = [
        ("archive.json".to_string(), archive.to_canonical_string()),
        ("ground_truth.csv".to_string(), ground_truth_csv(&truth)),
        ("coding.csv".to_string(), sheet.to_csv()),
        ("pipeline.toml".to_string(), cfg.to_toml()),
    ]
    .into_iter()
    .collect();
    write_outputs(&args.out, &files)?;
    let s = relations_summary(&archive);
    println!("followers={} followees={} community={}", s.followers, s.followees, s.community);
    Ok(())
}
