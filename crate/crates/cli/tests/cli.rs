//! Subcommands driven through the built binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use engagemap_core::fixtures;
use engagemap_core::ingest::save_archive;
use engagemap_core::pipeline::exit_code;
use engagemap_core::{generate_coding_template, interaction_community, Affiliation, CodingSheet, Geography};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_engagemap"))
}

fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .map(|it| it.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

#[test]
fn fetch_replay_prints_relation_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a.json");
    let o = run(bin()
        .args(["fetch", "--config"])
        .arg(fixture_dir("researcher-1").join("pipeline.toml"))
        .arg("--archive")
        .arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "followers=251 followees=81 community=44");
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(fixture_dir("researcher-1").join("archive.json")).unwrap()
    );
}

#[test]
fn fetch_unknown_handle_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(bin()
        .args(["fetch", "--handle", "nobody", "--endpoint"])
        .arg(fixture_dir("researcher-1").join("endpoint.toml"))
        .arg("--archive")
        .arg(tmp.path().join("a.json")));
    assert_eq!(o.status.code(), Some(exit_code::UNKNOWN_HANDLE));
    assert!(files_in(tmp.path()).is_empty());
}

#[test]
fn exhausted_budget_leaves_cursor_and_resumes() {
    let tmp = tempfile::tempdir().unwrap();
    let archive = tmp.path().join("a.json");
    let fetch = |resume: bool| {
        let mut c = bin();
        c.args(["fetch", "--handle", "researcher_1", "--max-requests", "3", "--endpoint"])
            .arg(fixture_dir("researcher-1").join("endpoint.toml"))
            .arg("--archive")
            .arg(&archive);
        if resume {
            c.arg("--resume");
        }
        run(&mut c)
    };
    let o = fetch(false);
    assert_eq!(o.status.code(), Some(exit_code::BUDGET_EXHAUSTED));
    assert_eq!(files_in(tmp.path()), vec!["a.json.resume.json"]);
    let mut rounds = 1;
    loop {
        let o = fetch(true);
        rounds += 1;
        if o.status.success() {
            break;
        }
        assert_eq!(o.status.code(), Some(exit_code::BUDGET_EXHAUSTED), "{}", stderr(&o));
        assert!(rounds < 100);
    }
    assert_eq!(files_in(tmp.path()), vec!["a.json"]);
    assert_eq!(
        fs::read_to_string(&archive).unwrap(),
        fs::read_to_string(fixture_dir("researcher-1").join("archive.json")).unwrap()
    );
}

#[test]
fn code_template_has_one_row_per_member() {
    let tmp = tempfile::tempdir().unwrap();
    let sheet = tmp.path().join("sheet.csv");
    let o = run(bin()
        .args(["code", "--archive"])
        .arg(fixture_dir("researcher-2").join("archive.json"))
        .arg("--out")
        .arg(&sheet));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "rows=110");
    assert_eq!(fs::read_to_string(&sheet).unwrap().lines().count(), 111);
}

#[test]
fn code_on_empty_archive_is_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = fixtures::researcher_1().archive;
    a.followers.clear();
    a.member_followees.clear();
    a.profiles.retain(|k, _| a.followees.contains(k) || *k == a.ego.id);
    let path = tmp.path().join("empty.json");
    save_archive(&a, &path).unwrap();
    let sheet = tmp.path().join("sheet.csv");
    let o = run(bin().args(["code", "--archive"]).arg(&path).arg("--out").arg(&sheet));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&sheet).unwrap(),
        "id,handle,bio,location,url,geography,affiliation,evidence\n"
    );
}

#[test]
fn code_merge_preserves_existing_codes() {
    let f = fixtures::researcher_2();
    let community = interaction_community(&f.archive);
    let template = generate_coding_template(&community, &f.archive);

    // analyst coded the last three template rows, in reverse order, plus a stale row
    let mut coded: Vec<_> = template.rows[107..].iter().rev().cloned().collect();
    for r in &mut coded {
        r.geography = Geography::Local;
        r.affiliation = Affiliation::Politician;
        r.evidence = "hand coded".into();
    }
    let mut stale = coded[0].clone();
    stale.id = "999".into();
    let mut existing = coded.clone();
    existing.insert(1, stale);

    let mut expected = coded.clone();
    expected.extend(template.rows[..107].iter().cloned());

    let tmp = tempfile::tempdir().unwrap();
    let sheet = tmp.path().join("sheet.csv");
    CodingSheet { rows: existing }.write(&sheet).unwrap();
    let o = run(bin()
        .args(["code", "--merge", "--archive"])
        .arg(fixture_dir("researcher-2").join("archive.json"))
        .arg("--out")
        .arg(&sheet));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("999"));
    assert_eq!(fs::read_to_string(&sheet).unwrap(), CodingSheet { rows: expected }.to_csv());
}

#[test]
fn pipeline_reports_published_shares() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, lines) in [
        ("researcher-1", ["profile=globally_academic", "academic_share=95%"]),
        ("researcher-2", ["profile=locally_engaged", "non_academic_share=45%"]),
    ] {
        let out = tmp.path().join(name);
        let o = run(bin()
            .arg("pipeline")
            .arg("--config")
            .arg(fixture_dir(name).join("pipeline.toml"))
            .arg("--out-dir")
            .arg(&out));
        assert!(o.status.success(), "{}", stderr(&o));
        let report = fs::read_to_string(out.join("report.txt")).unwrap();
        for l in lines {
            assert!(report.lines().any(|x| x == l), "{name}: missing {l}");
        }
        assert_eq!(
            files_in(&out),
            ["graph.dot", "graph.graphml", "graph.json", "map.svg", "report.txt"]
        );
    }
}

#[test]
fn pipeline_names_missing_members() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixtures::researcher_1();
    f.write(tmp.path()).unwrap();
    let mut sheet = f.sheet.clone();
    let gone: Vec<String> = sheet.rows.drain(..2).map(|r| r.id.to_string()).collect();
    sheet.write(tmp.path().join("coding.csv")).unwrap();
    let o = run(bin().arg("pipeline").arg("--config").arg(tmp.path().join("pipeline.toml")));
    assert_eq!(o.status.code(), Some(exit_code::MISSING_MEMBERS));
    for id in gone {
        assert!(stderr(&o).contains(&id), "{}", stderr(&o));
    }
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn bad_code_reports_row() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixtures::researcher_1();
    f.write(tmp.path()).unwrap();
    let text = f.sheet.to_csv().replacen(",academic,", ",professor,", 1);
    fs::write(tmp.path().join("coding.csv"), text).unwrap();
    let o = run(bin().arg("stats").arg("--config").arg(tmp.path().join("pipeline.toml")));
    assert_eq!(o.status.code(), Some(exit_code::BAD_CODE));
    assert!(stderr(&o).contains("professor") && stderr(&o).contains("coding.csv"));
}

#[test]
fn flags_without_config_need_seeds() {
    let o = run(bin()
        .args(["stats", "--home-country", "Netherlands", "--archive"])
        .arg(fixture_dir("researcher-1").join("archive.json"))
        .arg("--coding")
        .arg(fixture_dir("researcher-1").join("coding.csv")));
    assert_eq!(o.status.code(), Some(exit_code::USAGE));
    let o = run(bin()
        .args(["stats", "--home-country", "Netherlands", "--cluster-seed", "1", "--layout-seed", "1", "--archive"])
        .arg(fixture_dir("researcher-1").join("archive.json"))
        .arg("--coding")
        .arg(fixture_dir("researcher-1").join("coding.csv")));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("community=44"));
}

#[test]
fn map_writes_only_map_and_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(bin()
        .arg("map")
        .arg("--config")
        .arg(fixture_dir("researcher-2").join("pipeline.toml"))
        .args(["--shape-by", "none", "--size", "degree", "--out-dir"])
        .arg(tmp.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files_in(tmp.path()), ["graph.dot", "graph.graphml", "graph.json", "map.svg"]);
    let svg = fs::read_to_string(tmp.path().join("map.svg")).unwrap();
    assert_eq!(svg.matches("class=\"legend-entry\"").count(), 6);
}

const TWO_POLE: &str = r#"
community_size = 60
pole_count = 2
intra_pole_edge_prob = 0.3
inter_pole_edge_prob = 0.02
local_fraction_per_pole = [0.2, 0.9]
seed = 7
extra_followers = 5
extra_followees = 5

[[category_mix_per_pole]]
academic = 0.9
ngo = 0.1

[[category_mix_per_pole]]
academic = 0.2
public_sector = 0.5
private_sector = 0.3
"#;

#[test]
fn synth_twice_gives_identical_trees_and_runs_unattended() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    fs::write(&spec, TWO_POLE).unwrap();
    for d in ["a", "b"] {
        let o = run(bin().args(["synth", "--spec"]).arg(&spec).arg("--out").arg(tmp.path().join(d)));
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "followers=65 followees=65 community=60");
    }
    let a = tmp.path().join("a");
    assert_eq!(files_in(&a), ["archive.json", "coding.csv", "ground_truth.csv", "pipeline.toml"]);
    for f in files_in(&a) {
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(tmp.path().join("b").join(&f)).unwrap(), "{f}");
    }
    let o = run(bin().arg("pipeline").arg("--config").arg(a.join("pipeline.toml")));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("profile=locally_engaged"), "{}", stdout(&o));
}

#[test]
fn invalid_synth_spec_has_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    fs::write(&spec, TWO_POLE.replace("pole_count = 2", "pole_count = 3")).unwrap();
    let o = run(bin().args(["synth", "--spec"]).arg(&spec).arg("--out").arg(tmp.path().join("x")));
    assert_eq!(o.status.code(), Some(exit_code::SYNTH_SPEC));
    assert!(!tmp.path().join("x").exists());
}
