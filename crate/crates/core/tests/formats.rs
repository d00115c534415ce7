mod support;

use std::fs;
use std::path::Path;
use std::process::Command;

use graspa_core::data::{
    BenchmarkConfig, ExecutionLog, GraspSet, HandModel, Layout, PoseSet, ReachLog, TriMesh,
};
use graspa_core::scorecard::LayoutScore;
use graspa_core::stages::{ExecutionStage, PlatformStage, QualityStage};
use support::{cli, data_dir};

/// parse → serialize → parse → serialize reaches a fixpoint after one pass
/// and the second parse equals the first.
fn fixpoint<T: PartialEq + std::fmt::Debug>(
    path: &Path,
    parse: impl Fn(&str, &str) -> Result<T, graspa_core::data::DataError>,
    write: impl Fn(&T) -> String,
) {
    let text = fs::read_to_string(path).unwrap();
    let file = path.to_string_lossy();
    let first = parse(&text, &file).unwrap_or_else(|e| panic!("{e}"));
    let once = write(&first);
    let second = parse(&once, &file).unwrap_or_else(|e| panic!("{}: {e}\n{once}", path.display()));
    assert_eq!(first, second, "{}", path.display());
    assert_eq!(once, write(&second), "{}", path.display());
}

fn files(sub: &str, ext: &str) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(data_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    assert!(!v.is_empty(), "no {ext} files in {sub}");
    v
}

fn prefixed(sub: &str, prefix: &str) -> Vec<std::path::PathBuf> {
    files(sub, "xml")
        .into_iter()
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .collect()
}

#[test]
fn config_and_hand_round_trip() {
    fixpoint(&data_dir().join("config.xml"), BenchmarkConfig::parse_str, BenchmarkConfig::to_xml);
    fixpoint(&data_dir().join("hand.xml"), HandModel::parse_str, HandModel::to_xml);
}

#[test]
fn layouts_round_trip() {
    for p in files("layouts", "xml") {
        fixpoint(&p, Layout::parse_str, Layout::to_xml);
    }
}

#[test]
fn pose_sets_round_trip() {
    for p in files("poses", "xml") {
        fixpoint(&p, PoseSet::parse_str, PoseSet::to_xml);
    }
}

#[test]
fn logs_round_trip() {
    for p in prefixed("logs", "reach").into_iter().chain(prefixed("logs", "calibration")) {
        fixpoint(&p, ReachLog::parse_str, ReachLog::to_xml);
    }
    for p in prefixed("logs", "grasps") {
        fixpoint(&p, GraspSet::parse_str, GraspSet::to_xml);
    }
    for p in prefixed("logs", "execution") {
        fixpoint(&p, ExecutionLog::parse_str, ExecutionLog::to_xml);
    }
}

#[test]
fn meshes_round_trip() {
    for p in files("meshes", "off") {
        let text = fs::read_to_string(&p).unwrap();
        let first = TriMesh::parse_off(&text, "a").unwrap();
        let once = first.to_off();
        let second = TriMesh::parse_off(&once, "a").unwrap();
        assert_eq!(first.vertices, second.vertices, "{}", p.display());
        assert_eq!(first.triangles, second.triangles, "{}", p.display());
        assert_eq!(once, second.to_off());
        assert!((8_000..=13_000).contains(&first.triangles.len()), "{}: {}", p.display(), first.triangles.len());
    }
}

#[test]
fn stage_caches_round_trip() {
    for p in files("cache", "xml") {
        fixpoint(&p, QualityStage::parse_str, QualityStage::to_xml);
    }
    let dir = tempfile::tempdir().unwrap();
    let d = data_dir().to_string_lossy().into_owned();
    for layout in ["0", "1", "2"] {
        for (cmd, name) in [("score-reachability", "platform"), ("score-execution", "execution"), ("report", "scorecard")] {
            let out = dir.path().join(format!("{name}_{layout}.xml"));
            let (code, _, err) =
                cli(&[cmd, "--data-dir", &d, "--layout", layout, "--format", "xml", "--out", &out.to_string_lossy()]);
            assert_eq!(code, 0, "{err}");
            match name {
                "platform" => fixpoint(&out, PlatformStage::parse_str, PlatformStage::to_xml),
                "execution" => fixpoint(&out, ExecutionStage::parse_str, ExecutionStage::to_xml),
                _ => fixpoint(&out, LayoutScore::parse_str, LayoutScore::to_xml),
            }
        }
    }
}

fn graspa(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_graspa")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn layout_0_report_matches_the_golden_file() {
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report_layout_0.txt")).unwrap();
    let d = data_dir().to_string_lossy().into_owned();
    for jobs in [None, Some("1"), Some("4")] {
        let mut args = vec!["report", "--data-dir", &d, "--layout", "0"];
        if let Some(j) = jobs {
            args.extend(["--jobs", j]);
        }
        assert_eq!(graspa(&args), golden, "--jobs {jobs:?}");
    }
}

#[test]
fn recomputed_quality_is_independent_of_thread_count() {
    let d = data_dir().to_string_lossy().into_owned();
    let run = |jobs: &str| graspa(&["score-quality", "--data-dir", &d, "--layout", "0", "--recompute", "--format", "xml", "--jobs", jobs]);
    assert_eq!(run("1"), run("4"));
}
