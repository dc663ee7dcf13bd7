use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_citepref"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn missing_citations_is_an_ingest_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let pubs = fixtures().join("synthetic/publications.tsv");
    let out = run(&[
        "ingest",
        "--publications",
        pubs.to_str().unwrap(),
        "--citations",
        tmp.path().join("nope.tsv").to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ingest stage failed"), "{err}");
    let manifest = fs::read_to_string(tmp.path().join("o/manifest.json")).unwrap();
    assert!(manifest.contains("\"failed_stage\": \"ingest\""), "{manifest}");
}

#[test]
fn bad_setting_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("synthetic/config.txt");
    let out = run(&[
        "network",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "often",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["network", "--config", cfg.to_str().unwrap(), "--years", "2010:2005"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output_and_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("synthetic/config.txt");
    for t in ["1", "8"] {
        let dir = tmp.path().join(t);
        let out = run(&["all", "--config", cfg.to_str().unwrap(), "--threads", t, "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let one = tree(&tmp.path().join("1"));
    assert_eq!(one, tree(&tmp.path().join("8")));
    assert_eq!(one, tree(&fixtures().join("golden")));
}

#[test]
fn stage_prefix_writes_only_its_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("synthetic/config.txt");
    let out = run(&["network", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let files = tree(tmp.path());
    assert!(files.contains_key("network/aggregate_network.tsv"));
    assert!(!files.keys().any(|k| k.starts_with("regress") || k.starts_with("balance")));
}

#[test]
fn synth_reproduces_bundled_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["synth", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(tree(tmp.path()), tree(&fixtures().join("synthetic")));
    let bad = run(&["synth", "--countries", "40", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}
