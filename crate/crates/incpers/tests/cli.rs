use std::path::Path;
use std::process::{Command, Output};

fn incpers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incpers")).args(args).output().expect("spawn incpers")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn catalog_lists_every_feature() {
    let out = incpers(&["catalog"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().count(), 561);
    assert!(stdout.starts_with("feature_index,feature_name,channel,extractor\n0,acc_x_std,acc_x,std\n"));
}

#[test]
fn synth_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let results = dir.path().join("results");
    let out = incpers(&["synth", "--out", path(&data), "--subjects", "4", "--seconds-per-activity", "20"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(data.join("manifest.toml").exists() && data.join("s04_wrist.csv").exists());

    let out = incpers(&[
        "run",
        "--data",
        path(&data),
        "--out",
        path(&results),
        "--position",
        "waist",
        "--classifier",
        "lda",
        "--strategy",
        "semi",
        "--threshold",
        "0.9",
        "--sfs-max-features",
        "2",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3, "{stdout}");
    assert!(lines[0].starts_with("s01 user-independent "));
    for name in ["summary.csv", "learning_curves.csv", "query_log.csv", "feature_catalog.csv", "failures.csv", "run_config.json"] {
        assert!(results.join(name).exists(), "{name} missing");
    }
    let curves = std::fs::read_to_string(results.join("learning_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 9);
    assert!(curves.lines().nth(1).unwrap().starts_with("s01,waist,lda,semi,0.9,1,1,"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = incpers(&["run", "--data", path(dir.path()), "--position", "ankle", "--classifier", "lda", "--strategy", "sup"]);
    assert!(!out.status.success());
    let out = incpers(&["run", "--data", path(dir.path()), "--position", "arm", "--classifier", "lda", "--strategy", "sup"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("manifest.toml"), "{}", text(&out.stderr));
}
