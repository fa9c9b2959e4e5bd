use std::fs;
use std::path::Path;

use incpers::io::{
    load_manifest, manifest_to_toml, measured_rate, parse_manifest, read_recording, recording_path, write_recording,
    LoadError, CSV_HEADER,
};
use incpers::synth::{generate_recording, write_dataset, SynthConfig};
use incpers_core::dataset::RawRecording;
use incpers_core::{ActivityClass, BodyPosition};

fn header() -> String {
    CSV_HEADER.join(",")
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn rows(n: usize, dt_ms: f64) -> String {
    let mut s = header() + "\n";
    for i in 0..n {
        s += &format!("{},0.1,0.2,9.8,0.01,0.02,0.03,walking\n", i as f64 * dt_ms);
    }
    s
}

#[test]
fn recording_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig { subjects: 2, anomalous: None, seconds_per_activity: 3.0, ..SynthConfig::default() };
    let rec = generate_recording(&config, 1, BodyPosition::Wrist);
    let path = recording_path(dir.path(), "s02", BodyPosition::Wrist);
    assert!(path.ends_with("s02_wrist.csv"));
    write_recording(&path, &rec).unwrap();
    let back = read_recording(&path, "s02", BodyPosition::Wrist).unwrap();
    assert_eq!(back, rec);
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = rows(5, 20.0);
    body = body.replacen("40,0.1,0.2", "40,zero,0.2", 1);
    let path = write(dir.path(), "a.csv", &body);
    match read_recording(&path, "a", BodyPosition::Arm) {
        Err(LoadError::MalformedRow { line, reason, .. }) => {
            assert_eq!(line, 4);
            assert!(reason.contains("acc_x"), "{reason}");
        }
        other => panic!("expected MalformedRow, got {other:?}"),
    }

    let short = rows(3, 20.0).replacen("20,0.1,0.2,9.8,0.01,0.02,0.03,walking", "20,0.1,0.2", 1);
    let path = write(dir.path(), "b.csv", &short);
    assert!(matches!(read_recording(&path, "b", BodyPosition::Arm), Err(LoadError::MalformedRow { line: 3, .. })));

    let nan = rows(3, 20.0).replacen("0.01", "NaN", 1);
    let path = write(dir.path(), "c.csv", &nan);
    assert!(matches!(read_recording(&path, "c", BodyPosition::Arm), Err(LoadError::MalformedRow { line: 2, .. })));
}

#[test]
fn wrong_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = rows(4, 20.0).replacen("activity", "label", 1);
    let path = write(dir.path(), "h.csv", &body);
    assert!(matches!(read_recording(&path, "h", BodyPosition::Arm), Err(LoadError::MalformedRow { line: 1, .. })));
}

#[test]
fn unknown_activity_names_the_label() {
    let dir = tempfile::tempdir().unwrap();
    let body = rows(6, 20.0);
    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    lines[5] = lines[5].replace("walking", "swimming");
    let path = write(dir.path(), "u.csv", &(lines.join("\n") + "\n"));
    match read_recording(&path, "u", BodyPosition::Waist) {
        Err(LoadError::UnknownActivity { line, label, .. }) => {
            assert_eq!(line, 6);
            assert_eq!(label, "swimming");
        }
        other => panic!("expected UnknownActivity, got {other:?}"),
    }
}

#[test]
fn activity_spellings_parse() {
    let dir = tempfile::tempdir().unwrap();
    let body = rows(4, 20.0).replace("walking", "Walking_Upstairs");
    let path = write(dir.path(), "s.csv", &body);
    let rec = read_recording(&path, "s", BodyPosition::Waist).unwrap();
    assert!(rec.labels().iter().all(|&l| l == ActivityClass::Upstairs));
}

#[test]
fn missing_subject_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = recording_path(dir.path(), "s07", BodyPosition::Arm);
    match read_recording(&path, "s07", BodyPosition::Arm) {
        Err(e @ LoadError::MissingSubject { .. }) => {
            let msg = e.to_string();
            assert!(msg.contains("s07") && msg.contains("arm"), "{msg}");
        }
        other => panic!("expected MissingSubject, got {other:?}"),
    }
}

#[test]
fn sample_rate_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "slow.csv", &rows(20, 40.0));
    match read_recording(&path, "slow", BodyPosition::Arm) {
        Err(LoadError::SampleRate { rate, .. }) => assert!((rate - 25.0).abs() < 1e-9),
        other => panic!("expected SampleRate, got {other:?}"),
    }
    // one dropped sample does not move the median
    let mut body = rows(20, 20.0);
    body = body.replacen("\n100,", "\n110,", 1);
    let path = write(dir.path(), "jitter.csv", &body);
    assert!(read_recording(&path, "jitter", BodyPosition::Arm).is_ok());
    let path = write(dir.path(), "single.csv", &rows(1, 20.0));
    assert!(matches!(read_recording(&path, "single", BodyPosition::Arm), Err(LoadError::MalformedRow { .. })));
}

#[test]
fn median_rate() {
    assert_eq!(measured_rate(&[0.0, 20.0, 40.0, 60.0]), Some(50.0));
    assert_eq!(measured_rate(&[0.0, 20.0, 40.0, 1000.0]), Some(50.0));
    assert_eq!(measured_rate(&[0.0]), None);
    assert_eq!(measured_rate(&[5.0, 5.0, 5.0]), None);
}

#[test]
fn manifest_parses_and_round_trips() {
    let text = r#"
positions = ["arm", "wrist"]

[subjects]
s01 = "include"
s02 = "include"
s03 = "exclude: sensor fell off"
"#;
    let m = parse_manifest(text, Path::new("m.toml")).unwrap();
    assert_eq!(m.positions, vec![BodyPosition::Arm, BodyPosition::Wrist]);
    assert_eq!(m.included_subjects, vec!["s01", "s02"]);
    assert_eq!(m.excluded_subjects, vec![("s03".to_string(), "sensor fell off".to_string())]);
    assert!(m.is_included("s01") && !m.is_included("s03"));
    let again = parse_manifest(&manifest_to_toml(&m), Path::new("m.toml")).unwrap();
    assert_eq!(again, m);
}

#[test]
fn manifest_errors() {
    let bad_status = "positions = [\"arm\"]\n[subjects]\ns01 = \"maybe\"\n";
    let e = parse_manifest(bad_status, Path::new("m.toml")).unwrap_err();
    assert!(matches!(&e, LoadError::Manifest { reason, .. } if reason.contains("s01")), "{e}");
    let bad_position = "positions = [\"ankle\"]\n[subjects]\ns01 = \"include\"\n";
    assert!(matches!(parse_manifest(bad_position, Path::new("m.toml")), Err(LoadError::Manifest { .. })));
    let unknown_key = "positions = [\"arm\"]\nfoo = 1\n[subjects]\ns01 = \"include\"\n";
    assert!(matches!(parse_manifest(unknown_key, Path::new("m.toml")), Err(LoadError::Manifest { .. })));
    assert!(matches!(load_manifest(Path::new("/nonexistent/manifest.toml")), Err(LoadError::Io { .. })));
}

#[test]
fn synthetic_dataset_is_deterministic() {
    let config = SynthConfig { subjects: 3, anomalous: Some(2), seconds_per_activity: 4.0, ..SynthConfig::default() };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = write_dataset(a.path(), &config).unwrap();
    let mb = write_dataset(b.path(), &config).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma.included_subjects, vec!["s01", "s02"]);
    assert_eq!(ma.excluded_subjects.len(), 1);
    assert_eq!(load_manifest(&a.path().join("manifest.toml")).unwrap(), ma);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3 * 3 + 1);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
    let rec: RawRecording = read_recording(&recording_path(a.path(), "s01", BodyPosition::Arm), "s01", BodyPosition::Arm).unwrap();
    for class in ActivityClass::ALL {
        assert!(rec.labels().contains(&class), "{class:?} missing");
    }
    assert_eq!(rec.len(), 7 * 4 * 50);
}
