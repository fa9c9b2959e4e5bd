//! Recording CSV files and the TOML dataset manifest.
//!
//! A dataset directory holds one file per subject and body position, named
//! `<subject>_<position>.csv`, with the header
//! `timestamp_ms,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z,activity`.
//!
//! The manifest lists the positions and the status of every subject:
//!
//! ```toml
//! positions = ["arm", "waist", "wrist"]
//!
//! [subjects]
//! s01 = "include"
//! s10 = "exclude:sensor worn upside down"
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use incpers_core::dataset::{DatasetManifest, ImuSample, RawRecording, SAMPLE_RATE_HZ};
use incpers_core::{ActivityClass, BodyPosition};
use serde::Deserialize;

pub const CSV_HEADER: [&str; 8] = ["timestamp_ms", "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z", "activity"];

/// Relative deviation from 50 Hz accepted for the median sample interval.
pub const RATE_TOLERANCE: f64 = 0.02;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: malformed row: {reason}", path.display())]
    MalformedRow { path: PathBuf, line: u64, reason: String },
    #[error("{}:{line}: unknown activity {label:?}", path.display())]
    UnknownActivity { path: PathBuf, line: u64, label: String },
    #[error("{}: median sample interval gives {rate:.3} Hz, expected {SAMPLE_RATE_HZ} Hz", path.display())]
    SampleRate { path: PathBuf, rate: f64 },
    #[error("no recording for subject {subject} at position {position}: {} does not exist", path.display())]
    MissingSubject { subject: String, position: BodyPosition, path: PathBuf },
    #[error("{}: {source}", path.display())]
    Recording { path: PathBuf, source: incpers_core::Error },
    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },
}

pub fn recording_path(dir: &Path, subject: &str, position: BodyPosition) -> PathBuf {
    dir.join(format!("{subject}_{}.csv", position.name()))
}

fn malformed(path: &Path, line: u64, reason: impl Into<String>) -> LoadError {
    LoadError::MalformedRow { path: path.to_path_buf(), line, reason: reason.into() }
}

/// Reads one recording file. Line numbers in errors count the header as 1.
pub fn read_recording(path: &Path, subject: &str, position: BodyPosition) -> Result<RawRecording, LoadError> {
    let file = File::open(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            LoadError::MissingSubject { subject: subject.into(), position, path: path.to_path_buf() }
        } else {
            LoadError::Io { path: path.to_path_buf(), source }
        }
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(io::BufReader::new(file));
    let header = reader.headers().map_err(|e| malformed(path, 1, e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(malformed(path, 1, format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut timestamps = Vec::new();
    let mut samples: Vec<ImuSample> = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
        if record.len() != CSV_HEADER.len() {
            return Err(malformed(path, line, format!("expected {} fields, found {}", CSV_HEADER.len(), record.len())));
        }
        let mut numbers = [0.0; 7];
        for (k, n) in numbers.iter_mut().enumerate() {
            *n = record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(path, line, format!("{} is not a finite number: {:?}", CSV_HEADER[k], &record[k])))?;
        }
        let label: ActivityClass = record[7]
            .parse()
            .map_err(|_| LoadError::UnknownActivity { path: path.to_path_buf(), line, label: record[7].to_string() })?;
        timestamps.push(numbers[0]);
        samples.push([numbers[1], numbers[2], numbers[3], numbers[4], numbers[5], numbers[6]]);
        labels.push(label);
    }
    let rate = measured_rate(&timestamps).ok_or_else(|| malformed(path, 2, "at least two rows are needed"))?;
    if ((rate - SAMPLE_RATE_HZ) / SAMPLE_RATE_HZ).abs() > RATE_TOLERANCE {
        return Err(LoadError::SampleRate { path: path.to_path_buf(), rate });
    }
    RawRecording::new(subject, position, SAMPLE_RATE_HZ, samples, labels)
        .map_err(|source| LoadError::Recording { path: path.to_path_buf(), source })
}

/// Sample rate implied by the median timestamp difference, in Hz.
pub fn measured_rate(timestamps_ms: &[f64]) -> Option<f64> {
    if timestamps_ms.len() < 2 {
        return None;
    }
    let mut deltas: Vec<f64> = timestamps_ms.windows(2).map(|w| w[1] - w[0]).collect();
    deltas.sort_by(f64::total_cmp);
    let n = deltas.len();
    let median = if n % 2 == 1 { deltas[n / 2] } else { 0.5 * (deltas[n / 2 - 1] + deltas[n / 2]) };
    (median > 0.0).then(|| 1000.0 / median)
}

pub fn write_recording(path: &Path, recording: &RawRecording) -> Result<(), LoadError> {
    let io_err = |source| LoadError::Io { path: path.to_path_buf(), source };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let mut text = String::with_capacity(64 * (recording.len() + 1));
    text.push_str(&CSV_HEADER.join(","));
    text.push('\n');
    let dt = 1000.0 / recording.sample_rate_hz();
    for (i, (s, l)) in recording.samples().iter().zip(recording.labels()).enumerate() {
        let _ = write!(text, "{}", i as f64 * dt);
        for v in s {
            let _ = write!(text, ",{v}");
        }
        let _ = writeln!(text, ",{}", l.name());
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    positions: Vec<String>,
    subjects: BTreeMap<String, String>,
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<DatasetManifest, LoadError> {
    let bad = |reason: String| LoadError::Manifest { path: path.to_path_buf(), reason };
    let file: ManifestFile = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
    let positions = file
        .positions
        .iter()
        .map(|p| p.parse::<BodyPosition>().map_err(|e| bad(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for (id, status) in file.subjects {
        let status = status.trim();
        if status == "include" {
            included.push(id);
        } else if let Some(reason) = status.strip_prefix("exclude") {
            excluded.push((id, reason.trim_start_matches(':').trim().to_string()));
        } else {
            return Err(bad(format!("subject {id}: status must be \"include\" or \"exclude:<reason>\", got {status:?}")));
        }
    }
    DatasetManifest::new(included, excluded, positions).map_err(|e| bad(e.to_string()))
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    parse_manifest(&text, path)
}

pub fn manifest_to_toml(manifest: &DatasetManifest) -> String {
    let mut s = String::from("positions = [");
    let names: Vec<String> = manifest.positions.iter().map(|p| format!("\"{}\"", p.name())).collect();
    s.push_str(&names.join(", "));
    s.push_str("]\n\n[subjects]\n");
    let mut rows: Vec<(String, String)> = manifest.included_subjects.iter().map(|id| (id.clone(), "include".into())).collect();
    rows.extend(manifest.excluded_subjects.iter().map(|(id, r)| (id.clone(), format!("exclude:{r}"))));
    rows.sort();
    for (id, status) in rows {
        let _ = writeln!(s, "{id} = {}", toml::Value::String(status));
    }
    s
}
