//! Raw recordings, the dataset manifest and the per-subject three-part split.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, BodyPosition, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seed;

pub const SAMPLE_RATE_HZ: f64 = 50.0;

/// One accelerometer + gyroscope sample: `[acc_x, acc_y, acc_z, gyro_x, gyro_y, gyro_z]`.
pub type ImuSample = [f64; 6];

/// One subject's stream from one body position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecording {
    subject_id: String,
    position: BodyPosition,
    sample_rate_hz: f64,
    samples: Vec<ImuSample>,
    labels: Vec<ActivityClass>,
}

impl RawRecording {
    pub fn new(
        subject_id: impl Into<String>,
        position: BodyPosition,
        sample_rate_hz: f64,
        samples: Vec<ImuSample>,
        labels: Vec<ActivityClass>,
    ) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch { samples: samples.len(), labels: labels.len() });
        }
        if sample_rate_hz != SAMPLE_RATE_HZ {
            return Err(Error::InvalidSampleRate(sample_rate_hz));
        }
        Ok(RawRecording { subject_id: subject_id.into(), position, sample_rate_hz, samples, labels })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn position(&self) -> BodyPosition {
        self.position
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn labels(&self) -> &[ActivityClass] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Which subjects take part in an experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub included_subjects: Vec<String>,
    /// `(subject_id, reason)`
    pub excluded_subjects: Vec<(String, String)>,
    pub positions: Vec<BodyPosition>,
}

impl DatasetManifest {
    pub fn new(
        included_subjects: Vec<String>,
        excluded_subjects: Vec<(String, String)>,
        positions: Vec<BodyPosition>,
    ) -> Result<Self, ManifestError> {
        for (id, _) in &excluded_subjects {
            if included_subjects.contains(id) {
                return Err(ManifestError::IncludedAndExcluded(id.clone()));
            }
        }
        let mut seen: Vec<&String> = Vec::new();
        for id in included_subjects.iter().chain(excluded_subjects.iter().map(|(id, _)| id)) {
            if seen.contains(&id) {
                return Err(ManifestError::Duplicate(id.clone()));
            }
            seen.push(id);
        }
        Ok(DatasetManifest { included_subjects, excluded_subjects, positions })
    }

    pub fn is_included(&self, subject_id: &str) -> bool {
        self.included_subjects.iter().any(|s| s == subject_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("subject {0} is both included and excluded")]
    IncludedAndExcluded(String),
    #[error("subject {0} is listed twice")]
    Duplicate(String),
}

/// Majority activity over a slice of per-sample labels; `None` on an exact tie
/// for the top count.
pub fn majority_label(labels: &[ActivityClass]) -> Option<ActivityClass> {
    let mut counts = [0usize; NUM_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    let best = *counts.iter().max()?;
    if best == 0 {
        return None;
    }
    let mut winners = counts.iter().enumerate().filter(|(_, &c)| c == best);
    let (idx, _) = winners.next()?;
    if winners.next().is_some() {
        return None;
    }
    ActivityClass::from_index(idx)
}

/// A subject's windows divided into three disjoint, class-balanced parts.
/// Each part holds window indices in ascending (temporal) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectSplit {
    pub subject_id: String,
    pub parts: [Vec<usize>; 3],
}

/// Splits every class's windows into three contiguous runs whose lengths
/// differ by at most one. The `n % 3` leftover windows go to parts chosen by
/// a seeded rotation, so for a fixed seed the split is fixed.
pub fn split_three_parts(subject_id: &str, labels: &[ActivityClass], seed: u64) -> Result<SubjectSplit> {
    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (c, windows) in by_class.iter().enumerate() {
        let n = windows.len();
        if n == 0 {
            continue;
        }
        if n < 3 {
            return Err(Error::InsufficientClassData { class: ActivityClass::ALL[c], count: n });
        }
        let base = n / 3;
        let extra = n % 3;
        let offset = (seed::derive(seed, &[c as u64]) % 3) as usize;
        let mut sizes = [base; 3];
        for k in 0..extra {
            sizes[(offset + k) % 3] += 1;
        }
        let mut start = 0;
        for (p, size) in sizes.iter().enumerate() {
            parts[p].extend_from_slice(&windows[start..start + size]);
            start += size;
        }
    }
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    Ok(SubjectSplit { subject_id: subject_id.into(), parts })
}

/// The first two parts personalize (Steps 2 and 3), the third is held out.
pub fn chunks_for_personalization(split: &SubjectSplit) -> (&[usize], &[usize], &[usize]) {
    (&split.parts[0], &split.parts[1], &split.parts[2])
}
