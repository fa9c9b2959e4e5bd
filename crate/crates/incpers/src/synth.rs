//! Synthetic desk-scale dataset with per-subject variation.
//!
//! Each activity is a periodic motion on top of a gravity vector. Subjects
//! differ in cadence, motion amplitude and sensor tilt, which is what makes a
//! user-independent model worse than a personalized one. Every activity is
//! recorded in two bouts and the bouts are shuffled per subject. One subject
//! can be made anomalous (gyroscope saturated and scaled, labels of whole
//! bouts rotated); the written manifest excludes it.

use std::f64::consts::TAU;
use std::path::Path;

use incpers_core::dataset::{DatasetManifest, ImuSample, RawRecording, SAMPLE_RATE_HZ};
use incpers_core::seed::{self, purpose};
use incpers_core::{ActivityClass, BodyPosition, NUM_CLASSES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::io::{manifest_to_toml, recording_path, write_recording, LoadError};

const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub subjects: usize,
    /// Zero-based index of the anomalous, excluded subject.
    pub anomalous: Option<usize>,
    pub seconds_per_activity: f64,
    pub positions: Vec<BodyPosition>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { subjects: 10, anomalous: Some(9), seconds_per_activity: 36.0, positions: BodyPosition::ALL.to_vec(), seed: 2024 }
    }
}

impl SynthConfig {
    pub fn subject_id(i: usize) -> String {
        format!("s{:02}", i + 1)
    }

    pub fn manifest(&self) -> DatasetManifest {
        let mut included = Vec::new();
        let mut excluded = Vec::new();
        for i in 0..self.subjects {
            if Some(i) == self.anomalous {
                excluded.push((Self::subject_id(i), "sensor fault during recording".to_string()));
            } else {
                included.push(Self::subject_id(i));
            }
        }
        DatasetManifest::new(included, excluded, self.positions.clone()).expect("generated ids are distinct")
    }
}

struct Motion {
    /// Gravity direction in the sensor frame, before subject tilt.
    tilt: [f64; 2],
    cadence_hz: f64,
    acc_amp: [f64; 3],
    gyro_amp: [f64; 3],
}

fn motion(class: ActivityClass) -> Motion {
    use ActivityClass::*;
    match class {
        Walking => Motion { tilt: [0.10, 0.05], cadence_hz: 1.9, acc_amp: [1.6, 1.0, 2.4], gyro_amp: [0.8, 0.5, 0.4] },
        Sitting => Motion { tilt: [1.10, 0.20], cadence_hz: 0.0, acc_amp: [0.0; 3], gyro_amp: [0.0; 3] },
        Standing => Motion { tilt: [0.05, 0.00], cadence_hz: 0.0, acc_amp: [0.0; 3], gyro_amp: [0.0; 3] },
        Jogging => Motion { tilt: [0.25, 0.05], cadence_hz: 2.7, acc_amp: [4.5, 2.5, 6.5], gyro_amp: [2.2, 1.2, 1.0] },
        Biking => Motion { tilt: [0.80, 0.30], cadence_hz: 1.3, acc_amp: [1.2, 2.0, 0.8], gyro_amp: [1.8, 0.6, 0.4] },
        Upstairs => Motion { tilt: [0.30, 0.10], cadence_hz: 1.6, acc_amp: [1.8, 1.0, 2.0], gyro_amp: [1.0, 0.5, 0.4] },
        Downstairs => Motion { tilt: [0.20, 0.15], cadence_hz: 2.1, acc_amp: [2.0, 1.3, 3.0], gyro_amp: [0.9, 0.6, 0.5] },
    }
}

fn position_gain(position: BodyPosition) -> (f64, f64) {
    match position {
        BodyPosition::Arm => (1.0, 1.0),
        BodyPosition::Waist => (0.8, 0.6),
        BodyPosition::Wrist => (1.3, 1.6),
    }
}

struct SubjectTraits {
    cadence: f64,
    amplitude: f64,
    tilt: [f64; 2],
    bouts: Vec<(ActivityClass, usize)>,
}

fn subject_traits(config: &SynthConfig, subject: usize) -> SubjectTraits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(config.seed, &[purpose::SYNTH, subject as u64]));
    let cadence = rng.random_range(0.82..1.18);
    let amplitude = rng.random_range(0.7..1.35);
    let tilt = [rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35)];
    let total = (config.seconds_per_activity * SAMPLE_RATE_HZ) as usize;
    let mut bouts = Vec::with_capacity(2 * NUM_CLASSES);
    for class in ActivityClass::ALL {
        let first = (total as f64 * rng.random_range(0.4..0.6)) as usize;
        bouts.push((class, first));
        bouts.push((class, total - first));
    }
    bouts.shuffle(&mut rng);
    SubjectTraits { cadence, amplitude, tilt, bouts }
}

/// Generates one recording; the subject traits are shared across positions.
pub fn generate_recording(config: &SynthConfig, subject: usize, position: BodyPosition) -> RawRecording {
    let traits = subject_traits(config, subject);
    let anomalous = Some(subject) == config.anomalous;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(
        config.seed,
        &[purpose::SYNTH, subject as u64, position as u64 + 1],
    ));
    let noise = Normal::new(0.0, 0.35).unwrap();
    let (acc_gain, gyro_gain) = position_gain(position);
    let mut samples: Vec<ImuSample> = Vec::new();
    let mut labels = Vec::new();
    for (b, &(class, len)) in traits.bouts.iter().enumerate() {
        let m = motion(class);
        let phase: f64 = rng.random_range(0.0..TAU);
        let pitch = m.tilt[0] + traits.tilt[0];
        let roll = m.tilt[1] + traits.tilt[1];
        let g = [GRAVITY * pitch.sin(), GRAVITY * roll.sin() * pitch.cos(), GRAVITY * roll.cos() * pitch.cos()];
        let f = m.cadence_hz * traits.cadence;
        let amp = traits.amplitude;
        let label = if anomalous { ActivityClass::ALL[(class.index() + b) % NUM_CLASSES] } else { class };
        for i in 0..len {
            let t = i as f64 / SAMPLE_RATE_HZ;
            let w = TAU * f * t + phase;
            let mut s = [0.0; 6];
            for k in 0..3 {
                let harmonic = (w + k as f64).sin() + 0.35 * (2.0 * w + 0.5 * k as f64).sin();
                s[k] = g[k] + acc_gain * amp * m.acc_amp[k] * harmonic + noise.sample(&mut rng);
                s[3 + k] = gyro_gain * amp * m.gyro_amp[k] * (w + 1.3 * k as f64).cos() + 0.3 * noise.sample(&mut rng);
                if anomalous {
                    s[3 + k] = (5.0 * s[3 + k]).clamp(-4.0, 4.0);
                }
            }
            samples.push(s);
            labels.push(label);
        }
    }
    RawRecording::new(SynthConfig::subject_id(subject), position, SAMPLE_RATE_HZ, samples, labels)
        .expect("generated recording is consistent")
}

/// Writes every recording and `manifest.toml` into `dir`.
pub fn write_dataset(dir: &Path, config: &SynthConfig) -> Result<DatasetManifest, LoadError> {
    std::fs::create_dir_all(dir).map_err(|source| LoadError::Io { path: dir.into(), source })?;
    for subject in 0..config.subjects {
        for &position in &config.positions {
            let rec = generate_recording(config, subject, position);
            write_recording(&recording_path(dir, &SynthConfig::subject_id(subject), position), &rec)?;
        }
    }
    let manifest = config.manifest();
    let path = dir.join("manifest.toml");
    std::fs::write(&path, manifest_to_toml(&manifest)).map_err(|source| LoadError::Io { path, source })?;
    Ok(manifest)
}
