use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityClass;
use crate::dataset::{majority_label, ImuSample, RawRecording};
use crate::error::{Error, Result};

/// Window geometry in samples. The standard geometry is 4.2 s windows with a 1.4 s
/// slide at 50 Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length_samples: usize,
    pub slide_samples: usize,
}

impl WindowSpec {
    pub const WINDOW_SECONDS: f64 = 4.2;
    pub const SLIDE_SECONDS: f64 = 1.4;

    pub fn standard() -> Self {
        Self::from_seconds(Self::WINDOW_SECONDS, Self::SLIDE_SECONDS, crate::dataset::SAMPLE_RATE_HZ)
    }

    pub fn from_seconds(window_s: f64, slide_s: f64, rate_hz: f64) -> Self {
        WindowSpec {
            length_samples: libm::round(window_s * rate_hz) as usize,
            slide_samples: libm::round(slide_s * rate_hz) as usize,
        }
    }

    /// `floor((len - length) / slide) + 1`, or 0 if the stream is too short.
    pub fn count(&self, len: usize) -> usize {
        if len < self.length_samples {
            0
        } else {
            (len - self.length_samples) / self.slide_samples + 1
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawWindow<'a> {
    pub index: usize,
    pub start: usize,
    pub samples: &'a [ImuSample],
    /// Majority label of the covered samples; `None` on a tie.
    pub label: Option<ActivityClass>,
}

/// Window `i` covers samples `[slide * i, slide * i + length - 1]`.
pub fn sliding_windows<'a>(recording: &'a RawRecording, spec: &WindowSpec) -> Result<Vec<RawWindow<'a>>> {
    let len = recording.len();
    if len < spec.length_samples || spec.length_samples == 0 {
        return Err(Error::RecordingTooShort { len, window: spec.length_samples });
    }
    let n = spec.count(len);
    let samples = recording.samples();
    let labels = recording.labels();
    Ok((0..n)
        .map(|index| {
            let start = index * spec.slide_samples;
            let end = start + spec.length_samples;
            RawWindow { index, start, samples: &samples[start..end], label: majority_label(&labels[start..end]) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::BodyPosition;
    use alloc::vec;

    fn recording(len: usize) -> RawRecording {
        let samples = (0..len).map(|i| [i as f64, 0.0, 0.0, 0.0, 0.0, 0.0]).collect();
        RawRecording::new("s", BodyPosition::Waist, 50.0, samples, vec![ActivityClass::Walking; len]).unwrap()
    }

    #[test]
    fn standard_geometry() {
        let spec = WindowSpec::standard();
        assert_eq!(spec.length_samples, 210);
        assert_eq!(spec.slide_samples, 70);
    }

    #[test]
    fn window_counts() {
        let spec = WindowSpec::standard();
        assert_eq!(sliding_windows(&recording(3000), &spec).unwrap().len(), 40);
        assert_eq!(sliding_windows(&recording(210), &spec).unwrap().len(), 1);
        assert_eq!(
            sliding_windows(&recording(209), &spec),
            Err(Error::RecordingTooShort { len: 209, window: 210 })
        );
    }

    #[test]
    fn coverage_matches_formula() {
        let rec = recording(1000);
        for w in sliding_windows(&rec, &WindowSpec::standard()).unwrap() {
            assert_eq!(w.start, 70 * w.index);
            assert_eq!(w.samples.len(), 210);
            assert_eq!(w.samples[0][0], (70 * w.index) as f64);
            assert_eq!(w.samples[209][0], (70 * w.index + 209) as f64);
        }
    }

    #[test]
    fn boundary_window_takes_majority() {
        let mut labels = vec![ActivityClass::Sitting; 120];
        labels.extend(vec![ActivityClass::Standing; 90]);
        labels.extend(vec![ActivityClass::Standing; 70]);
        let rec = RawRecording::new("s", BodyPosition::Arm, 50.0, vec![[0.0; 6]; 280], labels).unwrap();
        let w = sliding_windows(&rec, &WindowSpec::standard()).unwrap();
        assert_eq!(w[0].label, Some(ActivityClass::Sitting));
        assert_eq!(w[1].label, Some(ActivityClass::Standing));

        let mut tie = vec![ActivityClass::Sitting; 105];
        tie.extend(vec![ActivityClass::Biking; 105]);
        let rec = RawRecording::new("s", BodyPosition::Arm, 50.0, vec![[0.0; 6]; 210], tie).unwrap();
        assert_eq!(sliding_windows(&rec, &WindowSpec::standard()).unwrap()[0].label, None);
    }
}
