//! Confusion matrices and balanced accuracy.

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};

/// Counts indexed `[true][predicted]` over [`ActivityClass::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (ActivityClass, ActivityClass)>,
    {
        let mut m = Self::new();
        for (t, p) in pairs {
            m.record(t, p);
        }
        m
    }

    pub fn record(&mut self, truth: ActivityClass, predicted: ActivityClass) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn support(&self, class: ActivityClass) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn recall(&self, class: ActivityClass) -> Option<f64> {
        let n = self.support(class);
        (n > 0).then(|| self.counts[class.index()][class.index()] as f64 / n as f64)
    }

    /// Mean recall over the classes that have at least one true row.
    pub fn balanced_accuracy_present(&self) -> Result<f64> {
        let (sum, k) = ActivityClass::ALL
            .iter()
            .filter_map(|&c| self.recall(c))
            .fold((0.0, 0usize), |(s, k), r| (s + r, k + 1));
        if k == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(sum / k as f64)
    }
}

/// Mean per-class recall over `classes`; every listed class needs at least
/// one true row.
pub fn balanced_accuracy(confusion: &ConfusionMatrix, classes: &[ActivityClass]) -> Result<f64> {
    if classes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for &c in classes {
        sum += confusion.recall(c).ok_or(Error::MissingClassInTest(c))?;
    }
    Ok(sum / classes.len() as f64)
}

pub fn error_rate(balanced_accuracy: f64) -> f64 {
    1.0 - balanced_accuracy
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use ActivityClass::*;

    #[test]
    fn perfect_diagonal() {
        let m = ConfusionMatrix::from_pairs(ActivityClass::ALL.iter().map(|&c| (c, c)));
        let ba = balanced_accuracy(&m, &ActivityClass::ALL).unwrap();
        assert_eq!(ba, 1.0);
        assert_eq!(error_rate(ba), 0.0);
    }

    #[test]
    fn two_class_arithmetic() {
        let m = ConfusionMatrix::from_pairs([(Walking, Walking), (Walking, Walking), (Biking, Biking), (Biking, Walking)]);
        let ba = balanced_accuracy(&m, &[Walking, Biking]).unwrap();
        assert_eq!(ba, 0.75);
        assert_eq!(error_rate(ba), 0.25);
        assert_eq!(balanced_accuracy(&m, &[Walking, Sitting]), Err(Error::MissingClassInTest(Sitting)));
        assert_eq!(m.balanced_accuracy_present().unwrap(), 0.75);
    }

    #[test]
    fn matches_direct_recall_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut m = ConfusionMatrix::new();
            for t in 0..NUM_CLASSES {
                for p in 0..NUM_CLASSES {
                    m.counts[t][p] = rng.random_range(0..20);
                }
                m.counts[t][t] += 1;
            }
            let mut direct = 0.0;
            for t in 0..NUM_CLASSES {
                let row: u64 = m.counts[t].iter().sum();
                direct += m.counts[t][t] as f64 / row as f64;
            }
            direct /= NUM_CLASSES as f64;
            let ba = balanced_accuracy(&m, &ActivityClass::ALL).unwrap();
            assert!((ba - direct).abs() < 1e-12);
        }
    }
}
