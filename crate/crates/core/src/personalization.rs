//! Labels for an update chunk under the three strategies.
//!
//! * Non-supervised: every window keeps the ensemble's predicted class.
//! * Supervised: every window is answered by the (simulated) user.
//! * Semi-supervised: windows whose ensemble confidence is below the
//!   threshold are sent to the user; the answer also replaces the labels of
//!   the two windows before and after (clipped at the chunk edges).
//!
//! The semi-supervised scan runs left to right. A window that was only given
//! a propagated label is still queried when its own confidence is low, and
//! the answer replaces the propagated label. A queried label is never
//! overwritten, and a propagated label is never overwritten by a later
//! propagation.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityClass;
use crate::classifiers::{BaseKind, ClassifierParams};
use crate::ensemble::{ensemble_predict, train_chunk_models, EnsembleModel, ModelAudit, TrainingRecipe};
use crate::error::{Error, Result};
use crate::samples::{FeatureMatrix, Samples};

/// Windows on each side of a queried window that receive its label.
pub const PROPAGATION_RADIUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelingStrategy {
    NonSupervised,
    SemiSupervised { threshold: f64 },
    Supervised,
}

impl LabelingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            LabelingStrategy::NonSupervised => "nonsup",
            LabelingStrategy::SemiSupervised { .. } => "semi",
            LabelingStrategy::Supervised => "sup",
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            LabelingStrategy::SemiSupervised { threshold } => Some(*threshold),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Predicted,
    UserQuery,
    UserPropagated,
}

impl LabelSource {
    pub fn name(self) -> &'static str {
        match self {
            LabelSource::Predicted => "predicted",
            LabelSource::UserQuery => "user_query",
            LabelSource::UserPropagated => "user_propagated",
        }
    }

    pub fn is_user(self) -> bool {
        self != LabelSource::Predicted
    }
}

/// Per-row outcome of labeling a chunk. `predicted` and `confidences` are
/// always the pre-update ensemble's output, whatever the strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledChunk {
    pub labels: Vec<ActivityClass>,
    pub sources: Vec<LabelSource>,
    pub predicted: Vec<ActivityClass>,
    pub confidences: Vec<f64>,
}

impl LabeledChunk {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Replays ground truth as an error-free user and counts the distinct rows
/// asked about.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    ground_truth: &'a [ActivityClass],
    asked: Vec<bool>,
    query_count: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(ground_truth: &'a [ActivityClass]) -> Self {
        Oracle { ground_truth, asked: vec![false; ground_truth.len()], query_count: 0 }
    }

    pub fn query(&mut self, row: usize) -> ActivityClass {
        if !self.asked[row] {
            self.asked[row] = true;
            self.query_count += 1;
        }
        self.ground_truth[row]
    }

    pub fn query_count(&self) -> usize {
        self.query_count
    }

    pub fn len(&self) -> usize {
        self.ground_truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground_truth.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryStats {
    pub rows: usize,
    /// Rows answered by the user.
    pub queried: usize,
    /// Rows whose label came from the user, queried or propagated.
    pub replaced: usize,
}

impl QueryStats {
    pub fn from_sources(sources: &[LabelSource]) -> Self {
        QueryStats {
            rows: sources.len(),
            queried: sources.iter().filter(|s| **s == LabelSource::UserQuery).count(),
            replaced: sources.iter().filter(|s| s.is_user()).count(),
        }
    }

    pub fn queried_fraction(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.queried as f64 / self.rows as f64
        }
    }

    pub fn replaced_fraction(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.replaced as f64 / self.rows as f64
        }
    }

    pub fn merge(&self, other: &QueryStats) -> QueryStats {
        QueryStats {
            rows: self.rows + other.rows,
            queried: self.queried + other.queried,
            replaced: self.replaced + other.replaced,
        }
    }
}

/// Labels `rows` (in temporal order) with `strategy`, using the current
/// ensemble for predictions and `oracle` for user answers.
pub fn label_chunk(
    ensemble: &EnsembleModel,
    rows: &FeatureMatrix,
    strategy: LabelingStrategy,
    oracle: &mut Oracle<'_>,
) -> Result<(LabeledChunk, QueryStats)> {
    let n = rows.n_rows();
    if n == 0 {
        return Err(Error::EmptyChunk);
    }
    if oracle.len() != n {
        return Err(Error::OracleMismatch { oracle: oracle.len(), rows: n });
    }
    let mut predicted = Vec::with_capacity(n);
    let mut confidences = Vec::with_capacity(n);
    for r in rows.rows() {
        let p = ensemble_predict(ensemble, r)?;
        predicted.push(p.class);
        confidences.push(p.confidence);
    }
    let mut labels = predicted.clone();
    let mut sources = vec![LabelSource::Predicted; n];

    match strategy {
        LabelingStrategy::NonSupervised => {}
        LabelingStrategy::Supervised => {
            for w in 0..n {
                labels[w] = oracle.query(w);
                sources[w] = LabelSource::UserQuery;
            }
        }
        LabelingStrategy::SemiSupervised { threshold } => {
            for w in 0..n {
                if confidences[w] >= threshold {
                    continue;
                }
                let answer = oracle.query(w);
                labels[w] = answer;
                sources[w] = LabelSource::UserQuery;
                let lo = w.saturating_sub(PROPAGATION_RADIUS);
                let hi = (w + PROPAGATION_RADIUS).min(n - 1);
                for j in lo..=hi {
                    if sources[j] == LabelSource::Predicted {
                        labels[j] = answer;
                        sources[j] = LabelSource::UserPropagated;
                    }
                }
            }
        }
    }

    let stats = QueryStats::from_sources(&sources);
    debug_assert_eq!(stats.queried, oracle.query_count());
    Ok((LabeledChunk { labels, sources, predicted, confidences }, stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub labeled: LabeledChunk,
    pub stats: QueryStats,
    pub audits: Vec<ModelAudit>,
}

/// Labels `chunk` with the pre-update ensemble, then trains the chunk's base
/// models on those labels and appends them. `chunk.y` is the ground truth
/// seen by the oracle; it reaches training only through user answers.
pub fn personalize_step(
    ensemble: &mut EnsembleModel,
    chunk: &Samples,
    strategy: LabelingStrategy,
    kind: BaseKind,
    params: &ClassifierParams,
    recipe: &TrainingRecipe,
) -> Result<StepOutcome> {
    let mut oracle = Oracle::new(&chunk.y);
    let (labeled, stats) = label_chunk(ensemble, &chunk.x, strategy, &mut oracle)?;
    let training = chunk.with_labels(labeled.labels.clone())?;
    let audits = train_chunk_models(ensemble, &training, kind, params, recipe)?;
    Ok(StepOutcome { labeled, stats, audits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{Classifier, DecisionTree, Posterior};
    use crate::ensemble::{BaseModel, MODELS_PER_CHUNK};
    use crate::samples::RowTag;
    use crate::NUM_CLASSES;
    use proptest::prelude::*;

    use ActivityClass::{Biking, Sitting, Walking};

    /// A one-feature CART stump ensemble whose confidence is read straight
    /// off the feature: rows with x <= 0 are uncertain, rows with x > 0
    /// confidently Walking.
    fn stump_ensemble() -> EnsembleModel {
        // leaf A: 1 walking + 1 sitting (confidence 0.5 unsmoothed);
        // leaf B: 10 walking (confidence 1.0)
        let x = FeatureMatrix::from_rows(1, &[[-1.0], [-1.0], [1.0], [1.0], [1.0], [1.0], [1.0], [1.0], [1.0], [1.0], [1.0], [1.0]]).unwrap();
        let mut y = vec![Walking; 12];
        y[1] = Sitting;
        let tree = DecisionTree::train(&x, &y, 1, 1, false).unwrap();
        EnsembleModel::from_models(MODELS_PER_CHUNK, vec![BaseModel { features: vec![0], classifier: Classifier::Tree(tree) }])
    }

    fn rows(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_vec(1, values.to_vec()).unwrap()
    }

    #[test]
    fn single_uncertain_row_propagates_two_each_side() {
        let ens = stump_ensemble();
        let mut v = vec![1.0; 30];
        v[10] = -1.0;
        let truth = vec![Biking; 30];
        let mut oracle = Oracle::new(&truth);
        let (lc, stats) = label_chunk(&ens, &rows(&v), LabelingStrategy::SemiSupervised { threshold: 0.9 }, &mut oracle).unwrap();
        assert_eq!(stats.queried, 1);
        assert_eq!(stats.replaced, 5);
        assert!((stats.queried_fraction() - 1.0 / 30.0).abs() < 1e-15);
        assert!((stats.replaced_fraction() - 5.0 / 30.0).abs() < 1e-15);
        assert_eq!(oracle.query_count(), 1);
        for i in 0..30 {
            let expect = match i {
                10 => LabelSource::UserQuery,
                8..=12 => LabelSource::UserPropagated,
                _ => LabelSource::Predicted,
            };
            assert_eq!(lc.sources[i], expect, "row {i}");
            assert_eq!(lc.labels[i], if (8..=12).contains(&i) { Biking } else { Walking });
        }
    }

    #[test]
    fn propagation_clips_at_edges() {
        let ens = stump_ensemble();
        let mut v = vec![1.0; 6];
        v[0] = -1.0;
        let truth = vec![Sitting; 6];
        let (lc, stats) =
            label_chunk(&ens, &rows(&v), LabelingStrategy::SemiSupervised { threshold: 0.9 }, &mut Oracle::new(&truth)).unwrap();
        assert_eq!(stats.replaced, 3);
        assert_eq!(&lc.labels[..4], &[Sitting, Sitting, Sitting, Walking]);
    }

    #[test]
    fn low_confidence_propagated_row_is_still_queried() {
        let ens = stump_ensemble();
        let v = [1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];
        let truth = [Walking, Biking, Sitting, Sitting, Sitting, Walking, Walking];
        let (lc, stats) =
            label_chunk(&ens, &rows(&v), LabelingStrategy::SemiSupervised { threshold: 0.9 }, &mut Oracle::new(&truth)).unwrap();
        assert_eq!(stats.queried, 2);
        // row 1 answers Biking and covers rows 0..=3; row 2 is queried itself
        // and its answer only fills row 4, the one still predicted.
        assert_eq!(lc.labels, vec![Biking, Biking, Sitting, Biking, Sitting, Walking, Walking]);
        assert_eq!(lc.sources[2], LabelSource::UserQuery);
        assert_eq!(lc.sources[3], LabelSource::UserPropagated);
        assert_eq!(lc.sources[4], LabelSource::UserPropagated);
    }

    #[test]
    fn supervised_and_nonsupervised_extremes() {
        let ens = stump_ensemble();
        let v = [1.0, -1.0, 1.0, 1.0];
        let truth = [Sitting, Biking, Biking, Sitting];
        let (sup, s) = label_chunk(&ens, &rows(&v), LabelingStrategy::Supervised, &mut Oracle::new(&truth)).unwrap();
        assert_eq!(sup.labels, truth.to_vec());
        assert_eq!((s.queried_fraction(), s.replaced_fraction()), (1.0, 1.0));
        let (non, s) = label_chunk(&ens, &rows(&v), LabelingStrategy::NonSupervised, &mut Oracle::new(&truth)).unwrap();
        assert_eq!(non.labels, vec![Walking; 4]);
        assert_eq!((s.queried_fraction(), s.replaced_fraction()), (0.0, 0.0));
    }

    #[test]
    fn errors() {
        let ens = stump_ensemble();
        assert_eq!(
            label_chunk(&ens, &FeatureMatrix::new(1), LabelingStrategy::Supervised, &mut Oracle::new(&[])),
            Err(Error::EmptyChunk)
        );
        assert_eq!(
            label_chunk(&ens, &rows(&[1.0, 2.0]), LabelingStrategy::Supervised, &mut Oracle::new(&[Walking])),
            Err(Error::OracleMismatch { oracle: 1, rows: 2 })
        );
        assert_eq!(
            label_chunk(&EnsembleModel::new(), &rows(&[1.0]), LabelingStrategy::NonSupervised, &mut Oracle::new(&[Walking])),
            Err(Error::EmptyEnsemble)
        );
    }

    #[test]
    fn personalize_step_grows_and_reports() {
        let ens0 = stump_ensemble();
        let truth: Vec<ActivityClass> = (0..60).map(|i| if i % 20 < 10 { Walking } else { Sitting }).collect();
        let x = FeatureMatrix::from_vec(1, (0..60).map(|i| if i % 20 < 10 { 1.0 + i as f64 * 0.01 } else { -1.0 - i as f64 * 0.01 }).collect()).unwrap();
        let tags = (0..60).map(|i| RowTag { subject: 4, part: 0, window: i }).collect();
        let chunk = Samples::new(x, truth, tags).unwrap();
        let recipe = TrainingRecipe { sfs_max_features: 1, ..TrainingRecipe::default() };
        let params = ClassifierParams::default();
        for (strategy, expect) in [
            (LabelingStrategy::Supervised, (1.0, 1.0)),
            (LabelingStrategy::NonSupervised, (0.0, 0.0)),
        ] {
            let mut ens = ens0.clone();
            let before = ens.base_models()[0].clone();
            let out = personalize_step(&mut ens, &chunk, strategy, BaseKind::Cart, &params, &recipe).unwrap();
            assert_eq!(ens.len(), 4);
            assert_eq!(ens.base_models()[0], before);
            assert_eq!((out.stats.queried_fraction(), out.stats.replaced_fraction()), expect);
            assert_eq!(out.audits.len(), 3);
        }
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<ActivityClass>)> {
        (1usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::sample::select(vec![-1.0, 1.0]), n),
                prop::collection::vec((0..NUM_CLASSES).prop_map(|i| ActivityClass::ALL[i]), n),
            )
        })
    }

    proptest! {
        #[test]
        fn boundary_thresholds((v, truth) in arb_case()) {
            let ens = stump_ensemble();
            let x = rows(&v);
            let non = label_chunk(&ens, &x, LabelingStrategy::NonSupervised, &mut Oracle::new(&truth)).unwrap();
            let zero = label_chunk(&ens, &x, LabelingStrategy::SemiSupervised { threshold: 0.0 }, &mut Oracle::new(&truth)).unwrap();
            prop_assert_eq!(&non, &zero);
            let sup = label_chunk(&ens, &x, LabelingStrategy::Supervised, &mut Oracle::new(&truth)).unwrap();
            let all = label_chunk(&ens, &x, LabelingStrategy::SemiSupervised { threshold: 1.01 }, &mut Oracle::new(&truth)).unwrap();
            prop_assert_eq!(&sup.0.labels, &all.0.labels);
            prop_assert_eq!(&truth, &all.0.labels);
        }

        #[test]
        fn locality_consistency_accounting((v, truth) in arb_case(), th in 0.0f64..1.0) {
            let ens = stump_ensemble();
            let mut oracle = Oracle::new(&truth);
            let (lc, stats) = label_chunk(&ens, &rows(&v), LabelingStrategy::SemiSupervised { threshold: th }, &mut oracle).unwrap();
            for (i, s) in lc.sources.iter().enumerate() {
                match s {
                    LabelSource::UserQuery => prop_assert_eq!(lc.labels[i], truth[i]),
                    LabelSource::UserPropagated => prop_assert!(
                        (i.saturating_sub(2)..=(i + 2).min(v.len() - 1)).any(|j| lc.sources[j] == LabelSource::UserQuery)
                    ),
                    LabelSource::Predicted => prop_assert_eq!(lc.labels[i], lc.predicted[i]),
                }
                if lc.confidences[i] < th {
                    prop_assert_eq!(*s, LabelSource::UserQuery);
                }
            }
            prop_assert_eq!(stats.queried, oracle.query_count());
            prop_assert!(stats.replaced_fraction() >= stats.queried_fraction());
            let again = label_chunk(&ens, &rows(&v), LabelingStrategy::SemiSupervised { threshold: th }, &mut Oracle::new(&truth)).unwrap();
            prop_assert_eq!(&again.0, &lc);
        }
    }

    #[test]
    fn stump_confidences() {
        let ens = stump_ensemble();
        let p: Posterior = ensemble_predict(&ens, &[-1.0]).unwrap().posterior;
        assert_eq!(p.confidence(), 0.5);
        assert_eq!(ensemble_predict(&ens, &[1.0]).unwrap().confidence, 1.0);
    }
}
