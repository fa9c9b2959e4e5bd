#![allow(clippy::needless_range_loop)]

use incpers_core::classifiers::{BaseKind, Classifier, ClassifierParams};
use incpers_core::dataset::{split_three_parts, RawRecording};
use incpers_core::ensemble::{ensemble_predict, train_chunk_models, BaseModel, EnsembleModel, TrainingRecipe};
use incpers_core::features::{percentile, sliding_windows, WindowSpec};
use incpers_core::personalization::{label_chunk, LabelSource, LabelingStrategy, Oracle};
use incpers_core::{ActivityClass, BodyPosition, FeatureMatrix, Samples};
use proptest::prelude::*;

fn class(i: usize) -> ActivityClass {
    ActivityClass::ALL[i % ActivityClass::ALL.len()]
}

/// Two-feature rows whose class is mostly decided by the first feature.
fn toy_samples(n: usize, seed: u64) -> Samples {
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut state = seed;
    for i in 0..n {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let jitter = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        let c = i % 3;
        rows.push([c as f64 + 0.8 * jitter, jitter * jitter]);
        y.push(class(c));
    }
    Samples::untagged(FeatureMatrix::from_rows(2, &rows).unwrap(), y).unwrap()
}

fn trained(kind: BaseKind) -> EnsembleModel {
    let mut ens = EnsembleModel::new();
    let recipe = TrainingRecipe { sfs_max_features: 2, ..TrainingRecipe::default() }.with_seed(9);
    train_chunk_models(&mut ens, &toy_samples(90, 1), kind, &ClassifierParams::default(), &recipe).unwrap();
    ens
}

#[test]
fn chunk_training_appends_three_normalized_models() {
    let rows = toy_samples(30, 2);
    for kind in BaseKind::ALL {
        let mut ens = trained(kind);
        assert_eq!(ens.len(), 3);
        let recipe = TrainingRecipe { sfs_max_features: 2, ..TrainingRecipe::default() }.with_seed(10);
        train_chunk_models(&mut ens, &toy_samples(60, 3), kind, &ClassifierParams::default(), &recipe).unwrap();
        assert_eq!(ens.len(), 6);
        for r in rows.x.rows() {
            let p = ensemble_predict(&ens, r).unwrap();
            assert!((p.posterior.sum() - 1.0).abs() < 1e-9);
            assert_eq!(p.confidence, p.posterior.get(p.class));
        }
    }
}

#[test]
fn mixed_family_ensembles_average() {
    let models: Vec<BaseModel> = BaseKind::ALL.iter().map(|&k| trained(k).base_models()[0].clone()).collect();
    assert!(matches!(models[2].classifier, Classifier::Tree(_)));
    let ens = EnsembleModel::from_models(3, models);
    let r = [1.0, 0.1];
    let members = ens.member_posteriors(&r).unwrap();
    let p = ensemble_predict(&ens, &r).unwrap().posterior;
    for c in ActivityClass::ALL {
        let want = members.iter().map(|m| m.get(c)).sum::<f64>() / 3.0;
        assert!((p.get(c) - want).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_count_matches_enumeration(len in 0usize..2000, length in 1usize..300, slide in 1usize..120) {
        let spec = WindowSpec { length_samples: length, slide_samples: slide };
        let naive = (0..len).step_by(slide).filter(|s| s + length <= len).count();
        prop_assert_eq!(spec.count(len), naive);
        if len >= length && len > 0 {
            let rec = RawRecording::new("p", BodyPosition::Arm, 50.0, vec![[0.0; 6]; len], vec![class(0); len]).unwrap();
            let windows = sliding_windows(&rec, &spec).unwrap();
            prop_assert_eq!(windows.len(), naive);
            for (i, w) in windows.iter().enumerate() {
                prop_assert_eq!(w.start, i * slide);
                prop_assert_eq!(w.samples.len(), length);
            }
        }
    }

    #[test]
    fn percentiles_are_monotone_and_bounded(values in prop::collection::vec(-1e3f64..1e3, 1..80), a in 0.0f64..100.0, b in 0.0f64..100.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let pl = percentile(&values, lo).unwrap();
        let ph = percentile(&values, hi).unwrap();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(pl <= ph);
        prop_assert!(min <= pl && ph <= max);
        prop_assert_eq!(percentile(&values, 0.0).unwrap(), min);
        prop_assert_eq!(percentile(&values, 100.0).unwrap(), max);
    }

    #[test]
    fn split_parts_partition_every_class(labels in prop::collection::vec(0usize..4, 3..200), seed in any::<u64>()) {
        let labels: Vec<ActivityClass> = labels.into_iter().map(class).collect();
        let sparse = ActivityClass::ALL.iter().any(|c| (1..3).contains(&labels.iter().filter(|l| *l == c).count()));
        let Ok(split) = split_three_parts("s", &labels, seed) else {
            prop_assert!(sparse);
            return Ok(());
        };
        prop_assert!(!sparse);
        let mut all: Vec<usize> = split.parts.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for part in &split.parts {
            prop_assert!(part.windows(2).all(|w| w[0] < w[1]));
        }
        for c in ActivityClass::ALL {
            let counts: Vec<usize> = split.parts.iter().map(|p| p.iter().filter(|&&i| labels[i] == c).count()).collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "{:?} spread {:?}", c, counts);
        }
    }

    #[test]
    fn labeling_extremes_and_accounting(seed in any::<u64>(), threshold in 0.0f64..1.0, n in 1usize..40) {
        let ens = trained(BaseKind::Lda);
        let chunk = toy_samples(n, seed);
        let truth: Vec<ActivityClass> = (0..n).map(|i| class((i * 7 + seed as usize) % 3)).collect();
        let run = |s: LabelingStrategy| label_chunk(&ens, &chunk.x, s, &mut Oracle::new(&truth)).unwrap();
        let (non, _) = run(LabelingStrategy::NonSupervised);
        let (zero, zero_stats) = run(LabelingStrategy::SemiSupervised { threshold: 0.0 });
        prop_assert_eq!(&zero, &non);
        prop_assert_eq!(zero_stats.queried, 0);
        let (sup, _) = run(LabelingStrategy::Supervised);
        let (over, _) = run(LabelingStrategy::SemiSupervised { threshold: 1.0 + 1e-9 });
        prop_assert_eq!(&over.labels, &truth);
        prop_assert_eq!(&over.labels, &sup.labels);

        let (semi, stats) = run(LabelingStrategy::SemiSupervised { threshold });
        prop_assert!(stats.queried <= stats.replaced && stats.replaced <= n);
        for i in 0..n {
            match semi.sources[i] {
                LabelSource::UserQuery => {
                    prop_assert!(semi.confidences[i] < threshold);
                    prop_assert_eq!(semi.labels[i], truth[i]);
                }
                LabelSource::UserPropagated => {
                    let lo = i.saturating_sub(2);
                    let near = (lo..=(i + 2).min(n - 1)).any(|j| semi.sources[j] == LabelSource::UserQuery);
                    prop_assert!(near);
                    prop_assert!(semi.confidences[i] >= threshold);
                }
                LabelSource::Predicted => {
                    prop_assert!(semi.confidences[i] >= threshold);
                    prop_assert_eq!(semi.labels[i], semi.predicted[i]);
                }
            }
        }
    }
}
