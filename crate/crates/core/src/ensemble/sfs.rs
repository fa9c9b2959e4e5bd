//! Sequential forward selection scored by held-out balanced accuracy.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::classifiers::{BaseKind, Classifier, ClassifierParams, DecisionTree, Posterior, PresortedColumns, VARIANCE_FLOOR};
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::samples::{class_counts, RowTag, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfsOutcome {
    /// Selected column indices, in the order they were added.
    pub features: Vec<usize>,
    /// Validation balanced accuracy of the final subset.
    pub score: f64,
}

/// Splits rows into (train, validation) by provenance tag, so noise-injected
/// replicas of one window never straddle the split. Within each class a
/// fraction `validation_fraction` of the distinct tags (at least one, and
/// never all of them) is held out.
pub fn stratified_group_split(samples: &Samples, validation_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut groups: BTreeMap<RowTag, ActivityClass> = BTreeMap::new();
    for (t, y) in samples.tags.iter().zip(&samples.y) {
        groups.entry(*t).or_insert(*y);
    }
    let mut by_class: [Vec<RowTag>; NUM_CLASSES] = Default::default();
    for (t, y) in &groups {
        by_class[y.index()].push(*t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held_out: BTreeMap<RowTag, ()> = BTreeMap::new();
    for tags in by_class.iter_mut() {
        let g = tags.len();
        if g < 2 {
            continue;
        }
        let k = (libm::round(validation_fraction * g as f64) as usize).clamp(1, g - 1);
        tags.shuffle(&mut rng);
        for t in &tags[..k] {
            held_out.insert(*t, ());
        }
    }
    (0..samples.len()).partition(|&i| !held_out.contains_key(&samples.tags[i]))
}

/// Scores the naive way: trains a fresh classifier on the candidate columns.
/// Used for CART (over presorted columns) and as the test oracle for the
/// incremental Gaussian scorer.
struct RetrainScorer<'a> {
    samples: &'a Samples,
    train: Samples,
    presorted: Option<PresortedColumns>,
    validation: Vec<usize>,
    kind: BaseKind,
    params: &'a ClassifierParams,
}

impl RetrainScorer<'_> {
    fn score(&self, features: &[usize]) -> Option<f64> {
        let model = match &self.presorted {
            Some(pre) => Classifier::Tree(
                DecisionTree::train_on_columns(
                    &self.train.x,
                    features,
                    pre,
                    &self.train.y,
                    self.params.max_depth,
                    self.params.min_leaf_size,
                    self.params.laplace,
                )
                .ok()?,
            ),
            None => Classifier::train(self.kind, &self.train.x.select_columns(features), &self.train.y, self.params).ok()?,
        };
        let mut cm = ConfusionMatrix::new();
        let mut buf = Vec::with_capacity(features.len());
        for &i in &self.validation {
            let row = self.samples.x.row(i);
            buf.clear();
            buf.extend(features.iter().map(|&j| row[j]));
            cm.record(self.samples.y[i], model.posterior(&buf).ok()?.argmax());
        }
        cm.balanced_accuracy_present().ok()
    }
}

/// LDA/QDA scoring that grows the Cholesky factors and the forward
/// substitutions of the validation rows by one column per accepted feature.
/// Every quantity is accumulated in the same order as a fresh
/// [`GaussianDiscriminant`](crate::classifiers::GaussianDiscriminant) fit,
/// so scores are bit-identical to retraining.
struct IncrementalGaussian<'a> {
    samples: &'a Samples,
    train: Samples,
    validation: Vec<usize>,
    /// Validation values, column-major.
    val_cols: Vec<Vec<f64>>,
    pooled: bool,
    shrinkage: f64,
    usable: bool,
    classes: Vec<ActivityClass>,
    /// Train row -> class slot.
    slot: Vec<usize>,
    log_prior: Vec<f64>,
    /// `[slot][column]`
    means: Vec<Vec<f64>>,
    /// Scatter divisor per covariance group.
    denom: Vec<f64>,
    /// Shrunk variance `[group][column]`.
    diag: Vec<Vec<f64>>,
    /// Shrunk covariance with the `m`-th selected column, `[group][m][column]`.
    cross: Vec<Vec<Vec<f64>>>,
    /// Row-major factor per group, stride `cap`.
    factor: Vec<Vec<f64>>,
    log_det: Vec<f64>,
    /// Forward substitution of each (validation row, class) pair, stride `cap`.
    z: Vec<f64>,
    maha: Vec<f64>,
    dim: usize,
    cap: usize,
    new_row: Vec<Vec<f64>>,
    pivot: Vec<f64>,
}

impl<'a> IncrementalGaussian<'a> {
    fn new(samples: &'a Samples, train: Samples, validation: Vec<usize>, pooled: bool, shrinkage: f64, cap: usize) -> Self {
        let n_cols = samples.n_features();
        let counts = train.class_counts();
        let classes: Vec<ActivityClass> = ActivityClass::ALL.iter().copied().filter(|c| counts[c.index()] > 0).collect();
        let usable = classes.len() >= 2
            && classes.iter().all(|c| counts[c.index()] >= 2)
            && (0.0..=1.0).contains(&shrinkage);
        let mut slot_of = [usize::MAX; NUM_CLASSES];
        for (i, c) in classes.iter().enumerate() {
            slot_of[c.index()] = i;
        }
        let slot: Vec<usize> = train.y.iter().map(|c| slot_of[c.index()]).collect();
        let k = classes.len();
        let n = train.len();
        let mut means = vec![vec![0.0; n_cols]; k];
        for (row, &s) in train.x.rows().zip(&slot) {
            for (m, v) in means[s].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, c) in means.iter_mut().zip(&classes) {
            let cnt = counts[c.index()] as f64;
            m.iter_mut().for_each(|v| *v /= cnt);
        }
        let groups = if pooled { 1 } else { k };
        let denom: Vec<f64> = if pooled {
            vec![n.saturating_sub(k) as f64]
        } else {
            classes.iter().map(|c| (counts[c.index()].saturating_sub(1)) as f64).collect()
        };
        let mut diag = vec![vec![0.0; n_cols]; groups];
        for (row, &s) in train.x.rows().zip(&slot) {
            let g = if pooled { 0 } else { s };
            for ((acc, v), m) in diag[g].iter_mut().zip(row).zip(&means[s]) {
                let d = v - m;
                *acc += d * d;
            }
        }
        for (g, col) in diag.iter_mut().enumerate() {
            for v in col.iter_mut() {
                *v = shrink_diagonal(*v / denom[g], shrinkage);
            }
        }
        let log_prior = classes.iter().map(|c| libm::log(counts[c.index()] as f64 / n as f64)).collect();
        let nv = validation.len();
        let val_cols = (0..n_cols).map(|j| validation.iter().map(|&i| samples.x.get(i, j)).collect()).collect();
        IncrementalGaussian {
            samples,
            train,
            validation,
            val_cols,
            pooled,
            shrinkage,
            usable,
            classes,
            slot,
            log_prior,
            means,
            denom,
            diag,
            cross: vec![Vec::new(); groups],
            factor: vec![vec![0.0; cap * cap]; groups],
            log_det: vec![0.0; groups],
            z: vec![0.0; nv * k * cap],
            maha: vec![0.0; nv * k],
            dim: 0,
            cap,
            new_row: vec![vec![0.0; cap]; groups],
            pivot: vec![0.0; groups],
        }
    }

    fn group(&self, slot: usize) -> usize {
        if self.pooled {
            0
        } else {
            slot
        }
    }

    /// Extends every factor by `cand` into the scratch rows.
    fn extend_factors(&mut self, cand: usize) -> bool {
        let d = self.dim;
        for g in 0..self.factor.len() {
            let l = &self.factor[g];
            let row = &mut self.new_row[g];
            for m in 0..d {
                let mut s = self.cross[g][m][cand];
                for k in 0..m {
                    s -= row[k] * l[m * self.cap + k];
                }
                row[m] = s / l[m * self.cap + m];
            }
            let mut s = self.diag[g][cand];
            for v in &row[..d] {
                s -= v * v;
            }
            if s.is_nan() || s <= 0.0 || !s.is_finite() {
                return false;
            }
            self.pivot[g] = libm::sqrt(s);
        }
        true
    }

    fn new_z(&self, v: usize, slot: usize, cand: usize) -> f64 {
        let d = self.dim;
        let g = self.group(slot);
        let base = (v * self.classes.len() + slot) * self.cap;
        let mut s = self.val_cols[cand][v] - self.means[slot][cand];
        for k in 0..d {
            s -= self.new_row[g][k] * self.z[base + k];
        }
        s / self.pivot[g]
    }

    fn score(&mut self, cand: usize) -> Option<f64> {
        if !self.usable || !self.extend_factors(cand) {
            return None;
        }
        let k = self.classes.len();
        let log_det: Vec<f64> = (0..self.factor.len()).map(|g| self.log_det[g] + 2.0 * libm::log(self.pivot[g])).collect();
        let mut cm = ConfusionMatrix::new();
        let mut disc = [0.0; NUM_CLASSES];
        for v in 0..self.validation.len() {
            for (c, dc) in disc.iter_mut().enumerate().take(k) {
                let zi = self.new_z(v, c, cand);
                let maha = self.maha[v * k + c] + zi * zi;
                *dc = self.log_prior[c] - 0.5 * log_det[self.group(c)] - 0.5 * maha;
            }
            cm.record(self.samples.y[self.validation[v]], self.predict(&disc[..k]));
        }
        cm.balanced_accuracy_present().ok()
    }

    /// The class a fitted model's posterior argmax would pick. A unique top
    /// discriminant leading by more than `1e-9` wins outright, since the
    /// softmax then cannot round it into a tie; otherwise the posterior is
    /// formed exactly as the model does.
    fn predict(&self, disc: &[f64]) -> ActivityClass {
        let mut best = 0;
        for c in 1..disc.len() {
            if disc[c] > disc[best] {
                best = c;
            }
        }
        let clear = disc.iter().enumerate().all(|(c, &g)| c == best || g < disc[best] - 1e-9);
        if clear {
            return self.classes[best];
        }
        let top = disc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = [0.0; NUM_CLASSES];
        let mut total = 0.0;
        for (c, &gi) in self.classes.iter().zip(disc) {
            let e = libm::exp(gi - top);
            p[c.index()] = e;
            total += e;
        }
        p.iter_mut().for_each(|x| *x /= total);
        Posterior(p).argmax()
    }

    fn commit(&mut self, cand: usize) {
        let ok = self.extend_factors(cand);
        debug_assert!(ok, "committed candidate must have been scored");
        let d = self.dim;
        let k = self.classes.len();
        for v in 0..self.validation.len() {
            for c in 0..k {
                let zi = self.new_z(v, c, cand);
                self.z[(v * k + c) * self.cap + d] = zi;
                self.maha[v * k + c] += zi * zi;
            }
        }
        for g in 0..self.factor.len() {
            self.factor[g][d * self.cap..d * self.cap + d].copy_from_slice(&self.new_row[g][..d]);
            self.factor[g][d * self.cap + d] = self.pivot[g];
            self.log_det[g] += 2.0 * libm::log(self.pivot[g]);
        }
        // covariance of every column with the new one, for the next round
        let n_cols = self.samples.n_features();
        let mut sums = vec![vec![0.0; n_cols]; self.factor.len()];
        for (row, &s) in self.train.x.rows().zip(&self.slot) {
            let g = self.group(s);
            let m = &self.means[s];
            let dc = row[cand] - m[cand];
            for ((acc, v), mv) in sums[g].iter_mut().zip(row).zip(m) {
                *acc += (v - mv) * dc;
            }
        }
        for (g, col) in sums.iter_mut().enumerate() {
            for (j, v) in col.iter_mut().enumerate() {
                let cov = *v / self.denom[g];
                *v = if j == cand { self.diag[g][j] } else { shrink_off_diagonal(cov, self.shrinkage) };
            }
        }
        for (g, col) in sums.into_iter().enumerate() {
            self.cross[g].push(col);
        }
        self.dim += 1;
    }
}

fn shrink_diagonal(v: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        v
    } else {
        (1.0 - lambda) * v + lambda * v.max(VARIANCE_FLOOR)
    }
}

fn shrink_off_diagonal(v: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        v
    } else {
        (1.0 - lambda) * v
    }
}

enum Scorer<'a> {
    Retrain(RetrainScorer<'a>),
    Incremental(Box<IncrementalGaussian<'a>>),
}

impl Scorer<'_> {
    fn score(&mut self, selected: &[usize], cand: usize, trial: &mut Vec<usize>) -> Option<f64> {
        match self {
            Scorer::Retrain(r) => {
                trial.clear();
                trial.extend_from_slice(selected);
                trial.push(cand);
                r.score(trial)
            }
            Scorer::Incremental(g) => g.score(cand),
        }
    }

    fn commit(&mut self, cand: usize) {
        if let Scorer::Incremental(g) = self {
            g.commit(cand);
        }
    }
}

/// Greedy forward selection. Each round adds the candidate column whose
/// model, trained on the train portion, has the highest balanced accuracy on
/// the validation portion; ties go to the lowest column index. Stops when no
/// candidate strictly improves the score or `max_features` is reached. The
/// first round always selects a feature.
pub fn sfs_select(
    samples: &Samples,
    kind: BaseKind,
    params: &ClassifierParams,
    max_features: usize,
    validation_fraction: f64,
    seed: u64,
) -> Result<SfsOutcome> {
    select(samples, kind, params, max_features, validation_fraction, seed, false)
}

fn select(
    samples: &Samples,
    kind: BaseKind,
    params: &ClassifierParams,
    max_features: usize,
    validation_fraction: f64,
    seed: u64,
    force_retrain: bool,
) -> Result<SfsOutcome> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if max_features == 0 {
        return Err(Error::InvalidRecipe("sfs_max_features must be at least 1"));
    }
    let (mut train, mut validation) = stratified_group_split(samples, validation_fraction, seed);
    if validation.is_empty() {
        validation = train.clone();
    }
    if kind != BaseKind::Cart {
        // Gaussian fits need two rows per class on the train side
        let counts = class_counts(&train.iter().map(|&i| samples.y[i]).collect::<Vec<_>>());
        train.retain(|&i| counts[samples.y[i].index()] >= 2);
    }
    let d = samples.n_features();
    let cap = max_features.min(d);
    let train = samples.subset(&train);
    let mut scorer = match kind {
        BaseKind::Lda | BaseKind::Qda if !force_retrain => Scorer::Incremental(Box::new(IncrementalGaussian::new(
            samples,
            train,
            validation,
            kind == BaseKind::Lda,
            params.shrinkage,
            cap,
        ))),
        _ => {
            let presorted = (kind == BaseKind::Cart).then(|| PresortedColumns::new(&train.x));
            Scorer::Retrain(RetrainScorer { samples, train, presorted, validation, kind, params })
        }
    };

    let mut selected: Vec<usize> = Vec::new();
    let mut current = f64::NEG_INFINITY;
    let mut trial = Vec::with_capacity(cap);
    while selected.len() < cap {
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..d {
            if selected.contains(&cand) {
                continue;
            }
            if let Some(s) = scorer.score(&selected, cand, &mut trial) {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((cand, s));
                }
            }
        }
        match best {
            Some((cand, s)) if s > current => {
                scorer.commit(cand);
                selected.push(cand);
                current = s;
            }
            _ => break,
        }
    }
    if selected.is_empty() {
        return Err(Error::TooFewClasses(samples.distinct_classes()));
    }
    Ok(SfsOutcome { features: selected, score: current })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::FeatureMatrix;
    use alloc::vec;
    use rand::Rng;

    use ActivityClass::{Biking, Sitting, Walking};

    /// Column 2 separates the classes perfectly; the others are noise.
    fn table(seed: u64) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = [Walking, Sitting, Biking];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            let c = i % 3;
            let mut r: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            r[2] = 10.0 * c as f64 + rng.random_range(-1.0..1.0);
            rows.push(r);
            y.push(classes[c]);
        }
        Samples::untagged(FeatureMatrix::from_rows(6, &rows).unwrap(), y).unwrap()
    }

    /// Exhaustive single-feature scoring through the same split.
    fn best_single_feature(s: &Samples, kind: BaseKind, seed: u64) -> usize {
        let params = ClassifierParams::default();
        let (train, val) = stratified_group_split(s, 0.3, seed);
        let tr = s.subset(&train);
        let va = s.subset(&val);
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..s.n_features() {
            let m = Classifier::train(kind, &tr.x.select_columns(&[j]), &tr.y, &params).unwrap();
            let mut hits = [0usize; NUM_CLASSES];
            let counts = va.class_counts();
            for (r, l) in va.x.select_columns(&[j]).rows().zip(&va.y) {
                if m.posterior(r).unwrap().argmax() == *l {
                    hits[l.index()] += 1;
                }
            }
            let present: Vec<usize> = (0..NUM_CLASSES).filter(|&c| counts[c] > 0).collect();
            let ba = present.iter().map(|&c| hits[c] as f64 / counts[c] as f64).sum::<f64>() / present.len() as f64;
            if ba > best.1 {
                best = (j, ba);
            }
        }
        best.0
    }

    #[test]
    fn separating_feature_is_chosen_first() {
        let s = table(1);
        for kind in BaseKind::ALL {
            let out = sfs_select(&s, kind, &ClassifierParams::default(), 5, 0.3, 4).unwrap();
            assert_eq!(out.features[0], 2);
            assert_eq!(out.features[0], best_single_feature(&s, kind, 4));
            assert_eq!(out.score, 1.0);
            // nothing can improve on a perfect score
            assert_eq!(out.features.len(), 1);
        }
    }

    #[test]
    fn cap_of_one() {
        let s = table(2);
        let out = sfs_select(&s, BaseKind::Qda, &ClassifierParams::default(), 1, 0.3, 0).unwrap();
        assert_eq!(out.features.len(), 1);
    }

    #[test]
    fn duplicated_columns_pick_lowest_index() {
        let s = table(3);
        let rows: Vec<Vec<f64>> = s.x.rows().map(|r| vec![r[0], r[2], r[2], r[1]]).collect();
        let dup = Samples::untagged(FeatureMatrix::from_rows(4, &rows).unwrap(), s.y.clone()).unwrap();
        for kind in BaseKind::ALL {
            let out = sfs_select(&dup, kind, &ClassifierParams::default(), 3, 0.3, 1).unwrap();
            assert_eq!(out.features[0], 1);
        }
    }

    #[test]
    fn split_keeps_replicas_together() {
        let s = table(4);
        let noisy = super::super::noise_inject(&s, 2, 0.1, 5);
        let (train, val) = stratified_group_split(&noisy, 0.3, 6);
        assert_eq!(train.len() + val.len(), noisy.len());
        for &v in &val {
            assert!(train.iter().all(|&t| noisy.tags[t] != noisy.tags[v]));
        }
        let counts = class_counts(&val.iter().map(|&i| noisy.y[i]).collect::<Vec<_>>());
        assert_eq!(counts[Walking.index()], 9 * 3);
    }

    #[test]
    fn selection_is_deterministic() {
        let mut s = table(5);
        // weaken the separator so several rounds run
        for i in 0..s.len() {
            let v = s.x.row(i).to_vec();
            let mut w = v.clone();
            w[2] = v[2] * 0.05 + v[0];
            s.x = {
                let mut rows: Vec<Vec<f64>> = s.x.rows().map(|r| r.to_vec()).collect();
                rows[i] = w;
                FeatureMatrix::from_rows(6, &rows).unwrap()
            };
        }
        let a = sfs_select(&s, BaseKind::Lda, &ClassifierParams::default(), 4, 0.3, 9).unwrap();
        let b = sfs_select(&s, BaseKind::Lda, &ClassifierParams::default(), 4, 0.3, 9).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.features.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), a.features.len());
    }

    fn correlated(seed: u64, n: usize, d: usize, k: usize) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % k;
            let base: f64 = rng.random_range(-1.0..1.0);
            let r: Vec<f64> = (0..d)
                .map(|j| base * (j % 3) as f64 + rng.random_range(-1.0..1.0) + if j % 4 == c % 4 { 0.6 * c as f64 } else { 0.0 })
                .collect();
            rows.push(r);
            y.push(ActivityClass::ALL[c]);
        }
        let x = FeatureMatrix::from_rows(d, &rows).unwrap();
        let tags = (0..n as u32).map(|w| RowTag { subject: 0, part: 0, window: w / 2 }).collect();
        Samples::new(x, y, tags).unwrap()
    }

    #[test]
    fn incremental_gaussian_matches_retraining() {
        for seed in 0..10u64 {
            let s = correlated(seed, 80 + 11 * seed as usize, 9, 2 + (seed % 5) as usize);
            for kind in [BaseKind::Lda, BaseKind::Qda] {
                for shrinkage in [0.0, 0.05, 0.5] {
                    let params = ClassifierParams { shrinkage, ..ClassifierParams::default() };
                    let fast = sfs_select(&s, kind, &params, 6, 0.3, seed);
                    let slow = select(&s, kind, &params, 6, 0.3, seed, true);
                    assert_eq!(fast, slow, "seed {seed} {kind:?} shrinkage {shrinkage}");
                }
            }
        }
    }

    #[test]
    fn incremental_gaussian_skips_singular_candidates() {
        let mut s = correlated(3, 60, 4, 3);
        // column 3 duplicates column 0, so with no shrinkage it can never join it
        let rows: Vec<Vec<f64>> = s.x.rows().map(|r| vec![r[0], r[1], r[2], r[0]]).collect();
        s.x = FeatureMatrix::from_rows(4, &rows).unwrap();
        let params = ClassifierParams { shrinkage: 0.0, ..ClassifierParams::default() };
        for kind in [BaseKind::Lda, BaseKind::Qda] {
            let fast = sfs_select(&s, kind, &params, 4, 0.3, 1).unwrap();
            assert_eq!(Ok(fast.clone()), select(&s, kind, &params, 4, 0.3, 1, true));
            assert!(!(fast.features.contains(&0) && fast.features.contains(&3)));
        }
    }
}
