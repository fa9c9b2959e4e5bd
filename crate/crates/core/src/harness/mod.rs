//! Leave-one-subject-out protocol.
//!
//! For a held-out subject, Step 1 trains the user-independent base models on
//! the pooled windows of every other subject. Steps 2 and 3 label the
//! subject's first and second split parts with the configured strategy and
//! append one chunk of models each. After every base-model slot the current
//! ensemble is scored on the subject's third part, which no training step
//! ever sees.

mod summary;


use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use summary::{StrategyVariant, SummaryCell, SummaryRow, SummaryTable, STRATEGY_VARIANTS};

use crate::activity::{ActivityClass, BodyPosition, NUM_CLASSES};
use crate::classifiers::{BaseKind, ClassifierParams};
use crate::dataset::{split_three_parts, RawRecording, SubjectSplit};
use crate::ensemble::{train_chunk_models, BaseModel, EnsembleModel, ModelAudit, TrainingEvent, TrainingRecipe, MODELS_PER_CHUNK};
use crate::error::{Error, Result};
use crate::features::{extract_matrix, sliding_windows, FeatureCatalog, WindowSpec};
use crate::metrics::{balanced_accuracy, error_rate, ConfusionMatrix};
use crate::personalization::{personalize_step, LabeledChunk, LabelingStrategy, QueryStats};
use crate::samples::{FeatureMatrix, RowTag, Samples};
use crate::seed::{self, purpose};

/// Personalization steps after Step 1.
pub const PERSONALIZATION_STEPS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub position: BodyPosition,
    pub base_kind: BaseKind,
    pub strategy: LabelingStrategy,
    /// `seed` is ignored; every step derives its own from `master_seed`.
    pub recipe: TrainingRecipe,
    pub params: ClassifierParams,
    pub models_per_step: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(position: BodyPosition, base_kind: BaseKind, strategy: LabelingStrategy, master_seed: u64) -> Self {
        ExperimentConfig {
            position,
            base_kind,
            strategy,
            recipe: TrainingRecipe::default(),
            params: ClassifierParams::default(),
            models_per_step: MODELS_PER_CHUNK,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.recipe.validate()?;
        if self.models_per_step == 0 {
            return Err(Error::InvalidRecipe("models_per_step must be positive"));
        }
        if !(0.0..=1.0).contains(&self.params.shrinkage) {
            return Err(Error::InvalidShrinkage(self.params.shrinkage));
        }
        if let LabelingStrategy::SemiSupervised { threshold } = self.strategy {
            if !threshold.is_finite() || threshold < 0.0 {
                return Err(Error::InvalidRecipe("threshold must be a finite non-negative number"));
            }
        }
        Ok(())
    }

    pub fn total_slots(&self) -> usize {
        self.models_per_step * (1 + PERSONALIZATION_STEPS)
    }
}

/// Seed of the training recipe for `step` (1, 2 or 3) with `subject` held out.
/// It depends on neither the strategy nor the classifier.
pub fn step_seed(master_seed: u64, subject: u16, step: u8) -> u64 {
    seed::derive(master_seed, &[purpose::STEP, subject as u64, step as u64])
}

pub fn split_seed(master_seed: u64, subject: u16) -> u64 {
    seed::derive(master_seed, &[purpose::SPLIT, subject as u64])
}

/// One subject's labelled windows at one body position, with features and
/// the three-part split already applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectData {
    pub subject_id: String,
    pub index: u16,
    pub position: BodyPosition,
    /// Rows in window order; `tags[i].window` is the raw window index.
    pub samples: Samples,
    /// Row indices of each split part, ascending.
    pub split: SubjectSplit,
    /// Windows dropped because their majority label was tied.
    pub dropped_windows: usize,
}

impl SubjectData {
    /// Builds subject data from already extracted rows. `windows[i]` is the
    /// raw window index of row `i`.
    pub fn from_rows(
        subject_id: &str,
        index: u16,
        position: BodyPosition,
        x: FeatureMatrix,
        y: Vec<ActivityClass>,
        windows: Vec<u32>,
        split_seed: u64,
    ) -> Result<Self> {
        if windows.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), got: windows.len() });
        }
        let split = split_three_parts(subject_id, &y, split_seed)?;
        let mut part_of = alloc::vec![0u8; y.len()];
        for (p, rows) in split.parts.iter().enumerate() {
            for &r in rows {
                part_of[r] = p as u8;
            }
        }
        let tags = windows.iter().zip(&part_of).map(|(&window, &part)| RowTag { subject: index, part, window }).collect();
        Ok(SubjectData {
            subject_id: subject_id.into(),
            index,
            position,
            samples: Samples::new(x, y, tags)?,
            split,
            dropped_windows: 0,
        })
    }

    pub fn part(&self, p: usize) -> Samples {
        self.samples.subset(&self.split.parts[p])
    }

    pub fn test_part(&self) -> Samples {
        self.part(RowTag::TEST_PART as usize)
    }
}

/// Windows the recording, drops windows without a majority label, extracts
/// features and splits the rest.
pub fn prepare_subject(
    recording: &RawRecording,
    index: u16,
    catalog: &FeatureCatalog,
    window: &WindowSpec,
    split_seed: u64,
) -> Result<SubjectData> {
    let windows = sliding_windows(recording, window)?;
    let kept: Vec<_> = windows.iter().filter(|w| w.label.is_some()).collect();
    let x = extract_matrix(kept.iter().map(|w| w.samples), catalog)?;
    let y = kept.iter().map(|w| w.label.unwrap()).collect();
    let idx = kept.iter().map(|w| w.index as u32).collect();
    let mut data = SubjectData::from_rows(recording.subject_id(), index, recording.position(), x, y, idx, split_seed)?;
    data.dropped_windows = windows.len() - kept.len();
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Base-model slot, 1-based. A slot whose model was skipped keeps the
    /// previous ensemble.
    pub slot: usize,
    pub ensemble_size: usize,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub subject_id: String,
    pub points: Vec<CurvePoint>,
    /// `(slot, event)` for every noteworthy training event.
    pub events: Vec<(usize, TrainingEvent)>,
}

impl LearningCurve {
    pub fn error_at(&self, slot: usize) -> Option<f64> {
        self.points.iter().find(|p| p.slot == slot).map(|p| p.error_rate)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.points.last().map(|p| p.error_rate)
    }
}

/// Scores an ensemble on a fixed test set after each newly appended model,
/// reusing the running posterior sums.
#[derive(Debug, Clone)]
pub struct IncrementalEvaluator {
    test: Samples,
    classes: Vec<ActivityClass>,
    sums: Vec<[f64; NUM_CLASSES]>,
    absorbed: usize,
}

impl IncrementalEvaluator {
    pub fn new(test: Samples) -> Result<Self> {
        if test.is_empty() {
            return Err(Error::EmptyChunk);
        }
        let counts = test.class_counts();
        let classes = ActivityClass::ALL.iter().copied().filter(|c| counts[c.index()] > 0).collect();
        let sums = alloc::vec![[0.0; NUM_CLASSES]; test.len()];
        Ok(IncrementalEvaluator { test, classes, sums, absorbed: 0 })
    }

    /// Adds the posteriors of models not yet seen and returns the error rate
    /// of the whole ensemble.
    pub fn update(&mut self, models: &[BaseModel]) -> Result<f64> {
        if models.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if models.len() < self.absorbed {
            return Err(Error::DimensionMismatch { expected: self.absorbed, got: models.len() });
        }
        for model in &models[self.absorbed..] {
            for (sum, row) in self.sums.iter_mut().zip(self.test.x.rows()) {
                let p = model.posterior(row)?;
                for (s, v) in sum.iter_mut().zip(&p.0) {
                    *s += v;
                }
            }
        }
        self.absorbed = models.len();
        let n = self.absorbed as f64;
        let cm = ConfusionMatrix::from_pairs(self.sums.iter().zip(&self.test.y).map(|(sum, &truth)| {
            let mut avg = *sum;
            avg.iter_mut().for_each(|s| *s /= n);
            (truth, crate::classifiers::Posterior(avg).argmax())
        }));
        Ok(error_rate(balanced_accuracy(&cm, &self.classes)?))
    }
}

/// The Step-1 ensemble for one held-out subject. It depends on the position,
/// the classifier, the recipe and the master seed, never on the strategy, so
/// one instance serves every strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserIndependentModel {
    pub held_out: u16,
    pub ensemble: EnsembleModel,
    pub audits: Vec<ModelAudit>,
    pub points: Vec<CurvePoint>,
}

impl UserIndependentModel {
    pub fn error(&self) -> Option<f64> {
        self.points.last().map(|p| p.error_rate)
    }
}

/// Pools every row of every subject except `held_out`.
pub fn pooled_training_rows(subjects: &[SubjectData], held_out: usize) -> Result<Samples> {
    let n_cols = subjects.get(held_out).ok_or(Error::UnknownSubject(held_out))?.samples.n_features();
    let mut pool = Samples::empty(n_cols);
    for (i, s) in subjects.iter().enumerate() {
        if i != held_out {
            pool.extend(&s.samples)?;
        }
    }
    Ok(pool)
}

/// Rejects any audit whose training rows include rows of `held_out` other
/// than its personalization parts; with `allow_personal` false, any row of
/// `held_out` at all.
pub fn check_provenance(audits: &[ModelAudit], held_out: u16, allow_personal: bool) -> Result<()> {
    for a in audits {
        for &(subject, part) in &a.sources {
            if subject == held_out && (!allow_personal || part == RowTag::TEST_PART) {
                return Err(Error::TestLeakage { subject, part });
            }
        }
    }
    Ok(())
}

fn record_slots(
    audits: &[ModelAudit],
    first_slot: usize,
    ensemble: &EnsembleModel,
    evaluator: &mut IncrementalEvaluator,
    points: &mut Vec<CurvePoint>,
    events: &mut Vec<(usize, TrainingEvent)>,
) -> Result<()> {
    // Models are appended in slot order, so slot k sees the first
    // `ensemble_size` of them.
    let mut size = ensemble.len() - audits.iter().filter(|a| !a.skipped()).count();
    for (k, audit) in audits.iter().enumerate() {
        let slot = first_slot + k;
        events.extend(audit.events.iter().cloned().map(|e| (slot, e)));
        if !audit.skipped() {
            size += 1;
        }
        if size == 0 {
            return Err(Error::EmptyEnsemble);
        }
        points.push(CurvePoint { slot, ensemble_size: size, error_rate: evaluator.update(&ensemble.base_models()[..size])? });
    }
    Ok(())
}

/// Trains Step 1 for `subjects[held_out]` and scores it after each model.
pub fn train_user_independent(subjects: &[SubjectData], held_out: usize, config: &ExperimentConfig) -> Result<UserIndependentModel> {
    config.validate()?;
    if subjects.len() < 2 {
        return Err(Error::TooFewSubjects(subjects.len()));
    }
    let subject = subjects.get(held_out).ok_or(Error::UnknownSubject(held_out))?;
    let pool = pooled_training_rows(subjects, held_out)?;
    let recipe = config.recipe.with_seed(step_seed(config.master_seed, subject.index, 1));
    let mut ensemble = EnsembleModel::with_models_per_chunk(config.models_per_step);
    let audits = train_chunk_models(&mut ensemble, &pool, config.base_kind, &config.params, &recipe)?;
    check_provenance(&audits, subject.index, false)?;
    let mut evaluator = IncrementalEvaluator::new(subject.test_part())?;
    let mut points = Vec::new();
    let mut events = Vec::new();
    record_slots(&audits, 1, &ensemble, &mut evaluator, &mut points, &mut events)?;
    Ok(UserIndependentModel { held_out: subject.index, ensemble, audits, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 2 or 3.
    pub step: u8,
    pub tags: Vec<RowTag>,
    pub truth: Vec<ActivityClass>,
    pub labeled: LabeledChunk,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosoRun {
    pub subject_id: String,
    pub subject_index: u16,
    pub position: BodyPosition,
    pub base_kind: BaseKind,
    pub strategy: LabelingStrategy,
    pub curve: LearningCurve,
    pub steps: Vec<StepRecord>,
    pub audits: Vec<ModelAudit>,
    pub final_ensemble_size: usize,
}

impl LosoRun {
    pub fn query_stats(&self) -> QueryStats {
        self.steps.iter().fold(QueryStats::default(), |acc, s| acc.merge(&s.stats))
    }

    pub fn user_independent_error(&self, models_per_step: usize) -> Option<f64> {
        self.curve.error_at(models_per_step)
    }
}

/// Runs Steps 2 and 3 on top of a Step-1 model.
pub fn personalize(
    subjects: &[SubjectData],
    held_out: usize,
    step1: &UserIndependentModel,
    config: &ExperimentConfig,
) -> Result<LosoRun> {
    config.validate()?;
    let subject = subjects.get(held_out).ok_or(Error::UnknownSubject(held_out))?;
    if step1.held_out != subject.index {
        return Err(Error::UnknownSubject(held_out));
    }
    let mut ensemble = step1.ensemble.clone();
    let mut audits = step1.audits.clone();
    let mut points = step1.points.clone();
    let mut events: Vec<(usize, TrainingEvent)> = Vec::new();
    for (k, a) in step1.audits.iter().enumerate() {
        events.extend(a.events.iter().cloned().map(|e| (k + 1, e)));
    }
    let mut evaluator = IncrementalEvaluator::new(subject.test_part())?;
    evaluator.update(ensemble.base_models())?;
    let mut steps = Vec::with_capacity(PERSONALIZATION_STEPS);
    for part in 0..PERSONALIZATION_STEPS {
        let step = part as u8 + 2;
        let chunk = subject.part(part);
        let recipe = config.recipe.with_seed(step_seed(config.master_seed, subject.index, step));
        let out = personalize_step(&mut ensemble, &chunk, config.strategy, config.base_kind, &config.params, &recipe)?;
        check_provenance(&out.audits, subject.index, true)?;
        record_slots(&out.audits, audits.len() + 1, &ensemble, &mut evaluator, &mut points, &mut events)?;
        audits.extend(out.audits);
        steps.push(StepRecord { step, tags: chunk.tags, truth: chunk.y, labeled: out.labeled, stats: out.stats });
    }
    Ok(LosoRun {
        subject_id: subject.subject_id.clone(),
        subject_index: subject.index,
        position: config.position,
        base_kind: config.base_kind,
        strategy: config.strategy,
        curve: LearningCurve { subject_id: subject.subject_id.clone(), points, events },
        steps,
        audits,
        final_ensemble_size: ensemble.len(),
    })
}

pub fn run_loso_subject(subjects: &[SubjectData], held_out: usize, config: &ExperimentConfig) -> Result<LosoRun> {
    let step1 = train_user_independent(subjects, held_out, config)?;
    personalize(subjects, held_out, &step1, config)
}
