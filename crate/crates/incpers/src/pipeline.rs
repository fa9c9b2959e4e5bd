//! Loading a dataset into feature rows and running the experiment grid.

use std::collections::BTreeMap;
use std::path::Path;

use incpers_core::classifiers::{BaseKind, ClassifierParams};
use incpers_core::dataset::DatasetManifest;
use incpers_core::ensemble::{TrainingRecipe, MODELS_PER_CHUNK};
use incpers_core::features::{FeatureCatalog, WindowSpec};
use incpers_core::harness::{
    personalize, prepare_subject, split_seed, train_user_independent, ExperimentConfig, LosoRun, SubjectData, SummaryTable,
};
use incpers_core::personalization::LabelingStrategy;
use incpers_core::BodyPosition;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_recording, recording_path, LoadError};

/// Loads and featurizes every included subject at `position`. Subject `i` of
/// the (sorted) included list gets index `i`.
pub fn load_position(
    data_dir: &Path,
    manifest: &DatasetManifest,
    position: BodyPosition,
    catalog: &FeatureCatalog,
    window: &WindowSpec,
    master_seed: u64,
) -> Result<Vec<SubjectData>, LoadError> {
    let mut ids = manifest.included_subjects.clone();
    ids.sort();
    ids.par_iter()
        .enumerate()
        .map(|(i, id)| {
            let path = recording_path(data_dir, id, position);
            let rec = read_recording(&path, id, position)?;
            let index = i as u16;
            prepare_subject(&rec, index, catalog, window, split_seed(master_seed, index))
                .map_err(|source| LoadError::Recording { path, source })
        })
        .collect()
}

pub fn load_dataset(
    data_dir: &Path,
    manifest: &DatasetManifest,
    positions: &[BodyPosition],
    catalog: &FeatureCatalog,
    window: &WindowSpec,
    master_seed: u64,
) -> Result<BTreeMap<BodyPosition, Vec<SubjectData>>, LoadError> {
    positions
        .iter()
        .map(|&p| Ok((p, load_position(data_dir, manifest, p, catalog, window, master_seed)?)))
        .collect()
}

pub fn default_strategies() -> Vec<LabelingStrategy> {
    vec![
        LabelingStrategy::NonSupervised,
        LabelingStrategy::SemiSupervised { threshold: 0.90 },
        LabelingStrategy::SemiSupervised { threshold: 0.95 },
        LabelingStrategy::Supervised,
    ]
}

/// The grid of configurations to run. Every `(position, classifier,
/// held-out subject)` trains Step 1 once and reuses it for all strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub positions: Vec<BodyPosition>,
    pub classifiers: Vec<BaseKind>,
    pub strategies: Vec<LabelingStrategy>,
    pub recipe: TrainingRecipe,
    pub params: ClassifierParams,
    pub models_per_step: usize,
    pub master_seed: u64,
}

impl MatrixSpec {
    pub fn full(master_seed: u64) -> Self {
        MatrixSpec {
            positions: BodyPosition::ALL.to_vec(),
            classifiers: vec![BaseKind::Lda, BaseKind::Qda, BaseKind::Cart],
            strategies: default_strategies(),
            recipe: TrainingRecipe::default(),
            params: ClassifierParams::default(),
            models_per_step: MODELS_PER_CHUNK,
            master_seed,
        }
    }

    pub fn config(&self, position: BodyPosition, base_kind: BaseKind, strategy: LabelingStrategy) -> ExperimentConfig {
        ExperimentConfig {
            position,
            base_kind,
            strategy,
            recipe: self.recipe,
            params: self.params,
            models_per_step: self.models_per_step,
            master_seed: self.master_seed,
        }
    }

    pub fn cells(&self) -> Vec<(BodyPosition, BaseKind)> {
        self.positions.iter().flat_map(|&p| self.classifiers.iter().map(move |&k| (p, k))).collect()
    }
}

/// A run that could not be completed. `strategy` is `None` when Step 1
/// failed, which takes every strategy of that subject down with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub position: BodyPosition,
    pub base_kind: BaseKind,
    pub strategy: Option<LabelingStrategy>,
    pub subject_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResult {
    pub spec: MatrixSpec,
    /// Ordered by position, classifier, held-out subject, strategy.
    pub runs: Vec<LosoRun>,
    pub failures: Vec<CellFailure>,
    pub summary: SummaryTable,
    pub subjects: BTreeMap<BodyPosition, Vec<String>>,
}

/// Runs every configuration of `spec` over `data`. Failed runs are recorded
/// and left out of the summary, whose affected entries become missing.
pub fn run_matrix(data: &BTreeMap<BodyPosition, Vec<SubjectData>>, spec: &MatrixSpec) -> MatrixResult {
    let mut tasks = Vec::new();
    for (position, kind) in spec.cells() {
        let n = data.get(&position).map_or(0, Vec::len);
        tasks.extend((0..n).map(|s| (position, kind, s)));
    }
    let outcomes: Vec<(Vec<LosoRun>, Vec<CellFailure>)> = tasks
        .par_iter()
        .map(|&(position, kind, held_out)| {
            let subjects = &data[&position];
            let subject_id = subjects[held_out].subject_id.clone();
            let fail = |strategy, e: incpers_core::Error| CellFailure {
                position,
                base_kind: kind,
                strategy,
                subject_id: subject_id.clone(),
                error: e.to_string(),
            };
            let Some(first) = spec.strategies.first() else { return (Vec::new(), Vec::new()) };
            let step1 = match train_user_independent(subjects, held_out, &spec.config(position, kind, *first)) {
                Ok(m) => m,
                Err(e) => return (Vec::new(), vec![fail(None, e)]),
            };
            let mut runs = Vec::new();
            let mut failures = Vec::new();
            for &strategy in &spec.strategies {
                match personalize(subjects, held_out, &step1, &spec.config(position, kind, strategy)) {
                    Ok(run) => runs.push(run),
                    Err(e) => failures.push(fail(Some(strategy), e)),
                }
            }
            (runs, failures)
        })
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in outcomes {
        runs.extend(r);
        failures.extend(f);
    }
    let summary = summarize(&runs, spec, data);
    let subjects = data.iter().map(|(p, s)| (*p, s.iter().map(|d| d.subject_id.clone()).collect())).collect();
    MatrixResult { spec: spec.clone(), runs, failures, summary, subjects }
}

fn summarize(runs: &[LosoRun], spec: &MatrixSpec, data: &BTreeMap<BodyPosition, Vec<SubjectData>>) -> SummaryTable {
    // cells of one position expect that position's subject count
    let mut rows = Vec::new();
    for (position, kind) in spec.cells() {
        let expected = data.get(&position).map_or(0, Vec::len);
        let t = SummaryTable::from_runs(runs, &[(position, kind)], expected, spec.models_per_step);
        rows.extend(t.rows);
    }
    let mean = SummaryTable::column_means(&rows);
    SummaryTable { rows, mean }
}
