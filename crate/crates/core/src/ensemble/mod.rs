//! Learn++-style incremental ensemble with equal-weight posterior averaging.
//!
//! Each data chunk contributes `models_per_chunk` new base models. Every one
//! of them is built from its own seeded, class-stratified random sample of
//! the chunk, enlarged by noise injection, reduced to the columns chosen by
//! forward selection, and appended to the ensemble. Existing models are never
//! touched.

mod noise;
mod sfs;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use noise::{noise_inject, stratified_sample};
pub use sfs::{sfs_select, stratified_group_split, SfsOutcome};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::classifiers::{BaseKind, Classifier, ClassifierParams, Posterior};
use crate::error::{Error, Result};
use crate::samples::Samples;
use crate::seed::{self, purpose};

pub const MODELS_PER_CHUNK: usize = 3;

/// How the base models of one chunk are built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecipe {
    pub sampling_fraction: f64,
    pub noise_copies: usize,
    pub noise_scale: f64,
    pub sfs_max_features: usize,
    pub sfs_validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainingRecipe {
    fn default() -> Self {
        TrainingRecipe {
            sampling_fraction: 0.6,
            noise_copies: 2,
            noise_scale: 0.1,
            sfs_max_features: 15,
            sfs_validation_fraction: 0.3,
            seed: 0,
        }
    }
}

impl TrainingRecipe {
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_fraction > 0.0 && self.sampling_fraction <= 1.0) {
            return Err(Error::InvalidRecipe("sampling_fraction must lie in (0, 1]"));
        }
        if self.noise_scale.is_nan() || self.noise_scale < 0.0 {
            return Err(Error::InvalidRecipe("noise_scale must be non-negative"));
        }
        if self.sfs_max_features == 0 {
            return Err(Error::InvalidRecipe("sfs_max_features must be at least 1"));
        }
        if !(self.sfs_validation_fraction > 0.0 && self.sfs_validation_fraction < 1.0) {
            return Err(Error::InvalidRecipe("sfs_validation_fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A trained classifier and the columns of the full feature row it reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub features: Vec<usize>,
    pub classifier: Classifier,
}

impl BaseModel {
    pub fn posterior(&self, row: &[f64]) -> Result<Posterior> {
        let mut buf = [0.0f64; 64];
        let mut heap;
        let x: &mut [f64] = if self.features.len() <= buf.len() {
            &mut buf[..self.features.len()]
        } else {
            heap = alloc::vec![0.0; self.features.len()];
            &mut heap
        };
        for (dst, &j) in x.iter_mut().zip(&self.features) {
            *dst = *row.get(j).ok_or(Error::DimensionMismatch { expected: j + 1, got: row.len() })?;
        }
        self.classifier.posterior(x)
    }

    pub fn kind(&self) -> BaseKind {
        self.classifier.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    class_list: Vec<ActivityClass>,
    models_per_chunk: usize,
    base_models: Vec<BaseModel>,
}

impl Default for EnsembleModel {
    fn default() -> Self {
        Self::new()
    }
}

impl EnsembleModel {
    pub fn new() -> Self {
        Self::with_models_per_chunk(MODELS_PER_CHUNK)
    }

    pub fn with_models_per_chunk(models_per_chunk: usize) -> Self {
        EnsembleModel { class_list: ActivityClass::ALL.to_vec(), models_per_chunk, base_models: Vec::new() }
    }

    /// Builds an ensemble from already trained models.
    pub fn from_models(models_per_chunk: usize, base_models: Vec<BaseModel>) -> Self {
        EnsembleModel { class_list: ActivityClass::ALL.to_vec(), models_per_chunk, base_models }
    }

    pub fn class_list(&self) -> &[ActivityClass] {
        &self.class_list
    }

    pub fn models_per_chunk(&self) -> usize {
        self.models_per_chunk
    }

    pub fn base_models(&self) -> &[BaseModel] {
        &self.base_models
    }

    pub fn len(&self) -> usize {
        self.base_models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_models.is_empty()
    }

    pub fn push(&mut self, model: BaseModel) {
        self.base_models.push(model);
    }

    /// Per-model posteriors for one full feature row, in model order.
    pub fn member_posteriors(&self, row: &[f64]) -> Result<Vec<Posterior>> {
        self.base_models.iter().map(|m| m.posterior(row)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePrediction {
    pub class: ActivityClass,
    pub confidence: f64,
    pub posterior: Posterior,
}

impl From<Posterior> for EnsemblePrediction {
    fn from(posterior: Posterior) -> Self {
        EnsemblePrediction { class: posterior.argmax(), confidence: posterior.confidence(), posterior }
    }
}

/// Arithmetic mean of posteriors, summed in iteration order.
pub fn average_posteriors<'a, I>(posteriors: I) -> Option<Posterior>
where
    I: IntoIterator<Item = &'a Posterior>,
{
    let mut sum = [0.0; NUM_CLASSES];
    let mut n = 0usize;
    for p in posteriors {
        for (s, v) in sum.iter_mut().zip(&p.0) {
            *s += v;
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    Some(Posterior(sum))
}

pub fn ensemble_predict(ensemble: &EnsembleModel, row: &[f64]) -> Result<EnsemblePrediction> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let members = ensemble.member_posteriors(row)?;
    Ok(average_posteriors(&members).ok_or(Error::EmptyEnsemble)?.into())
}

/// Something noteworthy that happened while training one base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainingEvent {
    /// All chunk labels were one class. CART trains on it anyway; LDA and QDA
    /// skip the model.
    SingleClassChunk { class: ActivityClass, trained: bool },
    /// A class had too few rows for a Gaussian fit and was left out.
    SparseClassDropped { class: ActivityClass, rows: usize },
}

/// Audit record for one base model slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAudit {
    /// Position in the ensemble, `None` when the model was skipped.
    pub position: Option<usize>,
    pub seed: u64,
    /// Rows the model saw after sampling and noise injection.
    pub sample_size: usize,
    pub selected_features: Vec<usize>,
    pub validation_score: f64,
    /// Distinct `(subject, part)` pairs among the training rows.
    pub sources: Vec<(u16, u8)>,
    pub events: Vec<TrainingEvent>,
}

impl ModelAudit {
    pub fn skipped(&self) -> bool {
        self.position.is_none()
    }
}

/// Appends `ensemble.models_per_chunk()` base models trained on `chunk`.
///
/// Model `j` draws its sample, noise and selection split from seeds derived
/// from `(recipe.seed, j)`, so the models of one chunk differ from each other
/// and a rerun reproduces them exactly.
pub fn train_chunk_models(
    ensemble: &mut EnsembleModel,
    chunk: &Samples,
    kind: BaseKind,
    params: &ClassifierParams,
    recipe: &TrainingRecipe,
) -> Result<Vec<ModelAudit>> {
    recipe.validate()?;
    if chunk.is_empty() {
        return Err(Error::EmptyChunk);
    }
    let chunk_classes: Vec<ActivityClass> =
        ActivityClass::ALL.iter().copied().filter(|c| chunk.class_counts()[c.index()] > 0).collect();
    let mut audits = Vec::with_capacity(ensemble.models_per_chunk);
    for j in 0..ensemble.models_per_chunk {
        let model_seed = seed::derive(recipe.seed, &[purpose::MODEL, j as u64]);
        let mut audit = ModelAudit {
            position: None,
            seed: model_seed,
            sample_size: 0,
            selected_features: Vec::new(),
            validation_score: f64::NAN,
            sources: Vec::new(),
            events: Vec::new(),
        };
        if chunk_classes.len() == 1 {
            let trained = kind.supports_single_class();
            audit.events.push(TrainingEvent::SingleClassChunk { class: chunk_classes[0], trained });
            if !trained {
                audits.push(audit);
                continue;
            }
        }

        let picked = stratified_sample(&chunk.y, recipe.sampling_fraction, seed::derive(model_seed, &[purpose::SAMPLE]));
        let sample = chunk.subset(&picked);
        let mut data = noise_inject(&sample, recipe.noise_copies, recipe.noise_scale, seed::derive(model_seed, &[purpose::NOISE]));
        if kind != BaseKind::Cart {
            let counts = data.class_counts();
            let sparse: Vec<ActivityClass> =
                ActivityClass::ALL.iter().copied().filter(|c| (1..2).contains(&counts[c.index()])).collect();
            if !sparse.is_empty() {
                for &class in &sparse {
                    audit.events.push(TrainingEvent::SparseClassDropped { class, rows: counts[class.index()] });
                }
                let keep: Vec<usize> = (0..data.len()).filter(|&i| !sparse.contains(&data.y[i])).collect();
                data = data.subset(&keep);
            }
            if data.distinct_classes() < 2 {
                audits.push(audit);
                continue;
            }
        }

        let sources: BTreeSet<(u16, u8)> = data.tags.iter().map(|t| (t.subject, t.part)).collect();
        let sfs = sfs_select(
            &data,
            kind,
            params,
            recipe.sfs_max_features,
            recipe.sfs_validation_fraction,
            seed::derive(model_seed, &[purpose::SFS]),
        )?;
        let classifier = Classifier::train(kind, &data.x.select_columns(&sfs.features), &data.y, params)?;
        audit.position = Some(ensemble.len());
        audit.sample_size = data.len();
        audit.selected_features = sfs.features.clone();
        audit.validation_score = sfs.score;
        audit.sources = sources.into_iter().collect();
        ensemble.push(BaseModel { features: sfs.features, classifier });
        audits.push(audit);
    }
    Ok(audits)
}
