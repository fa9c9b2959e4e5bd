//! CSV and JSON artifacts of an experiment run.
//!
//! Files written by [`emit_reports`]:
//! * `summary.csv`: one row per (position, classifier) plus a `mean` row.
//!   Errors and fractions are in percent; empty fields are missing entries.
//! * `learning_curves.csv`: one row per curve point.
//! * `query_log.csv`: one row per personalization window.
//! * `feature_catalog.csv`: the column order of every feature matrix.
//! * `failures.csv`: runs that could not be completed.
//! * `run_config.json`: the resolved configuration, seeds and library version.
//!
//! Given equal results every file is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use incpers_core::classifiers::BaseKind;
use incpers_core::dataset::DatasetManifest;
use incpers_core::features::{FeatureCatalog, WindowSpec};
use incpers_core::harness::{split_seed, step_seed, LosoRun, SummaryCell, SummaryRow, SummaryTable, STRATEGY_VARIANTS};
use incpers_core::personalization::LabelingStrategy;
use incpers_core::BodyPosition;
use serde::{Deserialize, Serialize};

use crate::pipeline::{CellFailure, MatrixResult, MatrixSpec};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const CURVES_FILE: &str = "learning_curves.csv";
pub const QUERY_LOG_FILE: &str = "query_log.csv";
pub const CATALOG_FILE: &str = "feature_catalog.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const CONFIG_FILE: &str = "run_config.json";

const SEMI_COLUMNS: [usize; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSeeds {
    pub subject_id: String,
    pub index: u16,
    pub split: u64,
    pub steps: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub library_version: String,
    pub spec: MatrixSpec,
    pub window: WindowSpec,
    pub feature_count: usize,
    pub manifest: DatasetManifest,
    pub seeds: Vec<SubjectSeeds>,
}

impl RunConfig {
    pub fn new(spec: &MatrixSpec, window: WindowSpec, catalog: &FeatureCatalog, manifest: &DatasetManifest) -> Self {
        let mut ids = manifest.included_subjects.clone();
        ids.sort();
        let seeds = ids
            .into_iter()
            .enumerate()
            .map(|(i, subject_id)| {
                let index = i as u16;
                SubjectSeeds {
                    subject_id,
                    index,
                    split: split_seed(spec.master_seed, index),
                    steps: [1, 2, 3].map(|s| step_seed(spec.master_seed, index, s)),
                }
            })
            .collect();
        RunConfig {
            library_version: incpers_core::VERSION.to_string(),
            spec: spec.clone(),
            window,
            feature_count: catalog.total_count(),
            manifest: manifest.clone(),
            seeds,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn threshold_field(s: &LabelingStrategy) -> String {
    opt(s.threshold())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    writer.into_inner().map_err(|e| anyhow!("flushing csv buffer: {e}"))
}

pub fn summary_header() -> Vec<String> {
    let mut h = vec!["position".to_string(), "classifier".to_string()];
    h.extend(STRATEGY_VARIANTS.iter().map(|v| v.column().to_string()));
    for prefix in ["queried", "replaced"] {
        h.extend(SEMI_COLUMNS.iter().map(|&c| format!("{prefix}_{}", STRATEGY_VARIANTS[c].column())));
    }
    h.extend(STRATEGY_VARIANTS.iter().map(|v| format!("runs_{}", v.column())));
    h
}

fn summary_record(position: &str, classifier: &str, cells: &[SummaryCell; 5]) -> Vec<String> {
    let mut r = vec![position.to_string(), classifier.to_string()];
    r.extend(cells.iter().map(|c| opt(c.error)));
    r.extend(SEMI_COLUMNS.iter().map(|&c| opt(cells[c].queried)));
    r.extend(SEMI_COLUMNS.iter().map(|&c| opt(cells[c].replaced)));
    r.extend(cells.iter().map(|c| c.runs.to_string()));
    r
}

pub fn summary_csv(table: &SummaryTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(summary_header())?;
    for row in &table.rows {
        w.write_record(summary_record(row.position.name(), row.base_kind.name(), &row.cells))?;
    }
    w.write_record(summary_record("mean", "all", &table.mean))?;
    finish(w)
}

pub fn parse_summary_csv(bytes: &[u8]) -> Result<SummaryTable> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != summary_header() {
        bail!("unexpected summary header {header:?}");
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse::<f64>().with_context(|| format!("bad number {s:?}"))?))
        }
    };
    let mut rows = Vec::new();
    let mut mean = None;
    for record in reader.records() {
        let r = record?;
        let mut cells = [SummaryCell::default(); 5];
        for (c, cell) in cells.iter_mut().enumerate() {
            cell.error = num(&r[2 + c])?;
            cell.runs = r[11 + c].parse().with_context(|| format!("bad run count {:?}", &r[11 + c]))?;
        }
        for (k, &c) in SEMI_COLUMNS.iter().enumerate() {
            cells[c].queried = num(&r[7 + k])?;
            cells[c].replaced = num(&r[9 + k])?;
        }
        if &r[0] == "mean" {
            mean = Some(cells);
        } else {
            let position: BodyPosition = r[0].parse().map_err(|e| anyhow!("{e}"))?;
            let base_kind: BaseKind = r[1].parse().map_err(|e| anyhow!("{e}"))?;
            rows.push(SummaryRow { position, base_kind, cells });
        }
    }
    Ok(SummaryTable { rows, mean: mean.ok_or_else(|| anyhow!("summary has no mean row"))? })
}

pub fn learning_curves_csv(runs: &[LosoRun]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject", "position", "classifier", "strategy", "threshold", "n_models", "ensemble_size", "error_rate"])?;
    for run in runs {
        for p in &run.curve.points {
            w.write_record([
                run.subject_id.clone(),
                run.position.name().into(),
                run.base_kind.name().into(),
                run.strategy.name().into(),
                threshold_field(&run.strategy),
                p.slot.to_string(),
                p.ensemble_size.to_string(),
                p.error_rate.to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn query_log_csv(runs: &[LosoRun]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "subject",
        "position",
        "classifier",
        "strategy",
        "threshold",
        "step",
        "row_index",
        "source",
        "predicted",
        "confidence",
        "final_label",
    ])?;
    for run in runs {
        for step in &run.steps {
            let l = &step.labeled;
            for i in 0..l.len() {
                w.write_record([
                    run.subject_id.clone(),
                    run.position.name().into(),
                    run.base_kind.name().into(),
                    run.strategy.name().into(),
                    threshold_field(&run.strategy),
                    step.step.to_string(),
                    step.tags[i].window.to_string(),
                    l.sources[i].name().into(),
                    l.predicted[i].name().into(),
                    l.confidences[i].to_string(),
                    l.labels[i].name().into(),
                ])?;
            }
        }
    }
    finish(w)
}

pub fn feature_catalog_csv(catalog: &FeatureCatalog) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature_index", "feature_name", "channel", "extractor"])?;
    for (i, f) in catalog.features().iter().enumerate() {
        w.write_record([i.to_string(), f.name.clone(), f.channel.name().into(), f.extractor.id()])?;
    }
    finish(w)
}

pub fn failures_csv(failures: &[CellFailure]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject", "position", "classifier", "strategy", "threshold", "error"])?;
    for f in failures {
        w.write_record([
            f.subject_id.clone(),
            f.position.name().into(),
            f.base_kind.name().into(),
            f.strategy.map_or("step1", |s| s.name()).into(),
            f.strategy.as_ref().map(threshold_field).unwrap_or_default(),
            f.error.clone(),
        ])?;
    }
    finish(w)
}

/// Writes every report file into `out_dir` and returns the paths written.
pub fn emit_reports(result: &MatrixResult, catalog: &FeatureCatalog, config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.runs.is_empty() && result.failures.is_empty() {
        bail!("no results to report");
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut json = serde_json::to_vec_pretty(config)?;
    json.push(b'\n');
    let files = [
        (SUMMARY_FILE, summary_csv(&result.summary)?),
        (CURVES_FILE, learning_curves_csv(&result.runs)?),
        (QUERY_LOG_FILE, query_log_csv(&result.runs)?),
        (CATALOG_FILE, feature_catalog_csv(catalog)?),
        (FAILURES_FILE, failures_csv(&result.failures)?),
        (CONFIG_FILE, json),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

