use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LosoRun;
use crate::activity::BodyPosition;
use crate::classifiers::BaseKind;
use crate::personalization::LabelingStrategy;

/// A column of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StrategyVariant {
    /// The Step-1 ensemble, before any personalization.
    UserIndependent,
    Personalized { strategy: LabelingStrategy },
}

pub const STRATEGY_VARIANTS: [StrategyVariant; 5] = [
    StrategyVariant::UserIndependent,
    StrategyVariant::Personalized { strategy: LabelingStrategy::NonSupervised },
    StrategyVariant::Personalized { strategy: LabelingStrategy::SemiSupervised { threshold: 0.90 } },
    StrategyVariant::Personalized { strategy: LabelingStrategy::SemiSupervised { threshold: 0.95 } },
    StrategyVariant::Personalized { strategy: LabelingStrategy::Supervised },
];

impl StrategyVariant {
    pub fn column(&self) -> &'static str {
        match self {
            StrategyVariant::UserIndependent => "user_independent",
            StrategyVariant::Personalized { strategy } => match strategy {
                LabelingStrategy::NonSupervised => "nonsup",
                LabelingStrategy::Supervised => "sup",
                LabelingStrategy::SemiSupervised { threshold } if *threshold == 0.90 => "semi_0.90",
                LabelingStrategy::SemiSupervised { threshold } if *threshold == 0.95 => "semi_0.95",
                LabelingStrategy::SemiSupervised { .. } => "semi",
            },
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        STRATEGY_VARIANTS.iter().copied().find(|v| v.column() == name)
    }

    /// The labeling strategy whose runs feed this column. Step 1 is shared,
    /// so the user-independent column reads it off the non-supervised runs.
    pub fn source_strategy(&self) -> LabelingStrategy {
        match self {
            StrategyVariant::UserIndependent => LabelingStrategy::NonSupervised,
            StrategyVariant::Personalized { strategy } => *strategy,
        }
    }
}

/// Mean over subjects, in percent. `error` is `None` when any expected
/// subject has no run; query fractions are present for semi-supervised
/// columns only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryCell {
    pub error: Option<f64>,
    pub queried: Option<f64>,
    pub replaced: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub position: BodyPosition,
    pub base_kind: BaseKind,
    pub cells: [SummaryCell; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    /// Column means over the rows whose entry is present; `runs` counts those
    /// rows.
    pub mean: [SummaryCell; 5],
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

impl SummaryTable {
    /// Aggregates runs into one row per `(position, classifier)` pair, in the
    /// given order. The user-independent entry is the error after
    /// `models_per_step` models; every other entry is the error after the last
    /// slot.
    pub fn from_runs(
        runs: &[LosoRun],
        cells: &[(BodyPosition, BaseKind)],
        expected_subjects: usize,
        models_per_step: usize,
    ) -> SummaryTable {
        let mut rows = Vec::with_capacity(cells.len());
        for &(position, base_kind) in cells {
            let mut row = SummaryRow { position, base_kind, cells: [SummaryCell::default(); 5] };
            for (c, variant) in STRATEGY_VARIANTS.iter().enumerate() {
                let strategy = variant.source_strategy();
                let mut per_subject: BTreeMap<u16, &LosoRun> = BTreeMap::new();
                for r in runs {
                    if r.position == position && r.base_kind == base_kind && r.strategy == strategy {
                        per_subject.entry(r.subject_index).or_insert(r);
                    }
                }
                let selected: Vec<&LosoRun> = per_subject.values().copied().collect();
                let errors: Vec<f64> = selected
                    .iter()
                    .filter_map(|r| match variant {
                        StrategyVariant::UserIndependent => r.user_independent_error(models_per_step),
                        StrategyVariant::Personalized { .. } => r.curve.final_error(),
                    })
                    .map(|e| 100.0 * e)
                    .collect();
                let complete = errors.len() == expected_subjects && expected_subjects > 0;
                let cell = &mut row.cells[c];
                cell.runs = errors.len();
                cell.error = if complete { mean(&errors) } else { None };
                if complete && matches!(strategy, LabelingStrategy::SemiSupervised { .. }) {
                    let q: Vec<f64> = selected.iter().map(|r| 100.0 * r.query_stats().queried_fraction()).collect();
                    let p: Vec<f64> = selected.iter().map(|r| 100.0 * r.query_stats().replaced_fraction()).collect();
                    cell.queried = mean(&q);
                    cell.replaced = mean(&p);
                }
            }
            rows.push(row);
        }
        let mean = Self::column_means(&rows);
        SummaryTable { rows, mean }
    }

    pub fn column_means(rows: &[SummaryRow]) -> [SummaryCell; 5] {
        let mut out = [SummaryCell::default(); 5];
        for (c, cell) in out.iter_mut().enumerate() {
            let col = |f: fn(&SummaryCell) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(|r| f(&r.cells[c])).collect() };
            let errors = col(|x| x.error);
            cell.runs = errors.len();
            cell.error = mean(&errors);
            cell.queried = mean(&col(|x| x.queried));
            cell.replaced = mean(&col(|x| x.replaced));
        }
        out
    }

    pub fn row(&self, position: BodyPosition, base_kind: BaseKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.position == position && r.base_kind == base_kind)
    }

    pub fn missing_entries(&self) -> usize {
        self.rows.iter().map(|r| r.cells.iter().filter(|c| c.error.is_none()).count()).sum()
    }
}
