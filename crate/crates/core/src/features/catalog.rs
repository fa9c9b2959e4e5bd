use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::signals::{derive_signals, Channel, NUM_CHANNELS};
use super::spectral::SpectralTable;
use super::stats::{percentile_sorted, population_std, PercentileAggregates, PERCENTILE_LEVELS};
use crate::dataset::{ImuSample, SAMPLE_RATE_HZ};
use crate::error::{Error, Result};
use crate::samples::FeatureMatrix;

pub const FEATURES_PER_CHANNEL: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AggregateKind {
    SumAbove,
    SumBelow,
    SqSumAbove,
    SqSumBelow,
    CrossAbove,
    CrossBelow,
}

impl AggregateKind {
    pub const ALL: [AggregateKind; 6] = [
        AggregateKind::SumAbove,
        AggregateKind::SumBelow,
        AggregateKind::SqSumAbove,
        AggregateKind::SqSumBelow,
        AggregateKind::CrossAbove,
        AggregateKind::CrossBelow,
    ];

    fn id(self) -> &'static str {
        match self {
            AggregateKind::SumAbove => "sum_above",
            AggregateKind::SumBelow => "sum_below",
            AggregateKind::SqSumAbove => "sqsum_above",
            AggregateKind::SqSumBelow => "sqsum_below",
            AggregateKind::CrossAbove => "cross_above",
            AggregateKind::CrossBelow => "cross_below",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpectralKind {
    DominantFrequency,
    DominantAmplitude,
    Energy,
    Entropy,
    /// Index into [`super::BANDS_HZ`].
    Band(u8),
}

impl SpectralKind {
    pub const ALL: [SpectralKind; 8] = [
        SpectralKind::DominantFrequency,
        SpectralKind::DominantAmplitude,
        SpectralKind::Energy,
        SpectralKind::Entropy,
        SpectralKind::Band(0),
        SpectralKind::Band(1),
        SpectralKind::Band(2),
        SpectralKind::Band(3),
    ];
}

/// One feature computation applied to one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Extractor {
    Std,
    Min,
    Max,
    Median,
    /// Index into [`PERCENTILE_LEVELS`].
    Percentile(u8),
    Aggregate { level: u8, kind: AggregateKind },
    Spectral(SpectralKind),
}

impl Extractor {
    /// The 40 extractors applied to every channel, in catalog order.
    pub fn per_channel() -> Vec<Extractor> {
        let mut out = Vec::with_capacity(FEATURES_PER_CHANNEL);
        out.extend([Extractor::Std, Extractor::Min, Extractor::Max, Extractor::Median]);
        out.extend((0..4).map(Extractor::Percentile));
        for level in 0..4 {
            out.extend(AggregateKind::ALL.iter().map(|&kind| Extractor::Aggregate { level, kind }));
        }
        out.extend(SpectralKind::ALL.iter().map(|&k| Extractor::Spectral(k)));
        out
    }

    /// Position inside a channel's 40-value block.
    fn slot(self) -> usize {
        match self {
            Extractor::Std => 0,
            Extractor::Min => 1,
            Extractor::Max => 2,
            Extractor::Median => 3,
            Extractor::Percentile(l) => 4 + l as usize,
            Extractor::Aggregate { level, kind } => 8 + 6 * level as usize + kind as usize,
            Extractor::Spectral(SpectralKind::Band(b)) => 36 + b as usize,
            Extractor::Spectral(k) => {
                32 + match k {
                    SpectralKind::DominantFrequency => 0,
                    SpectralKind::DominantAmplitude => 1,
                    SpectralKind::Energy => 2,
                    _ => 3,
                }
            }
        }
    }

    fn is_valid(self) -> bool {
        match self {
            Extractor::Percentile(l) | Extractor::Aggregate { level: l, .. } => (l as usize) < PERCENTILE_LEVELS.len(),
            Extractor::Spectral(SpectralKind::Band(b)) => b < 4,
            _ => true,
        }
    }

    pub fn id(self) -> String {
        let level = |l: u8| PERCENTILE_LEVELS[l as usize] as u32;
        match self {
            Extractor::Std => "std".into(),
            Extractor::Min => "min".into(),
            Extractor::Max => "max".into(),
            Extractor::Median => "median".into(),
            Extractor::Percentile(l) => format!("p{}", level(l)),
            Extractor::Aggregate { level: l, kind } => format!("p{}_{}", level(l), kind.id()),
            Extractor::Spectral(k) => match k {
                SpectralKind::DominantFrequency => "dom_freq".into(),
                SpectralKind::DominantAmplitude => "dom_amp".into(),
                SpectralKind::Energy => "energy".into(),
                SpectralKind::Entropy => "entropy".into(),
                SpectralKind::Band(b) => {
                    let (lo, hi) = super::BANDS_HZ[b as usize];
                    format!("band_{}_{}hz", lo as u32, hi as u32)
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub channel: Channel,
    pub extractor: Extractor,
}

/// Ordered list of features; the column order of every [`FeatureMatrix`]
/// produced from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    features: Vec<FeatureSpec>,
    sample_rate_hz: f64,
}

impl FeatureCatalog {
    /// All 14 channels × 40 extractors.
    pub fn standard() -> Self {
        let per_channel = Extractor::per_channel();
        let features = Channel::ALL
            .iter()
            .flat_map(|&channel| {
                per_channel.iter().map(move |&extractor| FeatureSpec {
                    name: format!("{}_{}", channel.name(), extractor.id()),
                    channel,
                    extractor,
                })
            })
            .collect();
        FeatureCatalog { features, sample_rate_hz: SAMPLE_RATE_HZ }
    }

    /// A custom catalog. Names must be unique and extractors well formed.
    pub fn from_specs(features: Vec<FeatureSpec>) -> Result<Self> {
        for (i, f) in features.iter().enumerate() {
            if !f.extractor.is_valid() || features[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::InvalidRecipe("duplicate or malformed feature in catalog"));
            }
        }
        Ok(FeatureCatalog { features, sample_rate_hz: SAMPLE_RATE_HZ })
    }

    pub fn total_count(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn name(&self, index: usize) -> &str {
        &self.features[index].name
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

fn channel_block(signal: &[f64], table: &SpectralTable, rate: f64) -> [f64; FEATURES_PER_CHANNEL] {
    let mut out = [0.0; FEATURES_PER_CHANNEL];
    let mut sorted = signal.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    out[0] = population_std(signal);
    out[1] = sorted[0];
    out[2] = sorted[sorted.len() - 1];
    out[3] = percentile_sorted(&sorted, 50.0);
    for (l, &p) in PERCENTILE_LEVELS.iter().enumerate() {
        let t = percentile_sorted(&sorted, p);
        out[4 + l] = t;
        let agg = PercentileAggregates::at_threshold(signal, t).as_array();
        out[8 + 6 * l..14 + 6 * l].copy_from_slice(&agg);
    }
    out[32..40].copy_from_slice(&table.features(signal, rate).as_array());
    out
}

/// One feature row for one raw window, in catalog order.
pub fn extract_features(window: &[ImuSample], catalog: &FeatureCatalog) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(Error::EmptyInput);
    }
    let table = SpectralTable::new(window.len());
    extract_with_table(window, catalog, &table)
}

fn extract_with_table(window: &[ImuSample], catalog: &FeatureCatalog, table: &SpectralTable) -> Result<Vec<f64>> {
    let signals = derive_signals(window);
    let mut blocks: [Option<[f64; FEATURES_PER_CHANNEL]>; NUM_CHANNELS] = [None; NUM_CHANNELS];
    let mut row = Vec::with_capacity(catalog.total_count());
    for spec in &catalog.features {
        let block = blocks[spec.channel.index()]
            .get_or_insert_with(|| channel_block(signals.channel(spec.channel), table, catalog.sample_rate_hz));
        let value = block[spec.extractor.slot()];
        if !value.is_finite() {
            return Err(Error::NonFiniteFeature { name: spec.name.clone(), value });
        }
        row.push(value);
    }
    Ok(row)
}

/// Feature rows for a sequence of equally long windows.
pub fn extract_matrix<'a, I>(windows: I, catalog: &FeatureCatalog) -> Result<FeatureMatrix>
where
    I: IntoIterator<Item = &'a [ImuSample]>,
{
    let mut matrix = FeatureMatrix::new(catalog.total_count());
    let mut table: Option<SpectralTable> = None;
    for w in windows {
        if w.is_empty() {
            return Err(Error::EmptyInput);
        }
        let t = match &table {
            Some(t) if t.len() == w.len() => t,
            _ => table.insert(SpectralTable::new(w.len())),
        };
        matrix.push_row(&extract_with_table(w, catalog, t)?)?;
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standard_catalog_shape() {
        let cat = FeatureCatalog::standard();
        assert_eq!(cat.total_count(), NUM_CHANNELS * FEATURES_PER_CHANNEL);
        assert_eq!(cat.total_count(), 560);
        for (i, f) in cat.features().iter().enumerate() {
            assert!(cat.features()[..i].iter().all(|g| g.name != f.name), "duplicate {}", f.name);
        }
        assert_eq!(cat.name(0), "acc_x_std");
        assert_eq!(cat.name(8), "acc_x_p10_sum_above");
        assert_eq!(cat.name(39), "acc_x_band_6_10hz");
        assert_eq!(cat.name(559), "gyro_yz_band_6_10hz");
    }

    #[test]
    fn slots_follow_block_order() {
        for (i, e) in Extractor::per_channel().into_iter().enumerate() {
            assert_eq!(e.slot(), i);
        }
    }

    #[test]
    fn constant_window() {
        let cat = FeatureCatalog::standard();
        let row = extract_features(&vec![[3.0, 3.0, 3.0, 0.0, 0.0, 0.0]; 210], &cat).unwrap();
        assert_eq!(row.len(), cat.total_count());
        assert_eq!(&row[0..4], &[0.0, 3.0, 3.0, 3.0]);
        assert!(row.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let cat = FeatureCatalog::standard();
        let mut w = vec![[0.0; 6]; 210];
        w[5][1] = f64::INFINITY;
        match extract_features(&w, &cat) {
            Err(Error::NonFiniteFeature { name, .. }) => assert!(name.starts_with("acc_y")),
            other => panic!("expected NonFiniteFeature, got {other:?}"),
        }
    }

    #[test]
    fn custom_catalog_reorders() {
        let std = FeatureCatalog::standard();
        let picked = vec![std.features()[45].clone(), std.features()[3].clone()];
        let cat = FeatureCatalog::from_specs(picked).unwrap();
        let w: Vec<ImuSample> = (0..210).map(|t| [t as f64, 1.0, 2.0, 0.1 * t as f64, 0.0, 1.0]).collect();
        let full = extract_features(&w, &std).unwrap();
        assert_eq!(extract_features(&w, &cat).unwrap(), vec![full[45], full[3]]);
        let dup = vec![std.features()[1].clone(), std.features()[1].clone()];
        assert!(FeatureCatalog::from_specs(dup).is_err());
    }
}
