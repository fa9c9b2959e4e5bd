//! Dense row-major feature storage and labeled, provenance-tagged sample sets.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};

/// Rows are windows, columns follow the feature catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_cols: usize) -> Self {
        FeatureMatrix { n_cols, values: Vec::new() }
    }

    pub fn with_capacity(n_cols: usize, rows: usize) -> Self {
        FeatureMatrix { n_cols, values: Vec::with_capacity(n_cols * rows) }
    }

    /// Builds a matrix from row-major values.
    pub fn from_vec(n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_cols == 0 || !values.len().is_multiple_of(n_cols) {
            return Err(Error::DimensionMismatch { expected: n_cols, got: values.len() });
        }
        Ok(FeatureMatrix { n_cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(n_cols: usize, rows: &[R]) -> Result<Self> {
        let mut m = FeatureMatrix::with_capacity(n_cols, rows.len());
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: row.len() });
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.values.len().checked_div(self.n_cols).unwrap_or(0)
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::with_capacity(self.n_cols, rows.len());
        for &i in rows {
            out.values.extend_from_slice(self.row(i));
        }
        out
    }

    /// Copies the given columns, in the given order, into a new matrix.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::with_capacity(cols.len(), self.n_rows());
        for row in self.rows() {
            out.values.extend(cols.iter().map(|&j| row[j]));
        }
        out
    }
}

/// Where a row came from. `part` is the index of the subject's three-part
/// split (0 and 1 are personalization chunks, 2 is the test part).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowTag {
    pub subject: u16,
    pub part: u8,
    pub window: u32,
}

impl RowTag {
    pub const TEST_PART: u8 = 2;

    pub fn is_test_of(&self, subject: u16) -> bool {
        self.subject == subject && self.part == Self::TEST_PART
    }
}

/// Feature rows with a label and a provenance tag per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub x: FeatureMatrix,
    pub y: Vec<ActivityClass>,
    pub tags: Vec<RowTag>,
}

impl Samples {
    pub fn new(x: FeatureMatrix, y: Vec<ActivityClass>, tags: Vec<RowTag>) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.n_rows(), got: y.len() });
        }
        if tags.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), got: tags.len() });
        }
        Ok(Samples { x, y, tags })
    }

    /// Untagged samples; every row gets a tag with its own index as window.
    pub fn untagged(x: FeatureMatrix, y: Vec<ActivityClass>) -> Result<Self> {
        let tags = (0..y.len()).map(|i| RowTag { subject: 0, part: 0, window: i as u32 }).collect();
        Samples::new(x, y, tags)
    }

    pub fn empty(n_cols: usize) -> Self {
        Samples { x: FeatureMatrix::new(n_cols), y: Vec::new(), tags: Vec::new() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn subset(&self, rows: &[usize]) -> Samples {
        Samples {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            tags: rows.iter().map(|&i| self.tags[i]).collect(),
        }
    }

    pub fn with_labels(&self, y: Vec<ActivityClass>) -> Result<Samples> {
        Samples::new(self.x.clone(), y, self.tags.clone())
    }

    pub fn extend(&mut self, other: &Samples) -> Result<()> {
        if other.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: other.n_features() });
        }
        for r in other.x.rows() {
            self.x.push_row(r)?;
        }
        self.y.extend_from_slice(&other.y);
        self.tags.extend_from_slice(&other.tags);
        Ok(())
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        class_counts(&self.y)
    }

    pub fn distinct_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }
}

pub fn class_counts(labels: &[ActivityClass]) -> [usize; NUM_CLASSES] {
    let mut counts = [0usize; NUM_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn row_and_column_selection() {
        let m = FeatureMatrix::from_rows(3, &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.select_rows(&[1]).row(0), &[4.0, 5.0, 6.0]);
        let c = m.select_columns(&[2, 0]);
        assert_eq!(c.row(0), &[3.0, 1.0]);
        assert_eq!(c.row(1), &[6.0, 4.0]);
        assert!(FeatureMatrix::from_vec(3, vec![1.0; 4]).is_err());
    }

    #[test]
    fn samples_reject_mismatched_labels() {
        let m = FeatureMatrix::from_rows(1, &[[1.0], [2.0]]).unwrap();
        assert!(Samples::untagged(m, vec![ActivityClass::Biking]).is_err());
    }
}
