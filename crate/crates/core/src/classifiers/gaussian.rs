//! Gaussian discriminant analysis with pooled (LDA) or per-class (QDA)
//! covariance.
//!
//! Covariances are shrunk toward their diagonal,
//! `C' = (1 - λ) C + λ diag(C)`, where diagonal entries of the target are
//! floored at [`VARIANCE_FLOOR`] so that a constant feature cannot make the
//! shrunk matrix singular when `λ > 0`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::Cholesky;
use super::Posterior;
use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::samples::{class_counts, FeatureMatrix};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscriminantKind {
    Lda,
    Qda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDiscriminant {
    kind: DiscriminantKind,
    /// Classes seen in training; absent classes get posterior 0.
    classes: Vec<ActivityClass>,
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    /// One matrix for LDA, one per class for QDA, row-major `dim × dim`.
    covariances: Vec<Vec<f64>>,
    factors: Vec<Cholesky>,
    shrinkage: f64,
    dim: usize,
}

impl GaussianDiscriminant {
    pub fn train(kind: DiscriminantKind, x: &FeatureMatrix, y: &[ActivityClass], shrinkage: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&shrinkage) {
            return Err(Error::InvalidShrinkage(shrinkage));
        }
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.n_rows(), got: y.len() });
        }
        let dim = x.n_cols();
        let counts = class_counts(y);
        let classes: Vec<ActivityClass> =
            ActivityClass::ALL.iter().copied().filter(|c| counts[c.index()] > 0).collect();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        if let Some(&c) = classes.iter().find(|c| counts[c.index()] < 2) {
            return Err(Error::DegenerateClass { class: c, count: counts[c.index()] });
        }
        let n = y.len();
        let mut slot = [usize::MAX; NUM_CLASSES];
        for (i, c) in classes.iter().enumerate() {
            slot[c.index()] = i;
        }

        let mut means = vec![vec![0.0; dim]; classes.len()];
        for (row, label) in x.rows().zip(y) {
            for (m, v) in means[slot[label.index()]].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, c) in means.iter_mut().zip(&classes) {
            let k = counts[c.index()] as f64;
            m.iter_mut().for_each(|v| *v /= k);
        }

        let groups = match kind {
            DiscriminantKind::Lda => 1,
            DiscriminantKind::Qda => classes.len(),
        };
        let mut scatter = vec![vec![0.0; dim * dim]; groups];
        let mut diff = vec![0.0; dim];
        for (row, label) in x.rows().zip(y) {
            let s = slot[label.index()];
            for ((d, v), m) in diff.iter_mut().zip(row).zip(&means[s]) {
                *d = v - m;
            }
            let target = &mut scatter[if groups == 1 { 0 } else { s }];
            for i in 0..dim {
                let di = diff[i];
                for j in 0..=i {
                    target[i * dim + j] += di * diff[j];
                }
            }
        }

        let mut covariances = Vec::with_capacity(groups);
        let mut factors = Vec::with_capacity(groups);
        for (g, mut cov) in scatter.into_iter().enumerate() {
            let denom = match kind {
                DiscriminantKind::Lda => (n - classes.len()) as f64,
                DiscriminantKind::Qda => (counts[classes[g].index()] - 1) as f64,
            };
            for i in 0..dim {
                for j in 0..=i {
                    let v = cov[i * dim + j] / denom;
                    cov[i * dim + j] = v;
                    cov[j * dim + i] = v;
                }
            }
            shrink_toward_diagonal(&mut cov, dim, shrinkage);
            let f = Cholesky::factor(&cov, dim).ok_or(Error::SingularCovariance)?;
            covariances.push(cov);
            factors.push(f);
        }

        let priors = classes.iter().map(|c| counts[c.index()] as f64 / n as f64).collect();
        Ok(GaussianDiscriminant { kind, classes, priors, means, covariances, factors, shrinkage, dim })
    }

    pub fn kind(&self) -> DiscriminantKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> &[ActivityClass] {
        &self.classes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[Vec<f64>] {
        &self.covariances
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    /// `ln π_c − ½ ln|Σ_c| − ½ (x − μ_c)ᵀ Σ_c⁻¹ (x − μ_c)` per trained class.
    pub fn log_discriminants(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut diff = vec![0.0; self.dim];
        Ok((0..self.classes.len())
            .map(|c| {
                let f = &self.factors[if self.factors.len() == 1 { 0 } else { c }];
                for ((d, v), m) in diff.iter_mut().zip(x).zip(&self.means[c]) {
                    *d = v - m;
                }
                libm::log(self.priors[c]) - 0.5 * f.log_det() - 0.5 * f.mahalanobis_sq(&diff)
            })
            .collect())
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Posterior> {
        let g = self.log_discriminants(x)?;
        let top = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = [0.0; NUM_CLASSES];
        let mut total = 0.0;
        for (c, gi) in self.classes.iter().zip(&g) {
            let e = libm::exp(gi - top);
            p[c.index()] = e;
            total += e;
        }
        p.iter_mut().for_each(|v| *v /= total);
        Ok(Posterior(p))
    }
}

fn shrink_toward_diagonal(cov: &mut [f64], dim: usize, lambda: f64) {
    if lambda == 0.0 {
        return;
    }
    for i in 0..dim {
        for j in 0..dim {
            let v = cov[i * dim + j];
            cov[i * dim + j] = if i == j { (1.0 - lambda) * v + lambda * v.max(VARIANCE_FLOOR) } else { (1.0 - lambda) * v };
        }
    }
}
