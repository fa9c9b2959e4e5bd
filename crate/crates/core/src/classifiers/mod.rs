//! Base classifier families and their class posteriors.
//!
//! Every model returns a [`Posterior`] over the full seven-class list. Its
//! maximum is the confidence that drives semi-supervised querying: for LDA
//! and QDA it is the softmax of the Gaussian log-discriminants, for CART the
//! Laplace-smoothed leaf histogram `(count + 1) / (total + 7)` (or the raw
//! leaf frequencies when smoothing is switched off).

mod cart;
mod gaussian;
mod linalg;

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cart::{gini, laplace_posterior, DecisionTree, Node, PresortedColumns};
pub use gaussian::{DiscriminantKind, GaussianDiscriminant, VARIANCE_FLOOR};
pub use linalg::Cholesky;

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::samples::FeatureMatrix;

/// Class probabilities in [`ActivityClass::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior(pub [f64; NUM_CLASSES]);

impl Posterior {
    pub fn probabilities(&self) -> &[f64; NUM_CLASSES] {
        &self.0
    }

    /// Most probable class; ties go to the class earliest in the class list.
    pub fn argmax(&self) -> ActivityClass {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        ActivityClass::ALL[best]
    }

    pub fn confidence(&self) -> f64 {
        self.0[self.argmax().index()]
    }

    pub fn get(&self, class: ActivityClass) -> f64 {
        self.0[class.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Lda,
    Qda,
    Cart,
}

impl BaseKind {
    pub const ALL: [BaseKind; 3] = [BaseKind::Lda, BaseKind::Qda, BaseKind::Cart];

    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Lda => "lda",
            BaseKind::Qda => "qda",
            BaseKind::Cart => "cart",
        }
    }

    /// Whether the family can be fit to a single-class training set.
    pub fn supports_single_class(self) -> bool {
        matches!(self, BaseKind::Cart)
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lda" => Ok(BaseKind::Lda),
            "qda" => Ok(BaseKind::Qda),
            "cart" => Ok(BaseKind::Cart),
            _ => Err(Error::InvalidRecipe("classifier must be one of lda, qda, cart")),
        }
    }
}

/// Hyperparameters shared by the three families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub shrinkage: f64,
    pub max_depth: usize,
    pub min_leaf_size: usize,
    pub laplace: bool,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams { shrinkage: 0.05, max_depth: 12, min_leaf_size: 3, laplace: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Gaussian(GaussianDiscriminant),
    Tree(DecisionTree),
}

impl Classifier {
    pub fn train(kind: BaseKind, x: &FeatureMatrix, y: &[ActivityClass], params: &ClassifierParams) -> Result<Self> {
        Ok(match kind {
            BaseKind::Lda => Classifier::Gaussian(train_lda(x, y, params.shrinkage)?),
            BaseKind::Qda => Classifier::Gaussian(train_qda(x, y, params.shrinkage)?),
            BaseKind::Cart => Classifier::Tree(train_cart(x, y, params.max_depth, params.min_leaf_size, params.laplace)?),
        })
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            Classifier::Gaussian(g) if g.kind() == DiscriminantKind::Lda => BaseKind::Lda,
            Classifier::Gaussian(_) => BaseKind::Qda,
            Classifier::Tree(_) => BaseKind::Cart,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Gaussian(g) => g.dim(),
            Classifier::Tree(t) => t.n_features(),
        }
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Posterior> {
        match self {
            Classifier::Gaussian(g) => g.posterior(x),
            Classifier::Tree(t) => t.posterior(x),
        }
    }
}

pub fn train_lda(x: &FeatureMatrix, y: &[ActivityClass], shrinkage: f64) -> Result<GaussianDiscriminant> {
    GaussianDiscriminant::train(DiscriminantKind::Lda, x, y, shrinkage)
}

pub fn train_qda(x: &FeatureMatrix, y: &[ActivityClass], shrinkage: f64) -> Result<GaussianDiscriminant> {
    GaussianDiscriminant::train(DiscriminantKind::Qda, x, y, shrinkage)
}

pub fn train_cart(
    x: &FeatureMatrix,
    y: &[ActivityClass],
    max_depth: usize,
    min_leaf_size: usize,
    laplace: bool,
) -> Result<DecisionTree> {
    DecisionTree::train(x, y, max_depth, min_leaf_size, laplace)
}

pub fn predict_posterior(model: &Classifier, x: &[f64]) -> Result<Posterior> {
    model.posterior(x)
}
