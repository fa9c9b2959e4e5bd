//! CART classification tree grown greedily on Gini impurity.
//!
//! A node is split on the `(feature, threshold)` pair with the lowest
//! weighted child impurity, searching features in ascending index order and
//! thresholds in ascending order and keeping the first best, so ties resolve
//! to the lowest feature index and then the lowest threshold. Thresholds are
//! midpoints between consecutive distinct values; rows with
//! `x[feature] <= threshold` go left. Growth stops at `max_depth`, when a node
//! is pure, when no split leaves `min_leaf_size` rows on both sides, or when
//! no split lowers the impurity.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Posterior;
use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::samples::FeatureMatrix;

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: [u32; NUM_CLASSES] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    max_depth: usize,
    min_leaf_size: usize,
    laplace: bool,
}

/// Gini impurity `1 − Σ p_c²` of a class histogram.
pub fn gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

/// `(c + 1) / (total + K)` over a histogram of `K` classes.
pub fn laplace_posterior(counts: &[u32]) -> Vec<f64> {
    let total: u32 = counts.iter().sum();
    let denom = (total as usize + counts.len()) as f64;
    counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect()
}

/// Row order of every column of a matrix, ascending by value with ties in
/// row order. Built once, it lets many trees over column subsets of the same
/// rows skip per-node sorting.
#[derive(Debug, Clone, PartialEq)]
pub struct PresortedColumns {
    orders: Vec<Vec<u32>>,
    /// Column-major copy of the matrix.
    values: Vec<Vec<f64>>,
    n_rows: usize,
}

impl PresortedColumns {
    pub fn new(x: &FeatureMatrix) -> Self {
        let n = x.n_rows();
        let values: Vec<Vec<f64>> = (0..x.n_cols()).map(|f| (0..n).map(|r| x.get(r, f)).collect()).collect();
        let orders = values
            .iter()
            .map(|col| {
                let mut o: Vec<u32> = (0..n as u32).collect();
                o.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                o
            })
            .collect();
        PresortedColumns { orders, values, n_rows: n }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
}

#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    row: u32,
    class: u8,
}

struct Builder {
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
    /// Rows sorted by each tree feature; a node owns the same range `lo..hi`
    /// in each of them.
    orders: Vec<Vec<Entry>>,
    /// Class of every row, for histograms when there are no features.
    classes: Vec<u8>,
    goes_left: Vec<bool>,
    scratch: Vec<Entry>,
    /// `reciprocal[k] = 1 / k`
    reciprocal: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder {
    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> usize {
        let mut counts = [0u32; NUM_CLASSES];
        match self.orders.first() {
            Some(order) => order[lo..hi].iter().for_each(|e| counts[e.class as usize] += 1),
            None => self.classes.iter().for_each(|&c| counts[c as usize] += 1),
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let n = hi - lo;
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || n < 2 * self.min_leaf {
            return id;
        }
        let parent = gini(&counts);
        let Some(best) = self.best_split(lo, hi, &counts) else {
            return id;
        };
        if best.impurity >= parent - GAIN_EPS {
            return id;
        }
        let mut n_left = 0;
        for e in &self.orders[best.feature][lo..hi] {
            let left = e.value <= best.threshold;
            self.goes_left[e.row as usize] = left;
            n_left += left as usize;
        }
        for order in self.orders.iter_mut() {
            self.scratch.clear();
            let mut w = lo;
            for k in lo..hi {
                let e = order[k];
                if self.goes_left[e.row as usize] {
                    order[w] = e;
                    w += 1;
                } else {
                    self.scratch.push(e);
                }
            }
            order[w..hi].copy_from_slice(&self.scratch);
        }
        let mid = lo + n_left;
        let left = self.grow(lo, mid, depth + 1);
        let right = self.grow(mid, hi, depth + 1);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        id
    }

    fn best_split(&self, lo: usize, hi: usize, counts: &[u32; NUM_CLASSES]) -> Option<BestSplit> {
        let n = hi - lo;
        let total_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let inv = &self.reciprocal;
        let mut best: Option<BestSplit> = None;
        for (f, order) in self.orders.iter().enumerate() {
            let order = &order[lo..hi];
            let mut left = [0u32; NUM_CLASSES];
            let mut right = *counts;
            let (mut sq_left, mut sq_right) = (0.0f64, total_sq);
            for i in 0..n - 1 {
                let c = order[i].class as usize;
                sq_left += 2.0 * left[c] as f64 + 1.0;
                sq_right -= 2.0 * right[c] as f64 - 1.0;
                left[c] += 1;
                right[c] -= 1;
                let (a, b) = (order[i].value, order[i + 1].value);
                let n_left = i + 1;
                let n_right = n - n_left;
                if a < b && n_left >= self.min_leaf && n_right >= self.min_leaf {
                    // n_L * gini_L + n_R * gini_R = n − ΣL²/n_L − ΣR²/n_R
                    let weighted = (n as f64 - sq_left * inv[n_left] - sq_right * inv[n_right]) * inv[n];
                    if best.as_ref().is_none_or(|bs| weighted < bs.impurity - GAIN_EPS) {
                        let mid = a + (b - a) / 2.0;
                        let threshold = if mid < b { mid } else { a };
                        best = Some(BestSplit { feature: f, threshold, impurity: weighted });
                    }
                }
            }
        }
        best
    }
}

impl DecisionTree {
    pub fn train(
        x: &FeatureMatrix,
        y: &[ActivityClass],
        max_depth: usize,
        min_leaf_size: usize,
        laplace: bool,
    ) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.n_rows(), got: y.len() });
        }
        let columns: Vec<usize> = (0..x.n_cols()).collect();
        Self::train_on_columns(x, &columns, &PresortedColumns::new(x), y, max_depth, min_leaf_size, laplace)
    }

    /// Trains on the listed columns of `x`; tree feature `i` is `columns[i]`.
    /// `presorted` must have been built from `x`.
    pub fn train_on_columns(
        x: &FeatureMatrix,
        columns: &[usize],
        presorted: &PresortedColumns,
        y: &[ActivityClass],
        max_depth: usize,
        min_leaf_size: usize,
        laplace: bool,
    ) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if x.n_rows() != y.len() || presorted.n_rows != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), got: x.n_rows() });
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= x.n_cols()) {
            return Err(Error::DimensionMismatch { expected: x.n_cols(), got: c + 1 });
        }
        let min_leaf = min_leaf_size.max(1);
        let classes: Vec<u8> = y.iter().map(|c| c.index() as u8).collect();
        let orders = columns
            .iter()
            .map(|&c| {
                let values = &presorted.values[c];
                presorted.orders[c]
                    .iter()
                    .map(|&row| Entry { value: values[row as usize], row, class: classes[row as usize] })
                    .collect()
            })
            .collect();
        let mut b = Builder {
            max_depth,
            min_leaf,
            nodes: Vec::new(),
            orders,
            classes,
            goes_left: alloc::vec![false; y.len()],
            scratch: Vec::with_capacity(y.len()),
            reciprocal: (0..=y.len()).map(|k| 1.0 / k as f64).collect(),
        };
        b.grow(0, y.len(), 0);
        Ok(DecisionTree { nodes: b.nodes, n_features: columns.len(), max_depth, min_leaf_size: min_leaf, laplace })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf_size(&self) -> usize {
        self.min_leaf_size
    }

    pub fn laplace(&self) -> bool {
        self.laplace
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return Ok(i),
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Training histogram of the subtree rooted at `node`.
    pub fn subtree_counts(&self, node: usize) -> [u32; NUM_CLASSES] {
        match &self.nodes[node] {
            Node::Leaf { counts } => *counts,
            Node::Split { left, right, .. } => {
                let (a, b) = (self.subtree_counts(*left), self.subtree_counts(*right));
                core::array::from_fn(|c| a[c] + b[c])
            }
        }
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Posterior> {
        let Node::Leaf { counts } = &self.nodes[self.leaf_index(x)?] else { unreachable!() };
        let mut p = [0.0; NUM_CLASSES];
        if self.laplace {
            p.copy_from_slice(&laplace_posterior(counts));
        } else {
            let total: u32 = counts.iter().sum();
            for (pi, &c) in p.iter_mut().zip(counts) {
                *pi = c as f64 / total as f64;
            }
        }
        Ok(Posterior(p))
    }
}
