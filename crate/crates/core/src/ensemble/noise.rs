use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::activity::NUM_CLASSES;
use crate::samples::{FeatureMatrix, Samples};

/// Appends `copies` jittered replicas of every row. Replica feature `j` is the
/// original plus zero-mean Gaussian noise with standard deviation
/// `scale * std_j`, where `std_j` is the (population) standard deviation of
/// column `j` in the input. Labels and provenance tags are replicated.
pub fn noise_inject(samples: &Samples, copies: usize, scale: f64, seed: u64) -> Samples {
    if copies == 0 {
        return samples.clone();
    }
    let n = samples.len();
    let d = samples.n_features();
    let mut col_std = vec![0.0; d];
    if n > 0 {
        let mut mean = vec![0.0; d];
        for r in samples.x.rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        for r in samples.x.rows() {
            for ((s, v), m) in col_std.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        col_std.iter_mut().for_each(|s| *s = scale * libm::sqrt(*s / n as f64));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * d * (copies + 1));
    values.extend_from_slice(samples.x.as_slice());
    let mut y = Vec::with_capacity(n * (copies + 1));
    let mut tags = Vec::with_capacity(n * (copies + 1));
    y.extend_from_slice(&samples.y);
    tags.extend_from_slice(&samples.tags);
    for _ in 0..copies {
        for (i, r) in samples.x.rows().enumerate() {
            for (v, s) in r.iter().zip(&col_std) {
                let e: f64 = StandardNormal.sample(&mut rng);
                values.push(v + s * e);
            }
            y.push(samples.y[i]);
            tags.push(samples.tags[i]);
        }
    }
    let x = FeatureMatrix::from_vec(d.max(1), values).unwrap_or_else(|_| FeatureMatrix::new(d));
    Samples { x, y, tags }
}

/// Per-class random sample of `round(fraction * n_c)` rows (at least one per
/// class present), returned in ascending row order.
pub fn stratified_sample(labels: &[crate::ActivityClass], fraction: f64, seed: u64) -> Vec<usize> {
    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for rows in by_class.iter_mut() {
        if rows.is_empty() {
            continue;
        }
        let k = (libm::round(fraction * rows.len() as f64) as usize).clamp(1, rows.len());
        rows.shuffle(&mut rng);
        out.extend_from_slice(&rows[..k]);
    }
    out.sort_unstable();
    out
}
