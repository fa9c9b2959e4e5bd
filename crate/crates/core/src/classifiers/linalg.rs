use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Lower-triangular Cholesky factor `L` of a symmetric positive definite
/// matrix `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    log_det: f64,
}

impl Cholesky {
    /// `None` if `a` is not (numerically) positive definite.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        let mut log_det = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s.is_nan() || s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    let d = libm::sqrt(s);
                    l[i * n + i] = d;
                    log_det += 2.0 * libm::log(d);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l, log_det })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `ln det A`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `dᵀ A⁻¹ d` by forward substitution `L z = d`.
    pub fn mahalanobis_sq(&self, d: &[f64]) -> f64 {
        let n = self.n;
        let mut z = [0.0f64; 32];
        let mut heap;
        let z: &mut [f64] = if n <= z.len() {
            &mut z[..n]
        } else {
            heap = vec![0.0; n];
            &mut heap
        };
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = d[i];
            for (lk, zk) in row.iter().zip(z.iter()) {
                s -= lk * zk;
            }
            let zi = s / self.l[i * n + i];
            z[i] = zi;
            acc += zi * zi;
        }
        acc
    }
}
