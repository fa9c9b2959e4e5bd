//! Spectral descriptors from the untapered DFT of a mean-removed signal.
//!
//! For a signal of length `n` sampled at `fs`, bin `k` (1 ≤ k ≤ n/2) has
//! frequency `k * fs / n` and power `|X_k|² / n`. The DC bin is excluded
//! everywhere since the mean is removed first.

use alloc::vec::Vec;

/// Half-open frequency bands, in Hz, whose power is reported.
pub const BANDS_HZ: [(f64, f64); 4] = [(0.0, 1.0), (1.0, 3.0), (3.0, 6.0), (6.0, 10.0)];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrequencyFeatures {
    /// Frequency of the strongest non-DC bin, in Hz (lowest bin on ties).
    pub dominant_hz: f64,
    /// Amplitude at the dominant bin, `2 |X_k| / n`.
    pub dominant_amplitude: f64,
    /// Total power over bins `1..=n/2`.
    pub energy: f64,
    /// Shannon entropy of the normalized power spectrum divided by
    /// `ln(n/2)`; 0 for a zero spectrum.
    pub entropy: f64,
    pub band_energy: [f64; 4],
}

impl FrequencyFeatures {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.dominant_hz,
            self.dominant_amplitude,
            self.energy,
            self.entropy,
            self.band_energy[0],
            self.band_energy[1],
            self.band_energy[2],
            self.band_energy[3],
        ]
    }
}

/// Twiddle factors `exp(-2πi m / n)` for `m = 0..n`; bin `k`, sample `t` uses
/// index `(k * t) mod n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl SpectralTable {
    pub fn new(n: usize) -> Self {
        let step = 2.0 * core::f64::consts::PI / n as f64;
        SpectralTable {
            n,
            cos: (0..n).map(|m| libm::cos(step * m as f64)).collect(),
            sin: (0..n).map(|m| libm::sin(step * m as f64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Power `|X_k|² / n` for `k = 1..=n/2` of the mean-removed signal.
    /// Returns all zeros when the signal is flat to rounding.
    pub fn power_spectrum(&self, signal: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(signal.len(), n, "signal length does not match the table");
        let half = n / 2;
        let mean = signal.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = signal.iter().map(|v| v - mean).collect();
        let spread = centered.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        if spread <= 1e-12 * libm::fabs(mean).max(1.0) {
            return alloc::vec![0.0; half];
        }
        (1..=half)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                let mut idx = 0usize;
                for &x in &centered {
                    re += x * self.cos[idx];
                    im -= x * self.sin[idx];
                    idx += k;
                    if idx >= n {
                        idx -= n;
                    }
                }
                (re * re + im * im) / n as f64
            })
            .collect()
    }

    pub fn features(&self, signal: &[f64], sample_rate_hz: f64) -> FrequencyFeatures {
        let n = self.n;
        let power = self.power_spectrum(signal);
        let energy: f64 = power.iter().sum();
        if energy == 0.0 {
            return FrequencyFeatures::default();
        }
        let mut best = 0usize;
        for (i, &p) in power.iter().enumerate() {
            if p > power[best] {
                best = i;
            }
        }
        let bin_hz = sample_rate_hz / n as f64;
        let mut band_energy = [0.0; 4];
        let mut entropy = 0.0;
        for (i, &p) in power.iter().enumerate() {
            let f = (i + 1) as f64 * bin_hz;
            for (b, &(lo, hi)) in BANDS_HZ.iter().enumerate() {
                if f >= lo && f < hi {
                    band_energy[b] += p;
                }
            }
            if p > 0.0 {
                let q = p / energy;
                entropy -= q * libm::log(q);
            }
        }
        let norm = libm::log(power.len() as f64);
        FrequencyFeatures {
            dominant_hz: (best + 1) as f64 * bin_hz,
            // |X_k| = sqrt(P_k * n); amplitude 2|X_k|/n
            dominant_amplitude: 2.0 * libm::sqrt(power[best] * n as f64) / n as f64,
            energy,
            entropy: if norm > 0.0 { entropy / norm } else { 0.0 },
            band_energy,
        }
    }
}

pub fn frequency_features(signal: &[f64], sample_rate_hz: f64) -> FrequencyFeatures {
    SpectralTable::new(signal.len()).features(signal, sample_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    const N: usize = 210;
    const FS: f64 = 50.0;

    fn sine(freq: f64, amp: f64) -> Vec<f64> {
        (0..N).map(|t| amp * libm::sin(2.0 * PI * freq * t as f64 / FS)).collect()
    }

    /// Direct DFT power at bin k, evaluating each term's angle from scratch.
    fn oracle_power(signal: &[f64], k: usize) -> f64 {
        let n = signal.len() as f64;
        let mean = signal.iter().sum::<f64>() / n;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &x) in signal.iter().enumerate() {
            let angle = 2.0 * PI * (k * t) as f64 / n;
            re += (x - mean) * libm::cos(angle);
            im -= (x - mean) * libm::sin(angle);
        }
        (re * re + im * im) / n
    }

    fn oracle_band(signal: &[f64], lo: f64, hi: f64) -> f64 {
        (1..=N / 2)
            .filter(|&k| {
                let f = k as f64 * FS / N as f64;
                f >= lo && f < hi
            })
            .map(|k| oracle_power(signal, k))
            .sum()
    }

    #[test]
    fn five_hz_sinusoid() {
        let s = sine(5.0, 1.0);
        let f = frequency_features(&s, FS);
        // 5 Hz is exactly bin 21 for n = 210 at 50 Hz
        assert!((f.dominant_hz - 5.0).abs() < 1e-12);
        assert!((f.dominant_amplitude - 1.0).abs() < 1e-9);
        let at_bin = oracle_power(&s, 21);
        assert!((at_bin - N as f64 / 4.0).abs() < 1e-9);
        assert!(f.band_energy[2] / f.energy > 0.999);
        assert!((f.band_energy[2] - oracle_band(&s, 3.0, 6.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_signal_is_all_zero() {
        let f = frequency_features(&vec![9.81; N], FS);
        assert_eq!(f, FrequencyFeatures::default());
        assert_eq!(frequency_features(&vec![0.1; N], FS).as_array(), [0.0; 8]);
    }

    #[test]
    fn two_tone_band_balance() {
        let s: Vec<f64> = sine(2.0, 1.0).iter().zip(sine(8.0, 1.0)).map(|(a, b)| a + b).collect();
        let f = frequency_features(&s, FS);
        let low = oracle_band(&s, 1.0, 3.0);
        let high = oracle_band(&s, 6.0, 10.0);
        assert!((low / high - 1.0).abs() < 0.05, "oracle ratio {}", low / high);
        assert!((f.band_energy[1] - low).abs() <= 1e-9 * low);
        assert!((f.band_energy[3] - high).abs() <= 1e-9 * high);
        assert!((f.band_energy[1] / f.band_energy[3] - 1.0).abs() < 0.05);
    }

    #[test]
    fn power_spectrum_matches_direct_sum() {
        let s: Vec<f64> = (0..N).map(|t| libm::sin(t as f64 * 0.37) + 0.01 * (t % 7) as f64).collect();
        let p = SpectralTable::new(N).power_spectrum(&s);
        for k in 1..=N / 2 {
            let o = oracle_power(&s, k);
            assert!((p[k - 1] - o).abs() <= 1e-9 * o.max(1.0));
        }
    }

    #[test]
    fn entropy_range() {
        let f = frequency_features(&sine(5.0, 2.0), FS);
        assert!(f.entropy >= 0.0 && f.entropy < 0.05);
        let noisy: Vec<f64> = (0..N).map(|t| ((t * 7919) % 101) as f64 / 101.0).collect();
        let g = frequency_features(&noisy, FS);
        assert!(g.entropy > 0.5 && g.entropy <= 1.0);
    }
}
