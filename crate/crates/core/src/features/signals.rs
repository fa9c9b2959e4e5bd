use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::ImuSample;

pub const NUM_CHANNELS: usize = 14;

/// The 14 signals features are computed on. Square-sum channels are the
/// plain sum of two squared axes (no square root).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    AccX,
    AccY,
    AccZ,
    GyroX,
    GyroY,
    GyroZ,
    AccMagnitude,
    GyroMagnitude,
    AccXY,
    AccXZ,
    AccYZ,
    GyroXY,
    GyroXZ,
    GyroYZ,
}

impl Channel {
    pub const ALL: [Channel; NUM_CHANNELS] = [
        Channel::AccX,
        Channel::AccY,
        Channel::AccZ,
        Channel::GyroX,
        Channel::GyroY,
        Channel::GyroZ,
        Channel::AccMagnitude,
        Channel::GyroMagnitude,
        Channel::AccXY,
        Channel::AccXZ,
        Channel::AccYZ,
        Channel::GyroXY,
        Channel::GyroXZ,
        Channel::GyroYZ,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::AccX => "acc_x",
            Channel::AccY => "acc_y",
            Channel::AccZ => "acc_z",
            Channel::GyroX => "gyro_x",
            Channel::GyroY => "gyro_y",
            Channel::GyroZ => "gyro_z",
            Channel::AccMagnitude => "acc_mag",
            Channel::GyroMagnitude => "gyro_mag",
            Channel::AccXY => "acc_xy",
            Channel::AccXZ => "acc_xz",
            Channel::AccYZ => "acc_yz",
            Channel::GyroXY => "gyro_xy",
            Channel::GyroXZ => "gyro_xz",
            Channel::GyroYZ => "gyro_yz",
        }
    }
}

/// Channel-major storage: `channel(c)` is a slice of window length.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSignals {
    len: usize,
    data: Vec<f64>,
}

impl DerivedSignals {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channel(&self, c: Channel) -> &[f64] {
        let i = c.index();
        &self.data[i * self.len..(i + 1) * self.len]
    }
}

pub fn derive_signals(window: &[ImuSample]) -> DerivedSignals {
    let len = window.len();
    let mut data = vec![0.0; NUM_CHANNELS * len];
    for (t, s) in window.iter().enumerate() {
        let [ax, ay, az, gx, gy, gz] = *s;
        let values = [
            ax,
            ay,
            az,
            gx,
            gy,
            gz,
            libm::sqrt(ax * ax + ay * ay + az * az),
            libm::sqrt(gx * gx + gy * gy + gz * gz),
            ax * ax + ay * ay,
            ax * ax + az * az,
            ay * ay + az * az,
            gx * gx + gy * gy,
            gx * gx + gz * gz,
            gy * gy + gz * gz,
        ];
        for (c, v) in values.into_iter().enumerate() {
            data[c * len + t] = v;
        }
    }
    DerivedSignals { len, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_magnitude() {
        let s = derive_signals(&vec![[3.0, 4.0, 0.0, 1.0, 2.0, 0.0]; 210]);
        assert_eq!(s.len(), 210);
        assert!(s.channel(Channel::AccMagnitude).iter().all(|&v| v == 5.0));
        assert!(s.channel(Channel::GyroXY).iter().all(|&v| v == 5.0));
        assert!(s.channel(Channel::GyroXZ).iter().all(|&v| v == 1.0));
        assert!(s.channel(Channel::AccYZ).iter().all(|&v| v == 16.0));
    }

    #[test]
    fn zero_acceleration() {
        let s = derive_signals(&vec![[0.0, 0.0, 0.0, 0.3, -0.2, 0.1]; 210]);
        for c in [Channel::AccX, Channel::AccMagnitude, Channel::AccXY, Channel::AccXZ, Channel::AccYZ] {
            assert!(s.channel(c).iter().all(|&v| v == 0.0));
        }
        assert!(s.channel(Channel::GyroMagnitude).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn names_unique() {
        for (i, a) in Channel::ALL.iter().enumerate() {
            assert_eq!(a.index(), i);
            for b in &Channel::ALL[i + 1..] {
                assert_ne!(a.name(), b.name());
            }
        }
    }
}
