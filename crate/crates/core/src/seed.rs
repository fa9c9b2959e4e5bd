//! Counter-based seed derivation.
//!
//! Every random draw in an experiment is seeded by `derive(master, path)`,
//! where `path` names the draw: a purpose constant followed by counters such
//! as the held-out subject index, the step number and the model index. The
//! mixing function is SplitMix64 applied to the running state xor each path
//! element, so distinct paths give unrelated streams and the same path always
//! gives the same seed.

/// Purpose tags used as the first path element.
pub mod purpose {
    pub const SPLIT: u64 = 1;
    pub const STEP: u64 = 2;
    pub const MODEL: u64 = 3;
    pub const SAMPLE: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const SFS: u64 = 6;
    pub const SYNTH: u64 = 7;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &p in path {
        state = splitmix64(state ^ splitmix64(p));
    }
    state
}
