//! splitmix64, the only random source in the crate.
//!
//! Each step adds `0x9E3779B97F4A7C15` to the 64-bit state and mixes the
//! result. Uniform doubles take the top 53 bits of an output, giving values
//! in `[0, 1)` on a grid of `2^-53`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Sub-seed `k` of `seed`: the first output of a generator seeded with `seed + k`.
pub fn split_seed(seed: u64, k: u64) -> u64 {
    SplitMix64::new(seed.wrapping_add(k)).next_u64()
}
