//! Deterministic pseudo-random source for fold shuffles and synthetic data.
//!
//! The generator is frozen so that seeds reproduce bit-identical datasets,
//! fold plans, and reports across runs and platforms:
//!
//! * stream: SplitMix64 (Steele, Lea & Flood's `splitmix64` finalizer over a
//!   Weyl sequence with increment `0x9E3779B97F4A7C15`);
//! * uniforms: the top 53 bits of each output scaled by 2^-53, giving
//!   doubles in `[0, 1)`;
//! * normals: Box–Muller on two consecutive uniforms, `r·cos θ` returned
//!   first and `r·sin θ` cached for the next call;
//! * shuffles: Fisher–Yates from the back, picking indices by modulo
//!   reduction of the raw 64-bit output.
//!
//! None of this is cryptographic; it only has to be reproducible.

/// SplitMix64 stream with a cached Box–Muller spare.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: seed,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate (Box–Muller, pair-cached).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(n) = self.spare_normal.take() {
            return n;
        }
        // 1 - u keeps the log argument in (0, 1].
        let r = (-2.0 * (1.0 - self.next_f64()).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.next_f64();
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            slice.swap(i, j);
        }
    }
}
