//! Seeded random number generation.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014): a counter-based
//! 64-bit mixer with a one-word state. It is fixed here by name so that a
//! reimplementation in another language reproduces every stream in this
//! crate from the same seed. Gaussians come from the plain Box-Muller
//! transform; each call consumes exactly two uniforms.

/// SplitMix64 stream. One `u64` of state, period 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval `(0, 1)`; safe to feed into `ln`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller. Consumes two uniforms per call.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Modulo bias is ~n/2^64, irrelevant for the small n used here.
        self.next_u64() % n
    }
}

/// Derives a child seed from a master seed and a path of indices, e.g.
/// `(seed, alpha_index, z_index, trial_index)`. Each part is folded through
/// the SplitMix64 mixer, so nearby paths give unrelated streams, and the
/// result does not depend on how callers partition work across threads.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = master;
    for &p in parts {
        let mut sm = SplitMix64::new(h ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        h = sm.next_u64();
    }
    h
}
