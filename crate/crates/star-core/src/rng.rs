//! Small deterministic RNG used for seeded noise and solver probes.
//!
//! splitmix64 is tiny, has no state beyond one word, and is trivial to
//! reimplement in any language, which keeps external oracles exact.

/// splitmix64 stream.
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

    /// Uniform double in [0, 1) with 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in (0, 1]; safe as a logarithm argument.
    pub fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Uniform integer in [0, n) by rejection-free multiply-shift.
    /// n must be > 0.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // 128-bit multiply avoids modulo bias well below any scale used here.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal pair via Box-Muller.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// Partial Fisher-Yates: shuffles the first `k` slots of `items`.
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], k: usize) {
        let n = items.len();
        let k = k.min(n);
        for i in 0..k {
            let j = i + self.next_below(n - i);
            items.swap(i, j);
        }
    }
}

/// Derives an independent stream seed from a base seed and a stream tag.
/// Used so per-band generation does not depend on processing order.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = SplitMix64::new(seed ^ stream.wrapping_mul(0xA24B_AED4_963E_E407));
    rng.next_u64()
}
