//! Seedable pseudorandom generator for the synthetic-data contract.
//!
//! The generator algorithm is part of the external reproducibility
//! contract: fixtures must be regenerable byte-for-byte from a 64-bit seed,
//! in this implementation or any other. The stack is:
//!
//! - state initialization: SplitMix64 applied to the seed, four outputs;
//! - stream: xoshiro256** (Blackman & Vigna, public domain reference);
//! - uniforms: the top 53 bits mapped to [0, 1);
//! - normals: Box-Muller, cosine branch, one deviate per two uniforms;
//! - Poisson: Knuth multiplication, with exact halving for large means.

/// SplitMix64 stream used only to expand seeds into generator state.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256** with explicit 64-bit seeding.
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn from_seed(seed: u64) -> Self {
        let mut mix = SplitMix64 { state: seed };
        let mut s = [mix.next(), mix.next(), mix.next(), mix.next()];
        if s == [0, 0, 0, 0] {
            s[0] = 0x9E37_79B9_7F4A_7C15;
        }
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform deviate in [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate (Box-Muller, cosine branch).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps the log finite
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Poisson deviate with the given mean.
    ///
    /// Knuth's multiplication method is exact but O(mean); means above 60
    /// are split in half recursively (a sum of independent Poissons is
    /// Poisson), which also keeps e^(−mean) well away from underflow. The
    /// overall cost stays O(mean) per deviate, fine for count rates up to
    /// ~1e5 per bin.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(mean.is_finite() && mean >= 0.0, "Poisson mean must be ≥ 0");
        if mean == 0.0 {
            return 0;
        }
        if mean > 60.0 {
            let half = mean / 2.0;
            return self.poisson(half) + self.poisson(half);
        }
        let limit = (-mean).exp();
        let mut count = 0u64;
        let mut product = self.uniform();
        while product > limit {
            count += 1;
            product *= self.uniform();
        }
        count
    }
}
