//! Counter-based splittable random streams.
//!
//! Every draw is a pure function of (root seed, substream tags,
//! counter), so Monte-Carlo runs stay byte-identical no matter how the
//! work is scheduled across threads.

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Substream purposes, used as derivation tags.
pub mod purpose {
    pub const RUN: u64 = 0x01;
    pub const SENSOR: u64 = 0x02;
    pub const STEP: u64 = 0x03;
    pub const DETECTION: u64 = 0x10;
    pub const NOISE: u64 = 0x11;
    pub const CLUTTER: u64 = 0x12;
    pub const SHUFFLE: u64 = 0x13;
}

#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            key: mix(seed ^ 0x5851_f42d_4c95_7f2d),
            counter: 0,
        }
    }

    /// Derives an independent child stream without consuming state.
    pub fn substream(&self, tag: u64, index: u64) -> Self {
        Self {
            key: mix(self.key ^ mix(tag.wrapping_mul(0xd605_1c5e_97f2_a829).wrapping_add(index))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.key.wrapping_add(self.counter.wrapping_mul(0xa076_1d64_78bd_642f)));
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        // Guard the log against an exact zero.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 / ((1u64 << 53) as f64 + 1.0);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Poisson by inversion; adequate for the rates used here.
    pub fn poisson(&mut self, lambda: f64) -> usize {
        assert!(
            (0.0..=200.0).contains(&lambda),
            "poisson rate out of supported range"
        );
        if lambda == 0.0 {
            return 0;
        }
        let mut u = self.next_f64();
        let mut p = (-lambda).exp();
        let mut k = 0usize;
        while u > p {
            u -= p;
            k += 1;
            p *= lambda / k as f64;
            if k > 10_000 {
                break;
            }
        }
        k
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
