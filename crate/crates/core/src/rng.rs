//! Counter-based random numbers.
//!
//! Every draw is a pure function of a key built from `(seed, stream, coordinates, tag)`,
//! so fields can be evaluated lazily, in any order and on any number of threads.

use rand::RngCore;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a sequence of words into one key.
#[inline]
pub fn key(parts: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for &p in parts {
        h = mix64(h.wrapping_add(GOLDEN) ^ p);
    }
    h
}

/// Uniform on (0,1), never returning 0 or 1.
#[inline]
pub fn unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Purpose tags keep draws for different roles at the same coordinate independent.
pub mod tag {
    pub const WEIGHT: u64 = 1;
    pub const BROWNIAN: u64 = 2;
    pub const ATOM: u64 = 3;
    pub const CLOCK: u64 = 4;
    pub const TWO_LINE: u64 = 5;
    pub const AUX: u64 = 6;
    pub const SIDE: u64 = 7;
}

/// A SplitMix64 stream started from a key.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { state: key }
    }

    pub fn keyed(parts: &[u64]) -> Self {
        Stream::new(key(parts))
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit(self.next_u64())
    }

    /// Exp(rate) by inversion; rate ≤ 0 gives +∞ and rate = +∞ gives 0.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        exp_from_unit(self.uniform(), rate)
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let b = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&b[..chunk.len()]);
        }
    }
}

#[inline]
pub fn exp_from_unit(u: f64, rate: f64) -> f64 {
    if rate == f64::INFINITY {
        0.0
    } else if rate <= 0.0 {
        f64::INFINITY
    } else {
        -u.ln() / rate
    }
}

/// Derive an independent seed for a named sub-experiment.
pub fn subseed(seed: u64, label: u64) -> u64 {
    key(&[seed, tag::SIDE, label])
}
