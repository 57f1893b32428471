//! Deterministic counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a short tuple of
//! integer indices (seed, purpose tag, level, shift, sample, component). The
//! tuple is hashed into a 64-bit key; output `i` of the stream is the
//! SplitMix64 finalizer applied to `key + (i+1) * GAMMA`. Streams with
//! distinct keys are independent for all practical purposes and need no
//! shared state, so concurrent workers can draw from them freely.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream purpose tags, used to keep index tuples from colliding across
/// unrelated uses of the same (seed, level, shift) triple.
pub mod tag {
    /// Random shifts for lattice point sets.
    pub const SHIFT: u64 = 0x01;
    /// Monte Carlo parameter draws.
    pub const MC: u64 = 0x02;
}

#[inline]
fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Collapses a tuple of stream indices into a single 64-bit key.
pub fn stream_key(parts: &[u64]) -> u64 {
    let mut key: u64 = 0x243f_6a88_85a3_08d3;
    for &p in parts {
        key = mix(key.wrapping_add(GAMMA).wrapping_add(p));
    }
    key
}

/// A stateless counter-based stream. `uniform(i)` is the `i`-th output and
/// may be queried in any order.
#[derive(Clone, Copy, Debug)]
pub struct CounterStream {
    key: u64,
}

impl CounterStream {
    pub fn new(parts: &[u64]) -> Self {
        Self {
            key: stream_key(parts),
        }
    }

    #[inline]
    pub fn value(&self, index: u64) -> u64 {
        mix(self.key.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn uniform(&self, index: u64) -> f64 {
        (self.value(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn fill_uniform(&self, out: &mut [f64]) {
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.uniform(i as u64);
        }
    }
}
