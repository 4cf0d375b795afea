//! Counter-based random streams.
//!
//! Every random decision in this crate is keyed by *where it happens*
//! (master seed, trajectory, layer, gate, ...) rather than by how many draws
//! preceded it. Streams can therefore be replayed or evaluated in any order,
//! which is what makes the trajectory-parallel simulator bit-reproducible
//! under any thread count.

use rand_core::{impls, Error, RngCore};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// The splitmix64 finalizer: an invertible avalanche mix.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A keyed counter generator: output `i` is `splitmix64(key + i*GOLDEN)`.
///
/// Statistically this is the splitmix64 generator; the key is derived by
/// folding an arbitrary list of coordinate words through the same mix, so
/// distinct coordinates give uncorrelated streams.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, ctr: 0 }
    }

    /// Derive a stream from a coordinate tuple such as
    /// `[seed, trajectory, layer, gate]`.
    pub fn keyed(parts: &[u64]) -> Self {
        let mut key = GOLDEN;
        for &p in parts {
            key = splitmix64(key ^ p.wrapping_add(GOLDEN));
            key = key.rotate_left(23);
        }
        CounterRng::new(splitmix64(key))
    }

    /// Uniform in [0, 1) with 53 random bits; never returns 1.0.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let out = splitmix64(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)));
        self.ctr = self.ctr.wrapping_add(1);
        out
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
