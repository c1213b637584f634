//! Seeded random streams.
//!
//! Every experiment derives independent ChaCha substreams from one 64-bit
//! seed, indexed by task number, so results never depend on how work is
//! scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws a base seed from a caller-supplied generator for fan-out work.
pub fn fork_seed<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

/// Seed for experiment `tag` under `seed` (splitmix64 finaliser), so that
/// e.g. different matrix sizes or clause ratios never share draws.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed-size chunks of `total` trials: `(chunk index, start, len)`.
pub fn chunks(total: u64, chunk: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut idx = 0;
    while start < total {
        let len = chunk.min(total - start);
        out.push((idx, start, len));
        start += len;
        idx += 1;
    }
    out
}
