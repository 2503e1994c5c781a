//! Splittable, counter-based seeding.
//!
//! Every draw gets its own ChaCha stream derived from `(seed, stream)`
//! by a SplitMix64 hash, so batches are reproducible bit-for-bit no
//! matter how draws are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 step.
fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    *state = z ^ (z >> 31);
}

/// Hash of `(seed, stream)`, used as the child seed for copy/draw
/// number `stream`.
pub fn child_seed(seed: u64, stream: u64) -> u64 {
    let mut s = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut s);
    splitmix64(&mut s);
    s
}

/// Independent generator for one stream of a batch.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut s = child_seed(seed, stream);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        splitmix64(&mut s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
