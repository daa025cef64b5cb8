//! Deterministic random number streams.
//!
//! One master seed expands into named per-module seeds; per-draw generators
//! are ChaCha streams indexed by the draw number, so a parallel loop produces
//! identical results for any worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a, used for stable label and config hashing (not cryptographic).
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Expands `(master, label)` into a 32-byte ChaCha seed.
pub fn derive_seed(master: u64, label: &str) -> [u8; 32] {
    let mut state = master ^ fnv1a(label.as_bytes());
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    seed
}

/// Generator for one draw: stream `index` of the seed's ChaCha cipher.
pub fn stream_rng(seed: [u8; 32], index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}
