//! Deterministic seed streams.
//!
//! Every independent unit of work (a channel realization, an HPO trial, a
//! training run) draws from its own ChaCha stream selected by an integer
//! counter, so results never depend on how work is spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for stream `stream` under `master`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from `master` and a label. SplitMix64 finalizer.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut z = master ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
